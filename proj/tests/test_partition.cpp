#include "apss/dataset_io.hpp"
#include "apss/partition.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace apss;

namespace {

std::vector<std::size_t> random_sizes(oracle::Rng& rng, std::size_t m, double skew) {
    std::vector<std::size_t> sizes(m);
    for (std::size_t d = 0; d < m; ++d) {
        sizes[d] = static_cast<std::size_t>(1 + 500 * std::pow(rng.uniform(), skew));
    }
    return sizes;
}

std::uint64_t recomputed_load(const DimPartition& part, std::span<const std::size_t> sizes, int which) {
    std::uint64_t load = 0;
    for (std::size_t d = 0; d < sizes.size(); ++d) {
        if (part.owner[d] == which) load += sizes[d] * (sizes[d] + 1) / 2;
    }
    return load;
}

} // namespace

TEST_CASE("first-fit example trace") {
    const std::vector<std::size_t> sizes{4, 3, 3, 1};
    const DimPartition part = partition_dims_first_fit(sizes, 2);
    CHECK(part.owner == std::vector<int>{0, 1, 1, 0});
    CHECK(part.loads == std::vector<std::uint64_t>{11, 12});
}

TEST_CASE("first-fit degenerate cases") {
    const std::vector<std::size_t> sizes{5, 2, 9, 0};
    const DimPartition one = partition_dims_first_fit(sizes, 1);
    CHECK(one.owner == std::vector<int>{0, 0, 0, 0});

    const std::vector<std::size_t> equal(6, 4);
    const DimPartition two = partition_dims_first_fit(equal, 2);
    CHECK(two.owner == std::vector<int>{0, 1, 0, 1, 0, 1});
    CHECK(two.loads[0] == two.loads[1]);

    CHECK_THROWS_AS(partition_dims_first_fit(sizes, 0), InvalidParams);
}

TEST_CASE("partitions cover every dimension exactly once with correct loads") {
    oracle::Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::vector<std::size_t> sizes = random_sizes(rng, 10 + rng.below(200), 3.0);
        for (int p : {1, 2, 3, 4, 8}) {
            for (const DimPartition& part : {partition_dims_first_fit(sizes, p), partition_dims_cyclic(sizes, p)}) {
                REQUIRE(part.owner.size() == sizes.size());
                for (int owner : part.owner) CHECK((owner >= 0 && owner < p));
                for (int k = 0; k < p; ++k) CHECK(part.loads[k] == recomputed_load(part, sizes, k));
            }
        }
    }
}

TEST_CASE("first-fit balance bound on random profiles") {
    oracle::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<std::size_t> sizes = random_sizes(rng, 5 + rng.below(300), 1.0 + 3 * rng.uniform());
        const int p = 1 + static_cast<int>(rng.below(16));
        const DimPartition part = partition_dims_first_fit(sizes, p);
        std::uint64_t total = 0;
        std::uint64_t heaviest = 0;
        for (std::size_t s : sizes) {
            total += work_weight(s);
            heaviest = std::max(heaviest, work_weight(s));
        }
        const std::uint64_t peak = *std::max_element(part.loads.begin(), part.loads.end());
        CHECK(static_cast<double>(peak) <= static_cast<double>(total) / p + static_cast<double>(heaviest));
    }
}

TEST_CASE("cyclic distribution is less balanced than first-fit on Zipf data") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset data = gen_synthetic({2000, 500, 20, 1.2, seed});
        for (int p : {2, 4, 8}) {
            CHECK(partition_dims_cyclic(data, p).imbalance() > partition_dims_first_fit(data, p).imbalance());
        }
    }
}

TEST_CASE("cyclic vectors") {
    CHECK(cyclic_vectors(5, 2).owner == std::vector<int>{0, 1, 0, 1, 0});
    CHECK(cyclic_vectors(3, 1).owner == std::vector<int>{0, 0, 0});
    CHECK(cyclic_vectors(0, 4).owner.empty());
}

TEST_CASE("recursive bisection") {
    const std::vector<std::size_t> four{1, 1, 1, 1};
    const BisectionTree t1 = recursive_bisect_dims(four, 1);
    CHECK(t1.leaves().dims_of(0).size() == 2);
    CHECK(t1.leaves().dims_of(1).size() == 2);

    const BisectionTree t0 = recursive_bisect_dims(four, 0);
    CHECK(t0.levels.size() == 1);
    CHECK(t0.leaves().dims_of(0).size() == 4);

    const std::vector<std::size_t> five{5, 4, 3, 2, 1};
    const BisectionTree t2 = recursive_bisect_dims(five, 2);
    std::vector<std::size_t> leaf_sizes;
    for (int k = 0; k < 4; ++k) leaf_sizes.push_back(t2.leaves().dims_of(k).size());
    CHECK(leaf_sizes == std::vector<std::size_t>{2, 1, 1, 1});

    // Children refine their parent: part b splits into 2b and 2b+1.
    oracle::Rng rng(7);
    const std::vector<std::size_t> sizes = random_sizes(rng, 77, 2.0);
    const BisectionTree t3 = recursive_bisect_dims(sizes, 3);
    for (std::size_t level = 1; level < t3.levels.size(); ++level) {
        for (std::size_t d = 0; d < sizes.size(); ++d) {
            CHECK(t3.levels[level].owner[d] / 2 == t3.levels[level - 1].owner[d]);
        }
    }
    CHECK_THROWS_AS(recursive_bisect_dims(sizes, -1), InvalidParams);
}

TEST_CASE("checkerboard degenerates to the 1-D schemes") {
    const Dataset data = oracle::random_dataset(4, 37, 20, 6);
    const MeshAssignment single = checkerboard(data, 1, 1);
    CHECK(std::all_of(single.rows.owner.begin(), single.rows.owner.end(), [](int o) { return o == 0; }));
    CHECK(std::all_of(single.cols.owner.begin(), single.cols.owner.end(), [](int o) { return o == 0; }));
    CHECK(checkerboard(data, 2, 1).rows.owner == cyclic_vectors(data.size(), 2).owner);
    CHECK(checkerboard(data, 1, 2).cols.owner == partition_dims_first_fit(data, 2).owner);
    const MeshAssignment mesh = checkerboard(data, 3, 2);
    CHECK(mesh.row_of(4) == 1);
    CHECK(mesh.col_of(0) == mesh.cols.owner[0]);
}

TEST_CASE("restriction and partition dump") {
    const Dataset data = oracle::tiny3();
    DimPartition split;
    split.parts = 2;
    split.owner = {0, 1};
    split.loads = {3, 6};
    const SparseVector a = restrict_to(data[0], split, 0);
    CHECK(a.id() == 0);
    CHECK(a.size() == 1);
    CHECK(a.weight(0) == 0.6);
    CHECK(restrict_to(data[2], split, 0).empty());

    std::ostringstream out;
    write_partition(out, split);
    CHECK(out.str() == "part 0: 0\npart 1: 1\n");
}
