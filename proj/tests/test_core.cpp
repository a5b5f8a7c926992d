#include "apss/core.hpp"
#include "oracle.hpp"

#include <doctest.h>

using namespace apss;

namespace {

SparseVector vec(std::vector<Entry> entries) { return SparseVector(0, std::move(entries)); }

} // namespace

TEST_CASE("dot products") {
    CHECK(dot(vec({{0, 0.6}, {1, 0.8}}), vec({{0, 0.8}, {1, 0.6}})) == doctest::Approx(0.96).epsilon(1e-15));
    CHECK(dot(vec({{0, 0.6}, {1, 0.8}}), vec({{2, 1.0}})) == 0.0);
    CHECK(dot(vec({{1, 1.0}}), vec({{1, 1.0}})) == 1.0);

    OpCounters ops;
    dot(vec({{0, 1.0}, {3, 2.0}, {5, 1.0}}), vec({{3, 1.0}, {5, 4.0}}), ops);
    CHECK(ops.multiplications == 2);
}

TEST_CASE("dot is symmetric bit for bit") {
    const Dataset data = oracle::random_dataset(11, 60, 30, 12);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.size(); ++j) CHECK(dot(data[i], data[j]) == dot(data[j], data[i]));
    }
}

TEST_CASE("normalize") {
    const SparseVector a = normalize(vec({{0, 3}, {1, 4}}));
    CHECK(a.weight(0) == doctest::Approx(0.6));
    CHECK(a.weight(1) == doctest::Approx(0.8));
    CHECK(normalize(vec({{5, 7}})).weight(5) == 1.0);
    const SparseVector c = normalize(vec({{0, 1}, {1, 1}}));
    CHECK(c.weight(0) == doctest::Approx(0.7071067811865476));
    CHECK(c.weight(0) == c.weight(1));
    CHECK_THROWS_AS(normalize(vec({})), EmptyVector);
}

TEST_CASE("sparse vectors reject bad entries") {
    CHECK_THROWS_AS(vec({{1, 0.5}, {0, 0.5}}), InvalidVector);
    CHECK_THROWS_AS(vec({{1, 0.5}, {1, 0.5}}), InvalidVector);
    CHECK_THROWS_AS(vec({{1, -0.5}}), InvalidVector);
    CHECK_THROWS_AS(vec({{1, 0.0}}), InvalidVector);
}

TEST_CASE("datasets validate ids, bounds and norms") {
    CHECK_THROWS_AS(Dataset({SparseVector(1, {{0, 1.0}})}, 1), InvalidVector);
    CHECK_THROWS_AS(Dataset({SparseVector(0, {{4, 1.0}})}, 3), InvalidVector);
    CHECK_THROWS_AS(Dataset({SparseVector(0, {{0, 2.0}})}, 1, true), InvalidVector);
    const Dataset data = oracle::random_dataset(3, 40, 20, 6);
    for (const SparseVector& x : data.vectors()) CHECK(std::abs(x.norm() - 1.0) <= 1e-9);
}

TEST_CASE("inverted index of TINY3") {
    const InvertedIndex index = build_inverted_index(oracle::tiny3());
    const std::vector<Posting> d0(index.postings(0).begin(), index.postings(0).end());
    const std::vector<Posting> d1(index.postings(1).begin(), index.postings(1).end());
    CHECK(d0 == std::vector<Posting>{{0, 0.6}, {1, 0.8}});
    CHECK(d1 == std::vector<Posting>{{0, 0.8}, {1, 0.6}, {2, 1.0}});
    CHECK(total_mult_count(index) == 4);
}

TEST_CASE("inverted index edge cases") {
    const InvertedIndex empty = build_inverted_index(Dataset({}, 4));
    for (DimId d = 0; d < 4; ++d) CHECK(empty.postings(d).empty());

    const InvertedIndex one = build_inverted_index(Dataset::from_rows({{{3, 1.0}}}));
    CHECK(one.list_size(3) == 1);
    for (DimId d = 0; d < 3; ++d) CHECK(one.list_size(d) == 0);
    CHECK(total_mult_count(one) == 0);

    const InvertedIndex four = build_inverted_index(
        Dataset::from_rows({{{0, 1.0}}, {{0, 1.0}}, {{0, 1.0}}, {{0, 1.0}}}));
    CHECK(total_mult_count(four) == 6);

    InvertedIndex index(2);
    index.add(5, std::vector<Entry>{{0, 1.0}});
    CHECK_THROWS_AS(index.add(4, std::vector<Entry>{{0, 1.0}}), InvalidParams);
    CHECK_THROWS_AS(index.add(6, std::vector<Entry>{{2, 1.0}}), InvalidParams);
}

TEST_CASE("front pruning stays within the list") {
    InvertedIndex index = build_inverted_index(oracle::tiny3());
    index.prune_front(1, 2);
    CHECK(index.postings(1).size() == 1);
    CHECK(index.pruned_front(1) == 2);
    CHECK(index.list_size(1) == 3);
    index.prune_front(1, 5);
    CHECK(index.pruned_front(1) == 3);
    CHECK(index.postings(1).empty());
}

TEST_CASE("work weights") {
    CHECK(work_weight(3) == 6);
    CHECK(work_weight(0) == 0);
    CHECK(work_weight(1) == 1);
    const InvertedIndex index = build_inverted_index(oracle::tiny3());
    CHECK(dim_work_weight(index, 0) == 3);
    CHECK(dim_work_weight(index, 1) == 6);
}

TEST_CASE("transposing the index back reproduces the dataset") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Dataset data = oracle::random_dataset(seed, 1 + seed * 7, 5 + seed, 8);
        CHECK(transpose_index(build_inverted_index(data), data.size()).vectors().size() == data.size());
        const Dataset back = transpose_index(build_inverted_index(data), data.size());
        for (std::size_t i = 0; i < data.size(); ++i) CHECK(back[i] == data[i]);
    }
}

TEST_CASE("brute force on TINY3") {
    const Dataset d = oracle::tiny3();
    const MatchSet m7 = brute_force_all_pairs(d, 0.7);
    CHECK(m7.size() == 2);
    CHECK(*m7.score(0, 1) == doctest::Approx(0.96));
    CHECK(*m7.score(0, 2) == doctest::Approx(0.8));
    const MatchSet m5 = brute_force_all_pairs(d, 0.5);
    CHECK(m5.size() == 3);
    CHECK(*m5.score(1, 2) == doctest::Approx(0.6));
    CHECK(brute_force_all_pairs(d, 0.97).empty());
}

TEST_CASE("brute force agrees with the dense oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Dataset data = oracle::random_dataset(seed, 80, 30, 10);
        const double t = oracle::threshold_for(data, 100);
        CHECK(oracle::differences(oracle::all_pairs(data, t), brute_force_all_pairs(data, t), t) == "");
    }
}

TEST_CASE("match sets are canonical and unique") {
    MatchSet m;
    m.add(4, 2, 0.5);
    CHECK(m.contains(2, 4));
    CHECK(m.contains(4, 2));
    CHECK(m.to_vector() == std::vector<Match>{{2, 4, 0.5}});
    CHECK_THROWS_AS(m.add(2, 4, 0.5), InvalidParams);
    CHECK_THROWS_AS(m.add(3, 3, 1.0), InvalidParams);
}

TEST_CASE("comparison ignores the band around t") {
    MatchSet expected;
    expected.add(0, 1, 0.7 + 1e-10);
    expected.add(0, 2, 0.9);
    MatchSet actual;
    actual.add(0, 2, 0.9 + 1e-12);
    actual.add(1, 2, 0.7 - 1e-10 + 1e-10);
    CHECK(compare_within_band(expected, actual, 0.7).ok());
    actual.add(3, 4, 0.8);
    const MatchDiff diff = compare_within_band(expected, actual, 0.7);
    CHECK(diff.extra.size() == 1);
    CHECK(diff.missing.empty());
}
