#include "apss/partition.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

namespace apss {

namespace {

void require_parts(int p) {
    if (p < 1) throw InvalidParams("part count must be >= 1, got " + std::to_string(p));
}

/// Dimension ids by decreasing list size, ties by ascending id.
std::vector<DimId> by_decreasing_size(std::span<const std::size_t> list_sizes,
                                      std::span<const DimId> dims) {
    std::vector<DimId> order(dims.begin(), dims.end());
    std::stable_sort(order.begin(), order.end(), [&](DimId a, DimId b) {
        return list_sizes[a] > list_sizes[b] || (list_sizes[a] == list_sizes[b] && a < b);
    });
    return order;
}

std::vector<DimId> all_dims(std::size_t m) {
    std::vector<DimId> dims(m);
    std::iota(dims.begin(), dims.end(), DimId{0});
    return dims;
}

DimPartition empty_partition(std::size_t m, int parts) {
    DimPartition out;
    out.parts = parts;
    out.owner.assign(m, 0);
    out.loads.assign(parts, 0);
    return out;
}

} // namespace

std::vector<DimId> DimPartition::dims_of(int part) const {
    std::vector<DimId> dims;
    for (std::size_t d = 0; d < owner.size(); ++d) {
        if (owner[d] == part) dims.push_back(static_cast<DimId>(d));
    }
    return dims;
}

double DimPartition::imbalance() const {
    const std::uint64_t total = std::accumulate(loads.begin(), loads.end(), std::uint64_t{0});
    if (total == 0) return 1.0;
    const std::uint64_t peak = *std::max_element(loads.begin(), loads.end());
    return static_cast<double>(peak) * parts / static_cast<double>(total);
}

DimPartition partition_dims_first_fit(std::span<const std::size_t> list_sizes, int p) {
    require_parts(p);
    DimPartition out = empty_partition(list_sizes.size(), p);
    const std::vector<DimId> dims = all_dims(list_sizes.size());
    for (DimId d : by_decreasing_size(list_sizes, dims)) {
        const auto least = std::min_element(out.loads.begin(), out.loads.end());
        const int part = static_cast<int>(least - out.loads.begin());
        out.owner[d] = part;
        *least += work_weight(list_sizes[d]);
    }
    return out;
}

DimPartition partition_dims_first_fit(const Dataset& data, int p) {
    const std::vector<std::size_t> sizes = posting_sizes(data);
    return partition_dims_first_fit(sizes, p);
}

DimPartition partition_dims_cyclic(std::span<const std::size_t> list_sizes, int p) {
    require_parts(p);
    DimPartition out = empty_partition(list_sizes.size(), p);
    for (std::size_t d = 0; d < list_sizes.size(); ++d) {
        const int part = static_cast<int>(d % static_cast<std::size_t>(p));
        out.owner[d] = part;
        out.loads[part] += work_weight(list_sizes[d]);
    }
    return out;
}

DimPartition partition_dims_cyclic(const Dataset& data, int p) {
    const std::vector<std::size_t> sizes = posting_sizes(data);
    return partition_dims_cyclic(sizes, p);
}

VecPartition cyclic_vectors(std::size_t n, int p) {
    require_parts(p);
    VecPartition out;
    out.parts = p;
    out.owner.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.owner[i] = static_cast<int>(i % static_cast<std::size_t>(p));
    return out;
}

BisectionTree recursive_bisect_dims(std::span<const std::size_t> list_sizes, int k) {
    if (k < 0) throw InvalidParams("bisection depth must be >= 0");
    BisectionTree tree;
    tree.levels.push_back(empty_partition(list_sizes.size(), 1));
    for (std::size_t d = 0; d < list_sizes.size(); ++d) {
        tree.levels[0].loads[0] += work_weight(list_sizes[d]);
    }
    for (int level = 1; level <= k; ++level) {
        const DimPartition& parent = tree.levels.back();
        DimPartition child = empty_partition(list_sizes.size(), parent.parts * 2);
        for (int part = 0; part < parent.parts; ++part) {
            const std::vector<DimId> dims = parent.dims_of(part);
            const std::vector<DimId> order = by_decreasing_size(list_sizes, dims);
            for (std::size_t i = 0; i < order.size(); ++i) {
                const int target = 2 * part + static_cast<int>(i % 2);
                child.owner[order[i]] = target;
                child.loads[target] += work_weight(list_sizes[order[i]]);
            }
        }
        tree.levels.push_back(std::move(child));
    }
    return tree;
}

BisectionTree recursive_bisect_dims(const Dataset& data, int k) {
    const std::vector<std::size_t> sizes = posting_sizes(data);
    return recursive_bisect_dims(sizes, k);
}

MeshAssignment checkerboard(const Dataset& data, int q, int r) {
    MeshAssignment mesh;
    mesh.q = q;
    mesh.r = r;
    mesh.rows = cyclic_vectors(data.size(), q);
    mesh.cols = partition_dims_first_fit(data, r);
    return mesh;
}

SparseVector restrict_to(const SparseVector& x, const DimPartition& partition, int part) {
    std::vector<Entry> kept;
    for (const Entry& e : x.entries()) {
        if (partition.owner[e.dim] == part) kept.push_back(e);
    }
    return SparseVector(x.id(), std::move(kept));
}

void write_partition(std::ostream& out, const DimPartition& partition) {
    std::vector<std::vector<DimId>> dims(partition.parts);
    for (std::size_t d = 0; d < partition.owner.size(); ++d) {
        dims[partition.owner[d]].push_back(static_cast<DimId>(d));
    }
    for (int part = 0; part < partition.parts; ++part) {
        out << "part " << part << ':';
        for (DimId d : dims[part]) out << ' ' << d;
        out << '\n';
    }
}

} // namespace apss
