#pragma once

#include "apss/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace apss {

/// Assignment of every dimension to one of `parts` parts, with per-part load Σ w[d].
struct DimPartition {
    int parts = 1;
    std::vector<int> owner;
    std::vector<std::uint64_t> loads;

    std::vector<DimId> dims_of(int part) const;
    /// max load / average load; 1 when the total load is zero.
    double imbalance() const;
};

/// Dimensions sorted by decreasing |I_d| go one by one to the least-loaded part.
DimPartition partition_dims_first_fit(std::span<const std::size_t> list_sizes, int p);
DimPartition partition_dims_first_fit(const Dataset& data, int p);

/// Dimension d goes to part d mod p. Kept for comparison against first-fit.
DimPartition partition_dims_cyclic(std::span<const std::size_t> list_sizes, int p);
DimPartition partition_dims_cyclic(const Dataset& data, int p);

struct VecPartition {
    int parts = 1;
    std::vector<int> owner;
};

VecPartition cyclic_vectors(std::size_t n, int p);

/// levels[l] splits the dimensions into 2^l parts; the binary numeral of a
/// part id spells its path from the root, most significant bit first.
struct BisectionTree {
    std::vector<DimPartition> levels;

    const DimPartition& leaves() const { return levels.back(); }
};

BisectionTree recursive_bisect_dims(std::span<const std::size_t> list_sizes, int k);
BisectionTree recursive_bisect_dims(const Dataset& data, int k);

struct MeshAssignment {
    int q = 1;
    int r = 1;
    VecPartition rows;
    DimPartition cols;

    int row_of(VectorId id) const { return rows.owner[id]; }
    int col_of(DimId d) const { return cols.owner[d]; }
};

/// Vectors cyclic over q rows, dimensions first-fit over r columns.
MeshAssignment checkerboard(const Dataset& data, int q, int r);

/// Entries of x whose dimension belongs to `part`.
SparseVector restrict_to(const SparseVector& x, const DimPartition& partition, int part);

/// One line per part: `part <id>: <dim> <dim> ...`.
void write_partition(std::ostream& out, const DimPartition& partition);

} // namespace apss
