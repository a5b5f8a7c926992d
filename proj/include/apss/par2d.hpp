#pragma once

#include "apss/par1d.hpp"

namespace apss {

/// A rank's place in a q×r mesh, numbered row-major.
struct MeshContext {
    fabric::Communicator world;
    fabric::Communicator myrow;  // the r ranks of this row, ranked by column
    fabric::Communicator mycol;  // the q ranks of this column, ranked by row
    int rowid = 0;
    int colid = 0;
    int q = 1;
    int r = 1;
};

/// Splits `comm` by row and by column. Throws SizeMismatch unless comm.size() == q·r.
MeshContext build_mesh(fabric::Communicator& comm, int q, int r);

/// Rank program of the 2-D algorithm. Vectors are cyclic over rows, dimensions
/// follow `cols` (one part per column). Each step gathers the rows' current
/// vectors within the column and matches them across the row. block_size
/// bundles that many steps into one gather and one accumulation round.
RankOutput par_all_pairs_0_2d(MeshContext& mesh, const Dataset& data, const DimPartition& cols,
                              double t, const VerticalOpts& opts);

ParRun run_2d(const Dataset& data, double t, int q, int r, const VerticalOpts& opts,
              const fabric::WorldOptions& world = {});

} // namespace apss
