#include "apss/par2d.hpp"

#include <algorithm>
#include <string>

namespace apss {

using fabric::Communicator;

MeshContext build_mesh(Communicator& comm, int q, int r) {
    if (q < 1 || r < 1 || comm.size() != q * r) {
        throw SizeMismatch("mesh " + std::to_string(q) + "x" + std::to_string(r) + " needs " +
                           std::to_string(static_cast<long long>(q) * r) + " ranks, have " +
                           std::to_string(comm.size()));
    }
    const int row = comm.rank() / r;
    const int col = comm.rank() % r;
    Communicator myrow = comm.split(row, col);
    Communicator mycol = comm.split(col, row);
    return MeshContext{comm, myrow, mycol, row, col, q, r};
}

RankOutput par_all_pairs_0_2d(MeshContext& mesh, const Dataset& data, const DimPartition& cols,
                              double t, const VerticalOpts& opts) {
    if (cols.parts != mesh.r) throw SizeMismatch("column partition does not match mesh");
    RankOutput out;
    VerticalMatcher matcher(mesh.myrow, data.size(), data.dims(), t, opts, out.profile);

    std::vector<VectorId> mine;
    for (std::size_t i = static_cast<std::size_t>(mesh.rowid); i < data.size();
         i += static_cast<std::size_t>(mesh.q)) {
        mine.push_back(static_cast<VectorId>(i));
    }
    const std::size_t steps = mesh.mycol.all_reduce(
        mine.size(), [](std::size_t a, std::size_t b) { return std::max(a, b); });

    const SparseVector pad(kNoVector, {});
    std::vector<VerticalQuery> queries;
    for (std::size_t start = 0; start < steps; start += opts.block_size) {
        const std::size_t stop = std::min(steps, start + opts.block_size);
        std::vector<SparseVector> bundle;
        for (std::size_t s = start; s < stop; ++s) {
            bundle.push_back(s < mine.size() ? restrict_to(data[mine[s]], cols, mesh.colid) : pad);
        }
        const std::vector<std::vector<SparseVector>> xa = mesh.mycol.all_gather(bundle);

        queries.clear();
        for (std::size_t b = 0; b < bundle.size(); ++b) {
            for (int proc = 0; proc < mesh.q; ++proc) {
                const SparseVector& slice = xa[proc][b];
                if (slice.id() == kNoVector) continue;
                queries.push_back({slice.id(), slice, proc == mesh.rowid});
            }
        }
        auto emit = [&](std::vector<RankMatch> found) {
            out.matches.insert(out.matches.end(), found.begin(), found.end());
        };
        if (opts.block_size == 1) {
            for (const VerticalQuery& query : queries) emit(par_find_matches_0_vert(matcher, query));
        } else {
            emit(matcher.process_block(queries));
        }
    }
    return out;
}

ParRun run_2d(const Dataset& data, double t, int q, int r, const VerticalOpts& opts,
              const fabric::WorldOptions& world) {
    if (q < 1 || r < 1) throw SizeMismatch("mesh dimensions must be positive");
    opts.validate(r);
    const DimPartition cols = partition_dims_first_fit(data, r);
    auto result = fabric::spawn_world(
        q * r,
        [&](Communicator& comm) {
            MeshContext mesh = build_mesh(comm, q, r);
            return par_all_pairs_0_2d(mesh, data, cols, t, opts);
        },
        world);
    return collect_run(std::move(result.results), std::move(result.stats),
                       "2d-" + std::to_string(q) + "x" + std::to_string(r));
}

} // namespace apss
