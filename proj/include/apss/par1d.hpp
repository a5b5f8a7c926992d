#pragma once

#include "apss/core.hpp"
#include "apss/msgfabric.hpp"
#include "apss/partition.hpp"
#include "apss/profile.hpp"

#include <span>
#include <string>
#include <vector>

namespace apss {

enum class Pruning { none, local };
enum class Accumulation { flat, hypercube, recursive };
enum class DimDistribution { first_fit, cyclic };

struct VerticalOpts {
    Pruning pruning = Pruning::local;
    Accumulation accumulation = Accumulation::flat;
    std::size_t block_size = 1;
    DimDistribution distribution = DimDistribution::first_fit;

    /// Throws InvalidParams / NotPowerOfTwo for p ranks.
    void validate(int p) const;
};

/// t / p: some rank must see at least this much of any match.
double compute_t_local(double t, int p);

/// A match as found on one rank. max_partial is the largest per-rank partial
/// score that went into it (0 when unknown, e.g. horizontal matching).
struct RankMatch {
    VectorId i;
    VectorId j;
    double score;
    double max_partial;
};

/// Per-rank partial scores A of one query over this rank's dimensions, with
/// the rank's local candidate set C.
struct LocalScores {
    VectorId query = kNoVector;
    std::vector<double> scores;       // length n
    std::vector<VectorId> touched;    // ids with scores > 0, ascending
    std::vector<VectorId> candidates; // ascending
};

/// Scores x's slice against the local index. Candidates are the ids with
/// A[y] >= t_local under local pruning, every touched id otherwise.
LocalScores local_scores(const SparseVector& x_slice, const InvertedIndex& index, std::size_t n,
                         double t_local, Pruning pruning, OpCounters* counters = nullptr);

struct AccumulatedScore {
    VectorId id;
    double score;
    double max_partial;

    friend bool operator==(const AccumulatedScore&, const AccumulatedScore&) = default;
};

/// Scores homed on this rank (id mod p == rank), ascending by id.
using ScoreSlice = std::vector<AccumulatedScore>;

/// One candidate union over all queries, then p gathers deliver each home
/// rank its partials, summed in ascending rank order.
std::vector<ScoreSlice> accumulate_scores_flat(fabric::Communicator& comm,
                                               std::span<const LocalScores> local,
                                               RankProfile* profile = nullptr);

/// Same candidate union, with partials summed by hypercube accumulation.
std::vector<ScoreSlice> accumulate_scores_hypercube(fabric::Communicator& comm,
                                                    std::span<const LocalScores> local,
                                                    RankProfile* profile = nullptr);

/// Communicators for recursive halving: levels[0] is `comm`, each next level
/// keeps this rank's half, the last is a singleton. Requires a power of two.
std::vector<fabric::Communicator> bisection_communicators(fabric::Communicator& comm);

/// Recursive local pruning. Each level takes the union of the half-level
/// matches found at half the threshold as candidates, accumulates them across
/// the level and filters (strictly above t below the top, at least t at the
/// top). Without pruning, lower levels keep every non-zero score.
std::vector<ScoreSlice> merge_scores_rec(std::span<fabric::Communicator> levels,
                                         std::span<const LocalScores> local, double t,
                                         Pruning pruning, RankProfile* profile = nullptr);

/// A query for vertical matching: the slice of a vector on this rank's dimensions.
struct VerticalQuery {
    VectorId id;
    SparseVector slice;
    bool index_after = true;
};

/// One rank's side of vertical matching: owns the local index over its
/// dimensions and runs blocks of queries through local scoring and accumulation.
class VerticalMatcher {
public:
    VerticalMatcher(fabric::Communicator& comm, std::size_t n, std::size_t dims, double t,
                    const VerticalOpts& opts, RankProfile& profile);

    /// Queries are matched (and indexed when flagged) in order; all accumulation
    /// traffic of the block goes through one round of collectives. Returns the
    /// matches homed on this rank.
    std::vector<RankMatch> process_block(std::span<const VerticalQuery> block);

    const InvertedIndex& index() const { return index_; }

private:
    fabric::Communicator& comm_;
    std::vector<fabric::Communicator> levels_;
    std::size_t n_;
    double t_;
    VerticalOpts opts_;
    RankProfile& profile_;
    InvertedIndex index_;
};

/// Matches one query slice across the communicator (all ranks call in lockstep).
std::vector<RankMatch> par_find_matches_0_vert(VerticalMatcher& matcher, const VerticalQuery& query);

struct RankOutput {
    std::vector<RankMatch> matches;
    RankProfile profile;
};

DimPartition vertical_partition(const Dataset& data, int p, DimDistribution distribution);

/// Rank program of the vertical algorithm; `dims` assigns one part per rank.
RankOutput par_all_pairs_0_vert(fabric::Communicator& comm, const Dataset& data,
                                const DimPartition& dims, double t, const VerticalOpts& opts);

/// Rank program of the horizontal algorithm over cyclically distributed vectors.
RankOutput par_all_pairs_0_horiz(fabric::Communicator& comm, const Dataset& data, double t);

/// Result of a whole parallel run.
struct ParRun {
    MatchSet matches;
    std::vector<RankMatch> raw;  // every rank's matches, rank order
    RunProfile profile;
    std::vector<fabric::RankStats> stats;
};

/// Fills comm counters and times of a rank profile from fabric statistics.
void absorb_stats(RankProfile& profile, const fabric::RankStats& stats);

/// Merges rank outputs into a run; throws InvalidParams if two ranks emit the same pair.
ParRun collect_run(std::vector<RankOutput> outputs, std::vector<fabric::RankStats> stats,
                   std::string algo);

ParRun run_vertical(const Dataset& data, double t, int p, const VerticalOpts& opts,
                    const fabric::WorldOptions& world = {});
ParRun run_horizontal(const Dataset& data, double t, int p, const fabric::WorldOptions& world = {});

/// Elements broadcast by the horizontal all-gathers: size(V)·(p-1).
std::uint64_t horiz_comm_volume(const RunProfile& profile);

} // namespace apss
