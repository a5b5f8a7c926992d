#include "apss/par1d.hpp"

#include "apss/seqengine.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace apss {

using fabric::Communicator;

void VerticalOpts::validate(int p) const {
    if (block_size < 1) throw InvalidParams("block size must be >= 1");
    if (accumulation != Accumulation::flat && !fabric::is_power_of_two(p)) {
        throw NotPowerOfTwo(p);
    }
}

double compute_t_local(double t, int p) {
    if (p < 1) throw InvalidParams("p must be >= 1");
    return t / p;
}

LocalScores local_scores(const SparseVector& x_slice, const InvertedIndex& index, std::size_t n,
                         double t_local, Pruning pruning, OpCounters* counters) {
    LocalScores out;
    out.query = x_slice.id();
    out.scores.assign(n, 0.0);
    std::uint64_t mults = 0;
    for (const Entry& e : x_slice.entries()) {
        for (const Posting& p : index.postings(e.dim)) {
            double& cell = out.scores[p.id];
            if (cell == 0.0) out.touched.push_back(p.id);
            cell += e.weight * p.weight;
            ++mults;
        }
    }
    std::sort(out.touched.begin(), out.touched.end());
    if (pruning == Pruning::local) {
        for (VectorId y : out.touched) {
            if (out.scores[y] >= t_local) out.candidates.push_back(y);
        }
    } else {
        out.candidates = out.touched;
    }
    if (counters != nullptr) {
        counters->multiplications += mults;
        counters->note_candidates(out.candidates.size());
    }
    return out;
}

namespace {

using IdBundle = std::vector<std::vector<VectorId>>;
using PartialList = std::vector<std::pair<VectorId, double>>;

IdBundle union_bundles(IdBundle a, const IdBundle& b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        std::vector<VectorId> merged;
        merged.reserve(a[k].size() + b[k].size());
        std::set_union(a[k].begin(), a[k].end(), b[k].begin(), b[k].end(),
                       std::back_inserter(merged));
        a[k] = std::move(merged);
    }
    return a;
}

/// A' per query: this rank's non-zero partials on the global candidate ids.
std::vector<PartialList> partials_on(std::span<const LocalScores> local, const IdBundle& ids,
                                     RankProfile* profile) {
    std::vector<PartialList> out(local.size());
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < local.size(); ++k) {
        for (VectorId y : ids[k]) {
            const double a = local[k].scores[y];
            if (a > 0.0) out[k].emplace_back(y, a);
        }
        count += out[k].size();
    }
    if (profile != nullptr) profile->scores_communicated += count;
    return out;
}

/// Home rank h receives every rank's partials for ids y with y mod p == h,
/// one gather per home, and sums them in ascending rank order.
std::vector<ScoreSlice> accumulate_lists(Communicator& comm, const std::vector<PartialList>& al) {
    const int p = comm.size();
    const std::size_t queries = al.size();
    std::vector<ScoreSlice> mine(queries);
    for (int root = 0; root < p; ++root) {
        std::vector<PartialList> outgoing(queries);
        for (std::size_t k = 0; k < queries; ++k) {
            for (const auto& entry : al[k]) {
                if (static_cast<int>(entry.first % static_cast<VectorId>(p)) == root) {
                    outgoing[k].push_back(entry);
                }
            }
        }
        std::vector<std::vector<PartialList>> got = comm.gather(outgoing, root);
        if (root != comm.rank()) continue;
        for (std::size_t k = 0; k < queries; ++k) {
            ScoreSlice acc;
            for (const auto& from_rank : got) {
                acc = [&] {
                    ScoreSlice merged;
                    merged.reserve(acc.size() + from_rank[k].size());
                    std::size_t a = 0;
                    std::size_t b = 0;
                    const PartialList& in = from_rank[k];
                    while (a < acc.size() || b < in.size()) {
                        if (b == in.size() || (a < acc.size() && acc[a].id < in[b].first)) {
                            merged.push_back(acc[a++]);
                        } else if (a == acc.size() || in[b].first < acc[a].id) {
                            merged.push_back({in[b].first, in[b].second, in[b].second});
                            ++b;
                        } else {
                            merged.push_back({acc[a].id, acc[a].score + in[b].second,
                                              std::max(acc[a].max_partial, in[b].second)});
                            ++a;
                            ++b;
                        }
                    }
                    return merged;
                }();
            }
            mine[k] = std::move(acc);
        }
    }
    return mine;
}

IdBundle candidate_bundle(std::span<const LocalScores> local) {
    IdBundle ids(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) ids[k] = local[k].candidates;
    return ids;
}

struct Partial {
    double sum;
    double max;
};

std::vector<ScoreSlice> rec_level(std::span<Communicator> levels, std::size_t level,
                                  std::span<const LocalScores> local, double t, bool top,
                                  Pruning pruning, RankProfile* profile) {
    Communicator& comm = levels[level];
    const bool prune = pruning == Pruning::local;
    auto keep = [&](double score) {
        if (top) return score >= t;
        return prune ? score > t : score > 0.0;
    };
    std::vector<ScoreSlice> out(local.size());
    if (comm.size() == 1) {
        for (std::size_t k = 0; k < local.size(); ++k) {
            for (VectorId y : local[k].touched) {
                const double a = local[k].scores[y];
                if (keep(a)) out[k].push_back({y, a, a});
            }
        }
        return out;
    }
    const std::vector<ScoreSlice> child =
        rec_level(levels, level + 1, local, prune ? t / 2 : 0.0, false, pruning, profile);
    IdBundle ids(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) {
        for (const AccumulatedScore& s : child[k]) ids[k].push_back(s.id);
    }
    const IdBundle candidates = comm.all_reduce(ids, union_bundles);
    const std::vector<ScoreSlice> summed =
        accumulate_lists(comm, partials_on(local, candidates, profile));
    for (std::size_t k = 0; k < local.size(); ++k) {
        for (const AccumulatedScore& s : summed[k]) {
            if (keep(s.score)) out[k].push_back(s);
        }
    }
    return out;
}

} // namespace

std::vector<ScoreSlice> accumulate_scores_flat(Communicator& comm, std::span<const LocalScores> local,
                                               RankProfile* profile) {
    const IdBundle global = comm.all_reduce(candidate_bundle(local), union_bundles);
    return accumulate_lists(comm, partials_on(local, global, profile));
}

std::vector<ScoreSlice> accumulate_scores_hypercube(Communicator& comm,
                                                    std::span<const LocalScores> local,
                                                    RankProfile* profile) {
    using Key = std::pair<std::uint32_t, VectorId>;  // (query slot, candidate)
    const IdBundle global = comm.all_reduce(candidate_bundle(local), union_bundles);
    const std::vector<PartialList> al = partials_on(local, global, profile);

    std::vector<std::pair<Key, Partial>> list;
    for (std::size_t k = 0; k < al.size(); ++k) {
        for (const auto& [y, a] : al[k]) list.push_back({{static_cast<std::uint32_t>(k), y}, {a, a}});
    }
    const auto p = static_cast<VectorId>(comm.size());
    const auto merged = fabric::hypercube_accumulate(
        comm, list, [p](const Key& key) { return static_cast<int>(key.second % p); },
        [](const Partial& a, const Partial& b) {
            return Partial{a.sum + b.sum, std::max(a.max, b.max)};
        });

    std::vector<ScoreSlice> out(local.size());
    for (const auto& [key, value] : merged) {
        out[key.first].push_back({key.second, value.sum, value.max});
    }
    return out;
}

std::vector<Communicator> bisection_communicators(Communicator& comm) {
    if (!fabric::is_power_of_two(comm.size())) throw NotPowerOfTwo(comm.size());
    std::vector<Communicator> levels{comm};
    while (levels.back().size() > 1) {
        Communicator& c = levels.back();
        const int half = c.size() / 2;
        levels.push_back(c.split(c.rank() < half ? 0 : 1, c.rank()));
    }
    return levels;
}

std::vector<ScoreSlice> merge_scores_rec(std::span<Communicator> levels,
                                         std::span<const LocalScores> local, double t,
                                         Pruning pruning, RankProfile* profile) {
    if (levels.empty()) throw InvalidParams("merge_scores_rec needs at least one level");
    return rec_level(levels, 0, local, t, true, pruning, profile);
}

VerticalMatcher::VerticalMatcher(Communicator& comm, std::size_t n, std::size_t dims, double t,
                                 const VerticalOpts& opts, RankProfile& profile)
    : comm_(comm), n_(n), t_(t), opts_(opts), profile_(profile), index_(dims) {
    opts_.validate(comm.size());
    if (opts_.accumulation == Accumulation::recursive) levels_ = bisection_communicators(comm_);
}

std::vector<RankMatch> VerticalMatcher::process_block(std::span<const VerticalQuery> block) {
    const double t_local = compute_t_local(t_, comm_.size());
    std::vector<LocalScores> local;
    local.reserve(block.size());
    OpCounters ops;
    for (const VerticalQuery& q : block) {
        local.push_back(local_scores(q.slice, index_, n_, t_local, opts_.pruning, &ops));
        local.back().query = q.id;
        if (q.index_after) index_.add(q.id, q.slice.entries());
    }
    profile_.mult_count += ops.multiplications;
    profile_.cand_total += ops.candidates;
    profile_.cand_max = std::max(profile_.cand_max, ops.max_candidates);

    std::vector<ScoreSlice> slices;
    switch (opts_.accumulation) {
    case Accumulation::flat:
        slices = accumulate_scores_flat(comm_, local, &profile_);
        break;
    case Accumulation::hypercube:
        slices = accumulate_scores_hypercube(comm_, local, &profile_);
        break;
    case Accumulation::recursive:
        slices = merge_scores_rec(levels_, local, t_, opts_.pruning, &profile_);
        break;
    }

    std::vector<RankMatch> out;
    for (std::size_t k = 0; k < slices.size(); ++k) {
        for (const AccumulatedScore& s : slices[k]) {
            if (s.score >= t_) out.push_back({s.id, local[k].query, s.score, s.max_partial});
        }
    }
    return out;
}

std::vector<RankMatch> par_find_matches_0_vert(VerticalMatcher& matcher, const VerticalQuery& query) {
    return matcher.process_block(std::span<const VerticalQuery>(&query, 1));
}

DimPartition vertical_partition(const Dataset& data, int p, DimDistribution distribution) {
    return distribution == DimDistribution::cyclic ? partition_dims_cyclic(data, p)
                                                   : partition_dims_first_fit(data, p);
}

RankOutput par_all_pairs_0_vert(Communicator& comm, const Dataset& data, const DimPartition& dims,
                                double t, const VerticalOpts& opts) {
    if (dims.parts != comm.size()) throw SizeMismatch("partition does not match communicator size");
    RankOutput out;
    VerticalMatcher matcher(comm, data.size(), data.dims(), t, opts, out.profile);
    std::vector<VerticalQuery> block;
    for (std::size_t start = 0; start < data.size(); start += opts.block_size) {
        const std::size_t stop = std::min(data.size(), start + opts.block_size);
        block.clear();
        for (std::size_t i = start; i < stop; ++i) {
            block.push_back({static_cast<VectorId>(i), restrict_to(data[i], dims, comm.rank()), true});
        }
        auto found = matcher.process_block(block);
        out.matches.insert(out.matches.end(), found.begin(), found.end());
    }
    return out;
}

RankOutput par_all_pairs_0_horiz(Communicator& comm, const Dataset& data, double t) {
    const int p = comm.size();
    const int me = comm.rank();
    std::vector<VectorId> mine;
    for (std::size_t i = static_cast<std::size_t>(me); i < data.size(); i += static_cast<std::size_t>(p)) {
        mine.push_back(static_cast<VectorId>(i));
    }
    const std::size_t steps =
        comm.all_reduce(mine.size(), [](std::size_t a, std::size_t b) { return std::max(a, b); });

    RankOutput out;
    InvertedIndex index(data.dims());
    Accumulator acc(AccumulatorKind::dense_array, data.size());
    OpCounters ops;
    const SparseVector pad(kNoVector, {});
    for (std::size_t s = 0; s < steps; ++s) {
        const SparseVector& x = s < mine.size() ? data[mine[s]] : pad;
        const std::vector<SparseVector> xa = comm.all_gather(x);
        for (int proc = 0; proc < p; ++proc) {
            const SparseVector& q = xa[proc];
            if (q.id() == kNoVector) continue;
            for (const auto& [y, score] : find_matches_0(q, index, t, acc, &ops)) {
                out.matches.push_back({y, q.id(), score, 0.0});
            }
            if (proc == me) index.add(q);
        }
    }
    out.profile.mult_count = ops.multiplications;
    out.profile.cand_total = ops.candidates;
    out.profile.cand_max = ops.max_candidates;
    return out;
}

void absorb_stats(RankProfile& profile, const fabric::RankStats& stats) {
    profile.comm_elements = stats.sent;
    profile.comm_received = stats.received;
    profile.gathered_elements = stats.gathered;
    profile.collective_calls = stats.calls;
    profile.comm_time = stats.comm_seconds;
    profile.work_time = std::max(0.0, stats.total_seconds - stats.comm_seconds);
}

ParRun collect_run(std::vector<RankOutput> outputs, std::vector<fabric::RankStats> stats,
                   std::string algo) {
    ParRun run;
    run.profile.algo = std::move(algo);
    run.profile.p = static_cast<int>(outputs.size());
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        absorb_stats(outputs[r].profile, stats[r]);
        run.profile.ranks.push_back(outputs[r].profile);
        for (const RankMatch& m : outputs[r].matches) {
            run.matches.add(m.i, m.j, m.score);
            run.raw.push_back(m);
        }
    }
    run.stats = std::move(stats);
    return run;
}

ParRun run_vertical(const Dataset& data, double t, int p, const VerticalOpts& opts,
                    const fabric::WorldOptions& world) {
    opts.validate(p);
    const DimPartition dims = vertical_partition(data, p, opts.distribution);
    auto result = fabric::spawn_world(
        p, [&](Communicator& comm) { return par_all_pairs_0_vert(comm, data, dims, t, opts); },
        world);
    return collect_run(std::move(result.results), std::move(result.stats), "vertical");
}

ParRun run_horizontal(const Dataset& data, double t, int p, const fabric::WorldOptions& world) {
    auto result = fabric::spawn_world(
        p, [&](Communicator& comm) { return par_all_pairs_0_horiz(comm, data, t); }, world);
    return collect_run(std::move(result.results), std::move(result.stats), "horizontal");
}

std::uint64_t horiz_comm_volume(const RunProfile& profile) { return profile.total_gathered(); }

} // namespace apss
