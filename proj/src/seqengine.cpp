#include "apss/seqengine.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace apss {

Accumulator::Accumulator(AccumulatorKind kind, std::size_t n) : kind_(kind) {
    if (kind_ == AccumulatorKind::hash_map) {
        map_.reserve(n / 4 + 1);
    } else {
        dense_.assign(n, 0.0);
    }
}

void Accumulator::add(VectorId y, double value) {
    switch (kind_) {
    case AccumulatorKind::hash_map:
        map_[y] += value;
        break;
    case AccumulatorKind::dense_array:
        dense_[y] += value;
        break;
    case AccumulatorKind::touched_list:
        if (dense_[y] == 0.0) touched_.push_back(y);
        dense_[y] += value;
        break;
    }
}

double Accumulator::get(VectorId y) const {
    if (kind_ == AccumulatorKind::hash_map) {
        auto it = map_.find(y);
        return it == map_.end() ? 0.0 : it->second;
    }
    return dense_[y];
}

std::vector<ScoredId> Accumulator::nonzero() const {
    std::vector<ScoredId> out;
    switch (kind_) {
    case AccumulatorKind::hash_map:
        out.assign(map_.begin(), map_.end());
        std::sort(out.begin(), out.end());
        break;
    case AccumulatorKind::dense_array:
        for (std::size_t y = 0; y < dense_.size(); ++y) {
            if (dense_[y] != 0.0) out.emplace_back(static_cast<VectorId>(y), dense_[y]);
        }
        break;
    case AccumulatorKind::touched_list:
        out.reserve(touched_.size());
        for (VectorId y : touched_) out.emplace_back(y, dense_[y]);
        std::sort(out.begin(), out.end());
        break;
    }
    return out;
}

std::vector<ScoredId> Accumulator::collect(double t) const {
    std::vector<ScoredId> all = nonzero();
    std::erase_if(all, [t](const ScoredId& s) { return !(s.second >= t); });
    return all;
}

void Accumulator::reset() {
    switch (kind_) {
    case AccumulatorKind::hash_map:
        map_.clear();
        break;
    case AccumulatorKind::dense_array:
        std::fill(dense_.begin(), dense_.end(), 0.0);
        break;
    case AccumulatorKind::touched_list:
        for (VectorId y : touched_) dense_[y] = 0.0;
        touched_.clear();
        break;
    }
}

void VariantConfig::validate() const {
    if (base == BaseAlgorithm::bruteforce && (minsize || remscore || upperbound)) {
        throw InvalidParams("brute force takes no optimizations");
    }
    if (upperbound && base != BaseAlgorithm::ap1) {
        throw InvalidParams("upperbound needs partial vectors (ap1)");
    }
}

void PartialVectorStore::put(VectorId id, std::vector<Entry> prefix) {
    if (slots_.size() <= id) slots_.resize(id + 1);
    Slot& slot = slots_[id];
    slot.max_weight = 0.0;
    for (const Entry& e : prefix) slot.max_weight = std::max(slot.max_weight, e.weight);
    slot.entries = std::move(prefix);
}

std::span<const Entry> PartialVectorStore::prefix(VectorId id) const {
    if (id >= slots_.size()) return {};
    return slots_[id].entries;
}

double PartialVectorStore::max_weight(VectorId id) const {
    return id < slots_.size() ? slots_[id].max_weight : 0.0;
}

std::vector<ScoredId> find_matches_0(const SparseVector& x, const InvertedIndex& index, double t,
                                     Accumulator& acc, OpCounters* counters) {
    std::uint64_t mults = 0;
    for (const Entry& e : x.entries()) {
        for (const Posting& p : index.postings(e.dim)) {
            acc.add(p.id, e.weight * p.weight);
            ++mults;
        }
    }
    std::vector<ScoredId> out = acc.nonzero();
    if (counters != nullptr) {
        counters->multiplications += mults;
        counters->note_candidates(out.size());
    }
    std::erase_if(out, [t](const ScoredId& s) { return !(s.second >= t); });
    acc.reset();
    return out;
}

void minsize_prune(InvertedIndex& index, const SparseVector& x, double t,
                   std::span<const std::size_t> vector_sizes) {
    if (x.empty()) return;
    const double minsize = t / x.max_weight();
    for (const Entry& e : x.entries()) {
        auto live = index.postings(e.dim);
        std::size_t drop = 0;
        while (drop < live.size() && static_cast<double>(vector_sizes[live[drop].id]) < minsize) {
            ++drop;
        }
        if (drop > 0) index.prune_front(e.dim, drop);
    }
}

RemscoreSchedule remscore_guard(std::span<const Entry> entries_in_order,
                                std::span<const double> dim_max_weights, double t) {
    RemscoreSchedule s;
    for (const Entry& e : entries_in_order) s.initial += e.weight * dim_max_weights[e.dim];
    double rem = s.initial;
    s.remaining.reserve(entries_in_order.size());
    s.admits_new.reserve(entries_in_order.size());
    for (const Entry& e : entries_in_order) {
        s.admits_new.push_back(!(rem < t));
        rem -= e.weight * dim_max_weights[e.dim];
        s.remaining.push_back(rem);
    }
    return s;
}

bool upperbound_skip(double score, std::size_t x_size, double x_max_weight,
                     std::size_t partial_size, double partial_max_weight, double t) {
    const double bound = static_cast<double>(std::min(partial_size, x_size)) * x_max_weight *
                         partial_max_weight;
    return score + bound < t;
}

bool upperbound_skip(double score, const SparseVector& x, std::span<const Entry> y_partial,
                     double t) {
    double partial_max = 0.0;
    for (const Entry& e : y_partial) partial_max = std::max(partial_max, e.weight);
    return upperbound_skip(score, x.size(), x.max_weight(), y_partial.size(), partial_max, t);
}

namespace {

/// Vectors rewritten into the engine's working frame: processing order gives
/// the internal ids, and ap1 renumbers dimensions by decreasing density.
struct WorkingSet {
    std::vector<SparseVector> vectors;  // vectors[k].id() == k
    std::vector<VectorId> original_id;
    std::vector<std::size_t> sizes;
    std::vector<double> dim_max;
    std::size_t dims = 0;
};

WorkingSet prepare(const Dataset& data, bool order_by_maxweight, bool reorder_dims) {
    WorkingSet ws;
    ws.dims = data.dims();
    const std::size_t n = data.size();

    ws.original_id.resize(n);
    std::iota(ws.original_id.begin(), ws.original_id.end(), VectorId{0});
    if (order_by_maxweight) {
        // minsize = t/maxweight(x) must never shrink along the processing order.
        std::stable_sort(ws.original_id.begin(), ws.original_id.end(),
                         [&](VectorId a, VectorId b) {
                             return data[a].max_weight() > data[b].max_weight();
                         });
    }

    std::vector<DimId> dim_map(ws.dims);
    std::iota(dim_map.begin(), dim_map.end(), DimId{0});
    if (reorder_dims) {
        const std::vector<std::size_t> sizes = posting_sizes(data);
        std::vector<DimId> by_density(ws.dims);
        std::iota(by_density.begin(), by_density.end(), DimId{0});
        std::stable_sort(by_density.begin(), by_density.end(),
                         [&](DimId a, DimId b) { return sizes[a] > sizes[b]; });
        for (DimId pos = 0; pos < ws.dims; ++pos) dim_map[by_density[pos]] = pos;
    }

    ws.vectors.reserve(n);
    ws.sizes.reserve(n);
    ws.dim_max.assign(ws.dims, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const SparseVector& src = data[ws.original_id[k]];
        std::vector<Entry> entries;
        entries.reserve(src.size());
        for (const Entry& e : src.entries()) entries.push_back({dim_map[e.dim], e.weight});
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
        for (const Entry& e : entries) ws.dim_max[e.dim] = std::max(ws.dim_max[e.dim], e.weight);
        ws.vectors.emplace_back(static_cast<VectorId>(k), std::move(entries));
        ws.sizes.push_back(src.size());
    }
    return ws;
}

/// Length of the unindexed prefix: entries before the running bound reaches t.
std::size_t split_point(const SparseVector& x, std::span<const double> dim_max, double t) {
    double bound = 0.0;
    const auto entries = x.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        bound += entries[k].weight * dim_max[entries[k].dim];
        if (bound >= t) return k;
    }
    return entries.size();
}

MatchSet run_engine(const Dataset& data, double t, const VariantConfig& cfg,
                    OpCounters* counters) {
    cfg.validate();
    if (cfg.minsize && !data.normalized()) {
        throw InvalidParams("minsize requires a normalized dataset");
    }
    const bool partial = cfg.base == BaseAlgorithm::ap1;
    WorkingSet ws = prepare(data, cfg.minsize, partial);
    const std::size_t n = ws.vectors.size();

    OpCounters local;
    OpCounters& ops = counters != nullptr ? *counters : local;
    InvertedIndex index(ws.dims);
    PartialVectorStore store;
    Accumulator acc(cfg.accumulator, n);
    MatchSet out;
    std::vector<Entry> order;

    for (std::size_t k = 0; k < n; ++k) {
        const SparseVector& x = ws.vectors[k];
        if (cfg.minsize) minsize_prune(index, x, t, ws.sizes);

        // Sparse end first under partial indexing.
        order.assign(x.entries().begin(), x.entries().end());
        if (partial) std::reverse(order.begin(), order.end());
        RemscoreSchedule guard;
        if (cfg.remscore) guard = remscore_guard(order, ws.dim_max, t);

        for (std::size_t e = 0; e < order.size(); ++e) {
            const bool admit = !cfg.remscore || guard.admits_new[e];
            for (const Posting& p : index.postings(order[e].dim)) {
                if (admit || acc.has(p.id)) {
                    acc.add(p.id, order[e].weight * p.weight);
                    ++ops.multiplications;
                }
            }
        }

        const std::vector<ScoredId> candidates = acc.nonzero();
        ops.note_candidates(candidates.size());
        const double x_max = x.max_weight();
        for (auto [y, score] : candidates) {
            if (partial) {
                const auto yp = store.prefix(y);
                if (cfg.upperbound &&
                    upperbound_skip(score, x.size(), x_max, yp.size(), store.max_weight(y), t)) {
                    continue;
                }
                score += dot(x.entries(), yp, &ops);
            }
            if (score >= t) out.add(ws.original_id[y], ws.original_id[k], score);
        }
        acc.reset();

        if (partial) {
            const std::size_t cut = split_point(x, ws.dim_max, t);
            const auto entries = x.entries();
            store.put(x.id(), std::vector<Entry>(entries.begin(), entries.begin() + cut));
            index.add(x.id(), entries.subspan(cut));
        } else {
            index.add(x);
        }
    }
    return out;
}

struct NamedVariant {
    const char* name;
    VariantConfig cfg;
};

const std::vector<NamedVariant>& variant_table() {
    using A = AccumulatorKind;
    using B = BaseAlgorithm;
    static const std::vector<NamedVariant> table = {
        {"all-pairs-0", {B::ap0, A::hash_map, false, false, false}},
        {"all-pairs-0-array", {B::ap0, A::dense_array, false, false, false}},
        {"all-pairs-0-array2", {B::ap0, A::touched_list, false, false, false}},
        {"all-pairs-0-remscore", {B::ap0, A::hash_map, false, true, false}},
        {"all-pairs-0-minsize", {B::ap0, A::hash_map, true, false, false}},
        {"all-pairs-1", {B::ap1, A::hash_map, false, false, false}},
        {"all-pairs-1-array", {B::ap1, A::dense_array, false, false, false}},
        {"all-pairs-1-remscore", {B::ap1, A::hash_map, false, true, false}},
        {"all-pairs-1-upperbound", {B::ap1, A::hash_map, false, false, true}},
        {"all-pairs-1-minsize", {B::ap1, A::hash_map, true, false, false}},
        {"all-pairs-1-remscore-minsize", {B::ap1, A::hash_map, true, true, false}},
        {"all-pairs-2", {B::ap1, A::hash_map, true, true, true}},
        {"all-pairs-bruteforce", {B::bruteforce, A::hash_map, false, false, false}},
    };
    return table;
}

} // namespace

MatchSet all_pairs_0(const Dataset& data, double t, const VariantConfig& cfg,
                     OpCounters* counters) {
    if (cfg.base != BaseAlgorithm::ap0) throw InvalidParams("all_pairs_0 needs an ap0 config");
    return run_engine(data, t, cfg, counters);
}

MatchSet all_pairs_1(const Dataset& data, double t, const VariantConfig& cfg,
                     OpCounters* counters) {
    if (cfg.base != BaseAlgorithm::ap1) throw InvalidParams("all_pairs_1 needs an ap1 config");
    return run_engine(data, t, cfg, counters);
}

std::vector<std::size_t> partial_prefix_lengths(const Dataset& data, double t) {
    WorkingSet ws = prepare(data, false, true);
    std::vector<std::size_t> out;
    out.reserve(ws.vectors.size());
    for (const SparseVector& x : ws.vectors) out.push_back(split_point(x, ws.dim_max, t));
    return out;
}

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const NamedVariant& nv : variant_table()) v.emplace_back(nv.name);
        return v;
    }();
    return names;
}

VariantConfig variant_config(const std::string& name) {
    for (const NamedVariant& nv : variant_table()) {
        if (name == nv.name) return nv.cfg;
    }
    throw UnknownVariant(name);
}

SeqRun run_variant(const std::string& name, const Dataset& data, double t) {
    const VariantConfig cfg = variant_config(name);
    OpCounters ops;
    const auto start = std::chrono::steady_clock::now();
    SeqRun run;
    switch (cfg.base) {
    case BaseAlgorithm::bruteforce:
        run.matches = brute_force_all_pairs(data, t, &ops);
        break;
    case BaseAlgorithm::ap0:
        run.matches = all_pairs_0(data, t, cfg, &ops);
        break;
    case BaseAlgorithm::ap1:
        run.matches = all_pairs_1(data, t, cfg, &ops);
        break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    run.profile.algo = name;
    run.profile.p = 1;
    RankProfile rank;
    rank.mult_count = ops.multiplications;
    rank.cand_total = ops.candidates;
    rank.cand_max = ops.max_candidates;
    rank.work_time = elapsed.count();
    run.profile.ranks.push_back(rank);
    return run;
}

} // namespace apss
