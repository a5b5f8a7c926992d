#pragma once

#include "apss/core.hpp"
#include "apss/profile.hpp"

#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace apss {

enum class AccumulatorKind {
    hash_map,
    dense_array,
    /// Dense array that remembers written cells and zeroes only those on reset.
    touched_list,
};

using ScoredId = std::pair<VectorId, double>;

/// Candidate score map A, keyed by vector id.
class Accumulator {
public:
    Accumulator(AccumulatorKind kind, std::size_t n);

    AccumulatorKind kind() const { return kind_; }
    void add(VectorId y, double value);
    double get(VectorId y) const;
    /// True when y already holds a non-zero score.
    bool has(VectorId y) const { return get(y) != 0.0; }
    /// All non-zero scores, ascending by id.
    std::vector<ScoredId> nonzero() const;
    /// Scores >= t, ascending by id.
    std::vector<ScoredId> collect(double t) const;
    void reset();

private:
    AccumulatorKind kind_;
    std::vector<double> dense_;
    std::vector<VectorId> touched_;
    std::unordered_map<VectorId, double> map_;
};

enum class BaseAlgorithm { ap0, ap1, bruteforce };

struct VariantConfig {
    BaseAlgorithm base = BaseAlgorithm::ap0;
    AccumulatorKind accumulator = AccumulatorKind::hash_map;
    bool minsize = false;
    bool remscore = false;
    bool upperbound = false;

    /// Throws InvalidParams for combinations outside the variant family.
    void validate() const;
};

/// Unindexed prefixes x' of vectors under partial indexing.
class PartialVectorStore {
public:
    void put(VectorId id, std::vector<Entry> prefix);
    std::span<const Entry> prefix(VectorId id) const;
    double max_weight(VectorId id) const;

private:
    struct Slot {
        std::vector<Entry> entries;
        double max_weight = 0.0;
    };
    std::vector<Slot> slots_;
};

/// One probe of x against the index; returns candidates with score >= t and
/// leaves `acc` reset.
std::vector<ScoredId> find_matches_0(const SparseVector& x, const InvertedIndex& index, double t,
                                     Accumulator& acc, OpCounters* counters = nullptr);

/// Front-prunes the lists of x's dimensions: drops postings whose vector has
/// fewer than t / maxweight(x) entries. `vector_sizes` is indexed by posting id.
void minsize_prune(InvertedIndex& index, const SparseVector& x, double t,
                   std::span<const std::size_t> vector_sizes);

struct RemscoreSchedule {
    double initial = 0.0;
    /// Bound left after each entry has been processed.
    std::vector<double> remaining;
    /// Whether new candidates may still enter the accumulator at each entry.
    std::vector<bool> admits_new;
};

/// Remaining-score bound for entries processed in the given order.
RemscoreSchedule remscore_guard(std::span<const Entry> entries_in_order,
                                std::span<const double> dim_max_weights, double t);

/// True when score + min(|y'|,|x|)·maxweight(x)·maxweight(y') < t.
bool upperbound_skip(double score, std::size_t x_size, double x_max_weight,
                     std::size_t partial_size, double partial_max_weight, double t);
bool upperbound_skip(double score, const SparseVector& x, std::span<const Entry> y_partial,
                     double t);

/// Index-and-match over ids in order (ap0 family). cfg.base must be ap0.
MatchSet all_pairs_0(const Dataset& data, double t, const VariantConfig& cfg,
                     OpCounters* counters = nullptr);

/// Partial indexing over density-ordered dimensions (ap1 family). cfg.base must be ap1.
MatchSet all_pairs_1(const Dataset& data, double t, const VariantConfig& cfg,
                     OpCounters* counters = nullptr);

/// Inspection hook for the partial-indexing split: prefix length per vector.
std::vector<std::size_t> partial_prefix_lengths(const Dataset& data, double t);

/// Registered variant names, in the order they are listed in reports.
const std::vector<std::string>& variant_names();
/// Throws UnknownVariant.
VariantConfig variant_config(const std::string& name);

struct SeqRun {
    MatchSet matches;
    RunProfile profile;
};

SeqRun run_variant(const std::string& name, const Dataset& data, double t);

} // namespace apss
