#pragma once

#include "apss/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace apss {

using VectorId = std::uint32_t;
using DimId = std::uint32_t;

/// Marks a padding slot that carries no vector.
inline constexpr VectorId kNoVector = std::numeric_limits<VectorId>::max();

struct Entry {
    DimId dim;
    double weight;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// A sparse vector: entries strictly ascending by dimension, all weights positive.
class SparseVector {
public:
    SparseVector() = default;
    SparseVector(VectorId id, std::vector<Entry> entries);

    VectorId id() const { return id_; }
    void set_id(VectorId id) { id_ = id; }
    std::span<const Entry> entries() const { return entries_; }
    /// Number of stored entries, |x|.
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    double norm() const;
    double max_weight() const;
    /// Weight at dimension d, 0 when absent.
    double weight(DimId d) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    VectorId id_ = 0;
    std::vector<Entry> entries_;
};

/// Ordered collection of vectors with ids 0..n-1 over m dimensions.
class Dataset {
public:
    Dataset() = default;
    /// Validates ids, dimension bounds and (when flagged) unit norms.
    Dataset(std::vector<SparseVector> vectors, std::size_t dims, bool normalized = false);

    /// Builds a dataset from raw rows, numbering them in order. dims == 0 means max dim + 1.
    static Dataset from_rows(const std::vector<std::vector<Entry>>& rows, std::size_t dims = 0);

    std::size_t size() const { return vectors_.size(); }
    std::size_t dims() const { return dims_; }
    bool normalized() const { return normalized_; }
    const SparseVector& operator[](std::size_t i) const { return vectors_[i]; }
    std::span<const SparseVector> vectors() const { return vectors_; }
    /// Total number of non-zeroes, size(V).
    std::size_t nonzeros() const;

    /// Copy with every non-empty vector scaled to unit length.
    Dataset normalized_copy() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<SparseVector> vectors_;
    std::size_t dims_ = 0;
    bool normalized_ = false;
};

/// Instrumentation shared by every matching routine.
struct OpCounters {
    std::uint64_t multiplications = 0;
    std::uint64_t candidates = 0;
    std::uint64_t max_candidates = 0;

    void note_candidates(std::uint64_t count) {
        candidates += count;
        if (count > max_candidates) max_candidates = count;
    }
};

double dot(const SparseVector& x, const SparseVector& y);
double dot(const SparseVector& x, const SparseVector& y, OpCounters& counters);
/// Dot product over two raw entry lists sorted by dimension.
double dot(std::span<const Entry> x, std::span<const Entry> y, OpCounters* counters = nullptr);

/// Throws EmptyVector when x has no entries.
SparseVector normalize(const SparseVector& x);

struct Posting {
    VectorId id;
    double weight;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Per-dimension posting lists, ids ascending within each list.
/// Entries at the head of a list may be logically removed (front pruning).
class InvertedIndex {
public:
    explicit InvertedIndex(std::size_t dims = 0) : postings_(dims), pruned_front_(dims, 0) {}

    std::size_t dims() const { return postings_.size(); }

    void add(VectorId id, std::span<const Entry> entries);
    void add(const SparseVector& x) { add(x.id(), x.entries()); }

    /// Live postings of dimension d (pruned head excluded).
    std::span<const Posting> postings(DimId d) const {
        return std::span<const Posting>(postings_[d]).subspan(pruned_front_[d]);
    }
    /// Full posting list length |I_d|, including pruned entries.
    std::size_t list_size(DimId d) const { return postings_[d].size(); }
    std::size_t pruned_front(DimId d) const { return pruned_front_[d]; }
    /// Removes `count` more live entries from the head of list d.
    void prune_front(DimId d, std::size_t count);

private:
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::size_t> pruned_front_;
};

InvertedIndex build_inverted_index(const Dataset& data);

/// Transposes an index back into n vectors over index.dims() dimensions.
Dataset transpose_index(const InvertedIndex& index, std::size_t n);

struct Match {
    VectorId i;
    VectorId j;
    double score;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Set of matches in canonical (i < j) form, unique per pair, ordered by (i, j).
class MatchSet {
public:
    using Key = std::pair<VectorId, VectorId>;

    /// Canonicalizes the pair; throws InvalidParams on a self pair or duplicate.
    void add(VectorId a, VectorId b, double score);
    void merge(const MatchSet& other);

    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    bool contains(VectorId a, VectorId b) const;
    std::optional<double> score(VectorId a, VectorId b) const;
    std::vector<Match> to_vector() const;

    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }

    friend bool operator==(const MatchSet&, const MatchSet&) = default;

private:
    std::map<Key, double> pairs_;
};

/// Differences between two match sets, ignoring pairs whose score lies within
/// `band` of the threshold.
struct MatchDiff {
    std::vector<Match> missing;
    std::vector<Match> extra;
    std::vector<std::pair<Match, Match>> score_mismatch;

    bool ok() const { return missing.empty() && extra.empty() && score_mismatch.empty(); }
};

inline constexpr double kThresholdBand = 1e-9;

MatchDiff compare_within_band(const MatchSet& expected, const MatchSet& actual, double t,
                              double band = kThresholdBand);

/// Every pair with dot >= t by exhaustive pairwise products; no index.
MatchSet brute_force_all_pairs(const Dataset& data, double t, OpCounters* counters = nullptr);

/// w[d] = |I_d|(|I_d|+1)/2, the load of one dimension.
inline std::uint64_t work_weight(std::uint64_t list_size) { return list_size * (list_size + 1) / 2; }
std::uint64_t dim_work_weight(const InvertedIndex& index, DimId d);

/// Sum over dimensions of C(|I_d|, 2).
std::uint64_t total_mult_count(const InvertedIndex& index);

/// |I_d| for every dimension, computed straight from the vectors.
std::vector<std::size_t> posting_sizes(const Dataset& data);

/// maxweight_d(V) for every dimension.
std::vector<double> dim_max_weights(const Dataset& data);

} // namespace apss
