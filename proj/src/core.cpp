#include "apss/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace apss {

SparseVector::SparseVector(VectorId id, std::vector<Entry> entries)
    : id_(id), entries_(std::move(entries)) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const Entry& e = entries_[k];
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw InvalidVector("vector " + std::to_string(id_) + ": weight at dim " +
                                std::to_string(e.dim) + " must be positive and finite");
        }
        if (k > 0 && entries_[k - 1].dim >= e.dim) {
            throw InvalidVector("vector " + std::to_string(id_) +
                                ": dimensions must be strictly ascending");
        }
    }
}

double SparseVector::norm() const {
    double sum = 0.0;
    for (const Entry& e : entries_) sum += e.weight * e.weight;
    return std::sqrt(sum);
}

double SparseVector::max_weight() const {
    double best = 0.0;
    for (const Entry& e : entries_) best = std::max(best, e.weight);
    return best;
}

double SparseVector::weight(DimId d) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), d,
                               [](const Entry& e, DimId dim) { return e.dim < dim; });
    return (it != entries_.end() && it->dim == d) ? it->weight : 0.0;
}

Dataset::Dataset(std::vector<SparseVector> vectors, std::size_t dims, bool normalized)
    : vectors_(std::move(vectors)), dims_(dims), normalized_(normalized) {
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        const SparseVector& v = vectors_[i];
        if (v.id() != i) {
            throw InvalidVector("vector at position " + std::to_string(i) + " has id " +
                                std::to_string(v.id()));
        }
        if (!v.empty() && v.entries().back().dim >= dims_) {
            throw InvalidVector("vector " + std::to_string(i) + " exceeds dimension count " +
                                std::to_string(dims_));
        }
        if (normalized_ && !v.empty() && std::abs(v.norm() - 1.0) > 1e-9) {
            throw InvalidVector("vector " + std::to_string(i) + " is not unit length");
        }
    }
}

Dataset Dataset::from_rows(const std::vector<std::vector<Entry>>& rows, std::size_t dims) {
    std::vector<SparseVector> vectors;
    vectors.reserve(rows.size());
    std::size_t max_dim_plus_one = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        vectors.emplace_back(static_cast<VectorId>(i), rows[i]);
        if (!rows[i].empty()) {
            max_dim_plus_one = std::max<std::size_t>(max_dim_plus_one, rows[i].back().dim + 1);
        }
    }
    return Dataset(std::move(vectors), dims == 0 ? max_dim_plus_one : dims);
}

std::size_t Dataset::nonzeros() const {
    std::size_t total = 0;
    for (const SparseVector& v : vectors_) total += v.size();
    return total;
}

Dataset Dataset::normalized_copy() const {
    std::vector<SparseVector> out;
    out.reserve(vectors_.size());
    for (const SparseVector& v : vectors_) out.push_back(v.empty() ? v : normalize(v));
    return Dataset(std::move(out), dims_, true);
}

double dot(std::span<const Entry> x, std::span<const Entry> y, OpCounters* counters) {
    double sum = 0.0;
    std::uint64_t mults = 0;
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < x.size() && b < y.size()) {
        if (x[a].dim == y[b].dim) {
            sum += x[a].weight * y[b].weight;
            ++mults;
            ++a;
            ++b;
        } else if (x[a].dim < y[b].dim) {
            ++a;
        } else {
            ++b;
        }
    }
    if (counters != nullptr) counters->multiplications += mults;
    return sum;
}

double dot(const SparseVector& x, const SparseVector& y) { return dot(x.entries(), y.entries()); }

double dot(const SparseVector& x, const SparseVector& y, OpCounters& counters) {
    return dot(x.entries(), y.entries(), &counters);
}

SparseVector normalize(const SparseVector& x) {
    if (x.empty()) throw EmptyVector();
    const double inv = 1.0 / x.norm();
    std::vector<Entry> scaled(x.entries().begin(), x.entries().end());
    for (Entry& e : scaled) e.weight *= inv;
    return SparseVector(x.id(), std::move(scaled));
}

void InvertedIndex::add(VectorId id, std::span<const Entry> entries) {
    for (const Entry& e : entries) {
        if (e.dim >= postings_.size()) {
            throw InvalidParams("dimension " + std::to_string(e.dim) + " outside index of " +
                                std::to_string(postings_.size()) + " dimensions");
        }
        auto& list = postings_[e.dim];
        if (!list.empty() && list.back().id >= id) {
            throw InvalidParams("posting ids must be inserted in ascending order");
        }
        list.push_back({id, e.weight});
    }
}

void InvertedIndex::prune_front(DimId d, std::size_t count) {
    pruned_front_[d] = std::min(pruned_front_[d] + count, postings_[d].size());
}

InvertedIndex build_inverted_index(const Dataset& data) {
    InvertedIndex index(data.dims());
    for (const SparseVector& v : data.vectors()) index.add(v);
    return index;
}

Dataset transpose_index(const InvertedIndex& index, std::size_t n) {
    std::vector<std::vector<Entry>> rows(n);
    for (DimId d = 0; d < index.dims(); ++d) {
        for (const Posting& p : index.postings(d)) rows.at(p.id).push_back({d, p.weight});
    }
    return Dataset::from_rows(rows, index.dims());
}

void MatchSet::add(VectorId a, VectorId b, double score) {
    if (a == b) throw InvalidParams("self match " + std::to_string(a));
    Key key = a < b ? Key{a, b} : Key{b, a};
    if (!pairs_.emplace(key, score).second) {
        throw InvalidParams("duplicate match (" + std::to_string(key.first) + ", " +
                            std::to_string(key.second) + ")");
    }
}

void MatchSet::merge(const MatchSet& other) {
    for (const auto& [key, score] : other.pairs_) add(key.first, key.second, score);
}

bool MatchSet::contains(VectorId a, VectorId b) const { return score(a, b).has_value(); }

std::optional<double> MatchSet::score(VectorId a, VectorId b) const {
    auto it = pairs_.find(a < b ? Key{a, b} : Key{b, a});
    if (it == pairs_.end()) return std::nullopt;
    return it->second;
}

std::vector<Match> MatchSet::to_vector() const {
    std::vector<Match> out;
    out.reserve(pairs_.size());
    for (const auto& [key, score] : pairs_) out.push_back({key.first, key.second, score});
    return out;
}

MatchDiff compare_within_band(const MatchSet& expected, const MatchSet& actual, double t,
                              double band) {
    MatchDiff diff;
    auto in_band = [&](double s) { return std::abs(s - t) <= band; };
    for (const auto& [key, score] : expected) {
        auto other = actual.score(key.first, key.second);
        if (!other) {
            if (!in_band(score)) diff.missing.push_back({key.first, key.second, score});
        } else if (std::abs(*other - score) > band) {
            diff.score_mismatch.push_back(
                {{key.first, key.second, score}, {key.first, key.second, *other}});
        }
    }
    for (const auto& [key, score] : actual) {
        if (!expected.contains(key.first, key.second) && !in_band(score)) {
            diff.extra.push_back({key.first, key.second, score});
        }
    }
    return diff;
}

MatchSet brute_force_all_pairs(const Dataset& data, double t, OpCounters* counters) {
    MatchSet out;
    const auto vectors = data.vectors();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const double s = dot(vectors[i].entries(), vectors[j].entries(), counters);
            if (s >= t) out.add(static_cast<VectorId>(i), static_cast<VectorId>(j), s);
        }
    }
    return out;
}

std::uint64_t dim_work_weight(const InvertedIndex& index, DimId d) {
    return work_weight(index.list_size(d));
}

std::uint64_t total_mult_count(const InvertedIndex& index) {
    std::uint64_t total = 0;
    for (DimId d = 0; d < index.dims(); ++d) {
        const std::uint64_t len = index.list_size(d);
        total += len * (len == 0 ? 0 : len - 1) / 2;
    }
    return total;
}

std::vector<std::size_t> posting_sizes(const Dataset& data) {
    std::vector<std::size_t> sizes(data.dims(), 0);
    for (const SparseVector& v : data.vectors()) {
        for (const Entry& e : v.entries()) ++sizes[e.dim];
    }
    return sizes;
}

std::vector<double> dim_max_weights(const Dataset& data) {
    std::vector<double> maxima(data.dims(), 0.0);
    for (const SparseVector& v : data.vectors()) {
        for (const Entry& e : v.entries()) maxima[e.dim] = std::max(maxima[e.dim], e.weight);
    }
    return maxima;
}

} // namespace apss
