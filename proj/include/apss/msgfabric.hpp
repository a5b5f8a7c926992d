#pragma once

// In-process SPMD message passing: p virtual ranks run one program each and
// interact only through lockstep collectives on communicators.

#include "apss/core.hpp"
#include "apss/errors.hpp"

#include <any>
#include <bit>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <ranges>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace apss::fabric {

enum class CollectiveKind : int { all_gather, all_reduce, gather, split, exchange };

const char* to_string(CollectiveKind kind);

/// Communication volume of a payload in elements: ranges count their
/// elements recursively, sized objects count size(), everything else is one.
template <class T>
std::uint64_t payload_elements(const T& value) {
    if constexpr (std::ranges::range<T>) {
        std::uint64_t total = 0;
        for (const auto& item : value) total += payload_elements(item);
        return total;
    } else if constexpr (requires { value.size(); }) {
        return static_cast<std::uint64_t>(value.size());
    } else {
        return 1;
    }
}

struct TraceEntry {
    CollectiveKind kind;
    std::string comm;
    std::uint64_t elements;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Per-rank instrumentation, shared by every communicator the rank belongs to.
struct RankStats {
    std::uint64_t calls = 0;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t gathered = 0;  // elements sent through all_gather
    double comm_seconds = 0.0;
    double total_seconds = 0.0;
    std::vector<TraceEntry> trace;
};

enum class Scheduler {
    concurrent,
    /// One rank runs at a time; control passes round-robin at blocking points.
    sequential,
};

struct WorldOptions {
    Scheduler scheduler = Scheduler::concurrent;
    bool trace = false;
};

namespace detail {
class WorldState;
struct GroupState;
struct RankContext;
struct Membership;
/// Receives every rank's deposit once the collective is complete; returns the
/// number of elements this rank received.
using Reader = std::function<std::uint64_t(const std::vector<std::any>& deposits,
                                           const std::vector<int>& aux)>;
} // namespace detail

class Communicator {
public:
    int rank() const;
    int size() const;
    /// Deterministic name of the group, e.g. "world" or "world.3:1".
    const std::string& label() const;
    RankStats& stats();

    /// Every rank receives all items in rank order.
    template <class T>
    std::vector<T> all_gather(const T& item) {
        std::vector<T> out;
        const std::uint64_t sent = static_cast<std::uint64_t>(size() - 1) * payload_elements(item);
        stats().gathered += sent;
        rendezvous(CollectiveKind::all_gather, 0, std::any(item), sent,
                   [&](const std::vector<std::any>& deposits, const std::vector<int>&) {
                       return copy_all(deposits, out);
                   });
        return out;
    }

    /// Left fold of all items in ascending rank order, delivered to every rank.
    template <class T, class Op>
    T all_reduce(const T& item, Op op) {
        std::vector<T> items;
        const std::uint64_t sent = static_cast<std::uint64_t>(size() - 1) * payload_elements(item);
        rendezvous(CollectiveKind::all_reduce, 0, std::any(item), sent,
                   [&](const std::vector<std::any>& deposits, const std::vector<int>&) {
                       return copy_all(deposits, items);
                   });
        T acc = std::move(items.front());
        for (std::size_t r = 1; r < items.size(); ++r) acc = op(std::move(acc), items[r]);
        return acc;
    }

    /// Root receives all items in rank order; other ranks receive an empty vector.
    template <class T>
    std::vector<T> gather(const T& item, int root) {
        if (root < 0 || root >= size()) {
            throw InvalidRoot("gather root " + std::to_string(root) + " outside communicator of " +
                              std::to_string(size()));
        }
        std::vector<T> out;
        const std::uint64_t sent = rank() == root ? 0 : payload_elements(item);
        rendezvous(CollectiveKind::gather, root, std::any(item), sent,
                   [&](const std::vector<std::any>& deposits, const std::vector<int>&) {
                       return rank() == root ? copy_all(deposits, out) : 0;
                   });
        return out;
    }

    /// Pairwise swap: every rank calls with its partner; partners must agree.
    template <class T>
    T exchange(const T& item, int partner) {
        if (partner < 0 || partner >= size()) {
            throw InvalidParams("exchange partner " + std::to_string(partner) + " out of range");
        }
        std::optional<T> out;
        const std::uint64_t sent = partner == rank() ? 0 : payload_elements(item);
        rendezvous(CollectiveKind::exchange, partner, std::any(item), sent,
                   [&](const std::vector<std::any>& deposits, const std::vector<int>& aux) {
                       if (aux[partner] != rank()) {
                           throw DeadlockError("exchange partners disagree in " + label());
                       }
                       out.emplace(std::any_cast<const T&>(deposits[partner]));
                       return partner == rank() ? std::uint64_t{0} : payload_elements(*out);
                   });
        return std::move(*out);
    }

    /// Ranks sharing a color form a new communicator ordered by (key, old rank).
    Communicator split(int color, int key);

private:
    friend class detail::WorldState;
    Communicator(std::shared_ptr<detail::Membership> membership, detail::RankContext* ctx);

    void rendezvous(CollectiveKind kind, int aux, std::any deposit, std::uint64_t sent,
                    const detail::Reader& reader);

    template <class T>
    std::uint64_t copy_all(const std::vector<std::any>& deposits, std::vector<T>& out) {
        std::uint64_t received = 0;
        out.reserve(deposits.size());
        for (std::size_t r = 0; r < deposits.size(); ++r) {
            out.push_back(std::any_cast<const T&>(deposits[r]));
            if (static_cast<int>(r) != rank()) received += payload_elements(out.back());
        }
        return received;
    }

    std::shared_ptr<detail::Membership> membership_;
    detail::RankContext* ctx_;
};

namespace detail {
/// Runs body once per rank on its own thread and reports failures.
std::vector<RankStats> run_world(int p, const WorldOptions& opts,
                                 const std::function<void(Communicator&)>& body);
} // namespace detail

template <class R>
struct WorldRun {
    std::vector<R> results;
    std::vector<RankStats> stats;
};

/// Runs `program` on p ranks. Throws RankPanic when a program throws, and
/// DeadlockError when collectives cannot complete.
template <class Program>
auto spawn_world(int p, Program&& program, const WorldOptions& opts = {}) {
    using R = std::invoke_result_t<Program&, Communicator&>;
    static_assert(!std::is_void_v<R>, "rank programs return a value");
    std::vector<std::optional<R>> slots(p > 0 ? p : 0);
    auto stats = detail::run_world(p, opts, [&](Communicator& comm) {
        slots[comm.rank()].emplace(program(comm));
    });
    WorldRun<R> run;
    run.results.reserve(slots.size());
    for (auto& slot : slots) run.results.push_back(std::move(*slot));
    run.stats = std::move(stats);
    return run;
}

inline bool is_power_of_two(int p) { return p > 0 && std::has_single_bit(static_cast<unsigned>(p)); }

/// Multi-node accumulation to all ranks on a hypercube: in round `dim`
/// (from d-1 down to 0) each rank swaps its running result with rank ^ (1 << dim).
template <class T, class Op>
T hypercube_mnac_all(Communicator& comm, T item, Op op) {
    const int p = comm.size();
    if (!is_power_of_two(p)) throw NotPowerOfTwo(p);
    const int d = std::countr_zero(static_cast<unsigned>(p));
    T result = std::move(item);
    for (int dim = d - 1; dim >= 0; --dim) {
        const int partner = comm.rank() ^ (1 << dim);
        T theirs = comm.exchange(result, partner);
        result = op(std::move(result), theirs);
    }
    return result;
}

/// Merges two key-sorted association lists, combining values of equal keys.
template <class Key, class Value, class Combine>
std::vector<std::pair<Key, Value>> merge_als(const std::vector<std::pair<Key, Value>>& a,
                                             const std::vector<std::pair<Key, Value>>& b,
                                             Combine combine) {
    std::vector<std::pair<Key, Value>> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    auto push = [&](const std::pair<Key, Value>& kv) {
        if (!out.empty() && out.back().first == kv.first) {
            out.back().second = combine(out.back().second, kv.second);
        } else {
            out.push_back(kv);
        }
    };
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && !(b[j].first < a[i].first))) {
            push(a[i++]);
        } else {
            push(b[j++]);
        }
    }
    return out;
}

/// Key-sorted lists on every rank are summed so that rank r ends with the
/// combined entries whose home(key) == r. Runs one hypercube accumulation per
/// destination rank.
template <class Key, class Value, class Home, class Combine>
std::vector<std::pair<Key, Value>> hypercube_accumulate(Communicator& comm,
                                                        const std::vector<std::pair<Key, Value>>& al,
                                                        Home home, Combine combine) {
    using List = std::vector<std::pair<Key, Value>>;
    const int p = comm.size();
    if (!is_power_of_two(p)) throw NotPowerOfTwo(p);
    std::vector<List> slices(p);
    for (const auto& kv : al) slices[home(kv.first)].push_back(kv);
    for (List& s : slices) s = merge_als(s, List{}, combine);

    auto merge = [&](List a, const List& b) { return merge_als(a, b, combine); };
    List mine;
    for (int dest = 0; dest < p; ++dest) {
        List x = hypercube_mnac_all(comm, std::move(slices[dest]), merge);
        if (dest == comm.rank()) mine = std::move(x);
    }
    return mine;
}

/// Score accumulation with home rank id mod p.
std::vector<std::pair<VectorId, double>> hypercube_accumulate_scores(
    Communicator& comm, const std::vector<std::pair<VectorId, double>>& al);

} // namespace apss::fabric
