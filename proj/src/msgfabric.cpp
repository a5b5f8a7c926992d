#include "apss/msgfabric.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

namespace apss::fabric {

const char* to_string(CollectiveKind kind) {
    switch (kind) {
    case CollectiveKind::all_gather: return "all_gather";
    case CollectiveKind::all_reduce: return "all_reduce";
    case CollectiveKind::gather: return "gather";
    case CollectiveKind::split: return "split";
    case CollectiveKind::exchange: return "exchange";
    }
    return "?";
}

namespace detail {

enum class RankStatus { running, blocked, exited };

struct Slot {
    CollectiveKind kind;
    std::vector<std::any> deposits;
    std::vector<int> aux;
    int arrived = 0;
    int readers = 0;
    bool complete = false;
    std::map<int, std::shared_ptr<GroupState>> children;
};

struct GroupState {
    std::string label;
    std::vector<int> world_ranks;  // group rank -> world rank
    std::map<std::uint64_t, Slot> slots;
};

struct Membership {
    std::shared_ptr<GroupState> group;
    int rank = 0;
    std::uint64_t seq = 0;
};

struct RankContext {
    WorldState* world = nullptr;
    int world_rank = 0;
    bool trace = false;
    RankStats stats;
};

class WorldState {
public:
    WorldState(int p, const WorldOptions& opts)
        : opts_(opts), status_(p, RankStatus::running), running_(p), contexts_(p) {
        for (int r = 0; r < p; ++r) {
            contexts_[r].world = this;
            contexts_[r].world_rank = r;
            contexts_[r].trace = opts.trace;
        }
        world_group_ = std::make_shared<GroupState>();
        world_group_->label = "world";
        for (int r = 0; r < p; ++r) world_group_->world_ranks.push_back(r);
    }

    std::vector<RankStats> run(const std::function<void(Communicator&)>& body);

    void rendezvous(Membership& m, RankContext& ctx, CollectiveKind kind, int aux,
                    std::any deposit, const Reader& reader, std::uint64_t& received,
                    std::shared_ptr<GroupState>* child, int child_color);

private:
    bool sequential() const { return opts_.scheduler == Scheduler::sequential; }
    void worker(int rank, const std::function<void(Communicator&)>& body);
    /// Hands control to the next running rank after `from`; flags a deadlock
    /// when nobody can run but some rank still waits. Caller holds mu_.
    void yield_from(int from);
    void check_stuck();

    WorldOptions opts_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::vector<RankStatus> status_;
    int running_;
    int baton_ = 0;
    bool deadlock_ = false;
    std::string deadlock_reason_;
    std::vector<RankContext> contexts_;
    std::shared_ptr<GroupState> world_group_;
    std::vector<std::exception_ptr> errors_;
};

void WorldState::check_stuck() {
    if (running_ > 0 || deadlock_) return;
    if (std::any_of(status_.begin(), status_.end(),
                    [](RankStatus s) { return s == RankStatus::blocked; })) {
        deadlock_ = true;
        deadlock_reason_ = "deadlock: every live rank is waiting in a collective that cannot complete";
    }
}

void WorldState::yield_from(int from) {
    check_stuck();
    if (!sequential()) return;
    const int p = static_cast<int>(status_.size());
    for (int step = 1; step <= p; ++step) {
        const int r = (from + step) % p;
        if (status_[r] == RankStatus::running) {
            baton_ = r;
            return;
        }
    }
}

void WorldState::rendezvous(Membership& m, RankContext& ctx, CollectiveKind kind, int aux,
                            std::any deposit, const Reader& reader, std::uint64_t& received,
                            std::shared_ptr<GroupState>* child, int child_color) {
    GroupState& group = *m.group;
    const int size = static_cast<int>(group.world_ranks.size());
    const std::uint64_t seq = m.seq++;

    std::unique_lock lock(mu_);
    if (deadlock_) throw DeadlockError(deadlock_reason_);
    auto [it, fresh] = group.slots.try_emplace(seq);
    Slot& slot = it->second;
    if (fresh) {
        slot.kind = kind;
        slot.deposits.resize(size);
        slot.aux.assign(size, 0);
    } else {
        bool mismatch = slot.kind != kind;
        if (!mismatch && kind == CollectiveKind::gather) {
            for (int r = 0; r < size; ++r) {
                if (slot.deposits[r].has_value() && slot.aux[r] != aux) mismatch = true;
            }
        }
        if (mismatch) {
            throw DeadlockError(std::string("collective mismatch in ") + group.label + ": rank " +
                                std::to_string(m.rank) + " called " + to_string(kind) + ", others " +
                                to_string(slot.kind));
        }
    }
    slot.deposits[m.rank] = std::move(deposit);
    slot.aux[m.rank] = aux;
    ++slot.arrived;

    if (slot.arrived == size) {
        slot.complete = true;
        for (int wr : group.world_ranks) {
            if (wr != ctx.world_rank && status_[wr] == RankStatus::blocked) {
                status_[wr] = RankStatus::running;
                ++running_;
            }
        }
        cv_.notify_all();
    } else {
        status_[ctx.world_rank] = RankStatus::blocked;
        --running_;
        yield_from(ctx.world_rank);
        cv_.notify_all();
        const int me = ctx.world_rank;
        cv_.wait(lock, [&] {
            return deadlock_ || (slot.complete && (!sequential() || baton_ == me));
        });
        if (!slot.complete) throw DeadlockError(deadlock_reason_);
    }

    if (child != nullptr) {
        auto& entry = slot.children[child_color];
        if (!entry) {
            entry = std::make_shared<GroupState>();
            entry->label = group.label + "." + std::to_string(seq) + ":" + std::to_string(child_color);
        }
        *child = entry;
    }
    received = reader(slot.deposits, slot.aux);
    if (++slot.readers == size) group.slots.erase(it);
}

void WorldState::worker(int rank, const std::function<void(Communicator&)>& body) {
    RankContext& ctx = contexts_[rank];
    const auto start = std::chrono::steady_clock::now();
    {
        std::unique_lock lock(mu_);
        if (sequential()) cv_.wait(lock, [&] { return baton_ == rank || deadlock_; });
    }
    try {
        auto membership = std::make_shared<Membership>();
        membership->group = world_group_;
        membership->rank = rank;
        Communicator comm(membership, &ctx);
        body(comm);
    } catch (...) {
        errors_[rank] = std::current_exception();
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::lock_guard lock(mu_);
    ctx.stats.total_seconds = elapsed.count();
    if (status_[rank] == RankStatus::running) --running_;
    status_[rank] = RankStatus::exited;
    yield_from(rank);
    cv_.notify_all();
}

std::vector<RankStats> WorldState::run(const std::function<void(Communicator&)>& body) {
    const int p = static_cast<int>(status_.size());
    errors_.assign(p, nullptr);
    std::vector<std::thread> threads;
    threads.reserve(p);
    for (int r = 0; r < p; ++r) threads.emplace_back([this, r, &body] { worker(r, body); });
    for (std::thread& t : threads) t.join();

    // A rank's own failure outranks the deadlocks it causes in its peers.
    std::exception_ptr first_deadlock;
    for (int r = 0; r < p; ++r) {
        if (!errors_[r]) continue;
        try {
            std::rethrow_exception(errors_[r]);
        } catch (const DeadlockError&) {
            if (!first_deadlock) first_deadlock = errors_[r];
        } catch (const std::exception& e) {
            throw RankPanic(r, e.what());
        } catch (...) {
            throw RankPanic(r, "unknown exception");
        }
    }
    if (first_deadlock) std::rethrow_exception(first_deadlock);

    std::vector<RankStats> stats;
    stats.reserve(p);
    for (RankContext& ctx : contexts_) stats.push_back(std::move(ctx.stats));
    return stats;
}

std::vector<RankStats> run_world(int p, const WorldOptions& opts,
                                 const std::function<void(Communicator&)>& body) {
    if (p < 1) throw InvalidParams("world needs at least one rank");
    WorldState world(p, opts);
    return world.run(body);
}

} // namespace detail

Communicator::Communicator(std::shared_ptr<detail::Membership> membership, detail::RankContext* ctx)
    : membership_(std::move(membership)), ctx_(ctx) {}

int Communicator::rank() const { return membership_->rank; }
int Communicator::size() const { return static_cast<int>(membership_->group->world_ranks.size()); }
const std::string& Communicator::label() const { return membership_->group->label; }
RankStats& Communicator::stats() { return ctx_->stats; }

void Communicator::rendezvous(CollectiveKind kind, int aux, std::any deposit, std::uint64_t sent,
                              const detail::Reader& reader) {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t received = 0;
    ctx_->world->rendezvous(*membership_, *ctx_, kind, aux, std::move(deposit), reader, received,
                            nullptr, 0);
    RankStats& s = ctx_->stats;
    ++s.calls;
    s.sent += sent;
    s.received += received;
    if (ctx_->trace) s.trace.push_back({kind, label(), sent});
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    s.comm_seconds += elapsed.count();
}

Communicator Communicator::split(int color, int key) {
    const auto start = std::chrono::steady_clock::now();
    const int p = size();
    std::vector<std::pair<int, int>> entries;  // (key, old rank) of my color
    int new_rank = 0;
    std::uint64_t received = 0;
    std::shared_ptr<detail::GroupState> child;
    std::vector<int> world_ranks;
    const auto& parent_ranks = membership_->group->world_ranks;
    ctx_->world->rendezvous(
        *membership_, *ctx_, CollectiveKind::split, 0, std::any(std::pair<int, int>(color, key)),
        [&](const std::vector<std::any>& deposits, const std::vector<int>&) {
            for (int r = 0; r < p; ++r) {
                const auto& [c, k] = std::any_cast<const std::pair<int, int>&>(deposits[r]);
                if (c == color) entries.emplace_back(k, r);
            }
            std::sort(entries.begin(), entries.end());
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (entries[i].second == rank()) new_rank = static_cast<int>(i);
                world_ranks.push_back(parent_ranks[entries[i].second]);
            }
            // The first member to read fills in the shared group.
            if (child->world_ranks.empty()) child->world_ranks = world_ranks;
            return static_cast<std::uint64_t>(2 * (p - 1));
        },
        received, &child, color);
    RankStats& s = ctx_->stats;
    ++s.calls;
    s.sent += static_cast<std::uint64_t>(2 * (p - 1));
    s.received += received;
    if (ctx_->trace) s.trace.push_back({CollectiveKind::split, label(), 2ull * (p - 1)});
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    s.comm_seconds += elapsed.count();

    auto membership = std::make_shared<detail::Membership>();
    membership->group = std::move(child);
    membership->rank = new_rank;
    return Communicator(std::move(membership), ctx_);
}

std::vector<std::pair<VectorId, double>> hypercube_accumulate_scores(
    Communicator& comm, const std::vector<std::pair<VectorId, double>>& al) {
    const auto p = static_cast<VectorId>(comm.size());
    return hypercube_accumulate(
        comm, al, [p](VectorId id) { return static_cast<int>(id % p); },
        [](double a, double b) { return a + b; });
}

} // namespace apss::fabric
