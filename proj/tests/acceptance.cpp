// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "apss/dataset_io.hpp"
#include "apss/driver.hpp"
#include "apss/seqengine.hpp"
#include "oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace apss;

namespace {

constexpr double kBand = 1e-9;
constexpr double kWitnessSlack = 1e-12;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct MatrixDataset {
    SynthParams params;
    Dataset data;
    double t;
};

std::string match_file(const MatchSet& m) {
    std::ostringstream out;
    write_matches(out, m);
    return out.str();
}

std::vector<MatrixDataset> matrix_datasets() {
    const std::size_t ns[] = {50, 100, 200};
    const std::size_t ms[] = {20, 64};
    const double zipfs[] = {0.8, 1.2};
    std::vector<MatrixDataset> out;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const std::size_t k = seed - 1;
        SynthParams p;
        p.n = ns[k % 3];
        p.m = ms[(k / 3) % 2];
        p.zipf = zipfs[(k / 6) % 2];
        p.avg_nnz = p.m == 20 ? 5 : 10;
        p.seed = seed;
        Dataset data = gen_synthetic(p);
        const double t = auto_threshold(data);
        out.push_back({p, std::move(data), t});
    }
    return out;
}

std::vector<RunRequest> matrix_requests() {
    std::vector<RunRequest> out;
    for (const std::string& name : variant_names()) out.push_back({"seq:" + name});
    std::vector<VerticalOpts> opts;
    for (Pruning pr : {Pruning::local, Pruning::none}) {
        for (Accumulation ac : {Accumulation::flat, Accumulation::hypercube, Accumulation::recursive}) {
            for (std::size_t b : {1, 4, 16, 64}) {
                VerticalOpts o;
                o.pruning = pr;
                o.accumulation = ac;
                o.block_size = b;
                opts.push_back(o);
            }
        }
    }
    for (int p : {1, 2, 4, 8}) {
        out.push_back({"horiz", p});
        for (const VerticalOpts& o : opts) out.push_back({"vert", p, 1, 1, o});
    }
    for (auto [q, r] : {std::pair{1, 2}, {2, 1}, {2, 2}, {2, 4}, {4, 2}, {4, 4}}) {
        for (const VerticalOpts& o : opts) out.push_back({"2d", q * r, q, r, o});
    }
    return out;
}

std::string describe(const RunRequest& req) {
    std::string s = profile_name(req);
    if (req.algo == "vert" || req.algo == "horiz") s += " p=" + std::to_string(req.p);
    return s;
}

/// Criteria 1 and 2 share the run matrix.
std::pair<Outcome, Outcome> equivalence_and_witness(const std::vector<MatrixDataset>& sets) {
    Outcome eq;
    Outcome witness;
    std::size_t runs = 0;
    std::size_t witnessed = 0;
    const std::vector<RunRequest> requests = matrix_requests();
    for (const MatrixDataset& ds : sets) {
        const oracle::Pairs expected = oracle::all_pairs(ds.data, ds.t);
        for (const RunRequest& req : requests) {
            const RunResult result = execute(ds.data, ds.t, req);
            ++runs;
            const std::string diff = oracle::differences(expected, result.matches, ds.t, kBand);
            if (!diff.empty() && eq.pass) {
                eq.pass = false;
                eq.detail = "seed " + std::to_string(ds.params.seed) + " " + describe(req) + ": " +
                            diff.substr(0, diff.find('\n'));
            }
            if ((req.algo == "vert" || req.algo == "2d") && req.opts.pruning == Pruning::local) {
                // Partials are summed across the ranks of a row: all p in 1-D, r in 2-D.
                const int ranks = req.algo == "2d" ? req.r : req.p;
                for (const RankMatch& m : result.raw) {
                    ++witnessed;
                    if (m.max_partial < ds.t / ranks - kWitnessSlack && witness.pass) {
                        witness.pass = false;
                        witness.detail = describe(req) + " pair " + std::to_string(m.i) + "," +
                                         std::to_string(m.j) + " max partial " + std::to_string(m.max_partial);
                    }
                }
            }
        }
    }
    if (eq.pass) eq.detail = std::to_string(runs) + " runs over " + std::to_string(sets.size()) + " datasets";
    if (witness.pass) witness.detail = std::to_string(witnessed) + " matches checked, 0 violations";
    return {eq, witness};
}

Outcome multiplication_identity(const std::vector<MatrixDataset>& sets) {
    Outcome o;
    for (const MatrixDataset& ds : sets) {
        const std::uint64_t counted = run_variant("all-pairs-0", ds.data, ds.t).profile.total_mults();
        const std::uint64_t expected = oracle::pair_products(ds.data);
        if (counted != expected) {
            o.pass = false;
            o.detail = "seed " + std::to_string(ds.params.seed) + ": " + std::to_string(counted) +
                       " != " + std::to_string(expected);
            return o;
        }
    }
    o.detail = std::to_string(sets.size()) + " datasets exact";
    return o;
}

Outcome pruning_direction(const Dataset& data, double t) {
    Outcome o;
    VerticalOpts pruned;
    pruned.block_size = 64;
    VerticalOpts plain = pruned;
    plain.pruning = Pruning::none;
    const std::uint64_t noopt = run_vertical(data, t, 2, plain).profile.scores();
    std::vector<std::uint64_t> local;
    for (int p : {2, 4, 8}) local.push_back(run_vertical(data, t, p, pruned).profile.scores());
    std::ostringstream d;
    d << "t=" << t << " Scores noopt(p=2)=" << noopt << " local(p=2,4,8)=" << local[0] << "," << local[1] << ","
      << local[2] << " reduction x" << static_cast<double>(noopt) / static_cast<double>(local[0]);
    o.detail = d.str();
    o.pass = local[0] * 10 <= noopt && local[0] <= local[1] && local[1] <= local[2];
    return o;
}

Outcome horizontal_volume(const Dataset& data, double t) {
    Outcome o;
    std::ostringstream d;
    for (int p : {2, 4, 8}) {
        const std::uint64_t got = horiz_comm_volume(run_horizontal(data, t, p).profile);
        const std::uint64_t want = data.nonzeros() * static_cast<std::uint64_t>(p - 1);
        d << "p=" << p << ":" << got << (got == want ? "=" : "!=") << want << " ";
        o.pass = o.pass && got == want;
    }
    o.detail = d.str();
    return o;
}

Outcome block_calls(const Dataset& data, double t) {
    Outcome o;
    std::vector<std::uint64_t> calls;
    std::string first;
    std::ostringstream d;
    for (std::size_t b : {1, 4, 16, 64}) {
        VerticalOpts opts;
        opts.block_size = b;
        const ParRun run = run_vertical(data, t, 4, opts);
        const std::string file = match_file(run.matches);
        if (b == 1) first = file;
        o.pass = o.pass && file == first;
        calls.push_back(run.profile.ranks[0].collective_calls);
        d << "B=" << b << ":" << calls.back() << " ";
    }
    const double ratio = static_cast<double>(calls.front()) / static_cast<double>(calls.back());
    d << "ratio " << ratio << (o.pass ? ", identical matches" : ", MATCHES DIFFER");
    o.pass = o.pass && ratio >= 30.0;
    o.detail = d.str();
    return o;
}

Outcome degenerate_meshes(const std::vector<MatrixDataset>& sets) {
    Outcome o;
    std::size_t compared = 0;
    for (const MatrixDataset& ds : sets) {
        for (int k : {2, 4, 8}) {
            for (std::size_t b : {1, 16}) {
                VerticalOpts opts;
                opts.block_size = b;
                const bool row = match_file(run_2d(ds.data, ds.t, 1, k, opts).matches) ==
                                 match_file(run_vertical(ds.data, ds.t, k, opts).matches);
                const bool col = match_file(run_2d(ds.data, ds.t, k, 1, opts).matches) ==
                                 match_file(run_horizontal(ds.data, ds.t, k).matches);
                compared += 2;
                if ((!row || !col) && o.pass) {
                    o.pass = false;
                    o.detail = "seed " + std::to_string(ds.params.seed) + " k=" + std::to_string(k) +
                               (row ? " kx1 differs from horizontal" : " 1xk differs from vertical");
                }
            }
        }
    }
    if (o.pass) o.detail = std::to_string(compared) + " match files identical";
    return o;
}

Outcome partition_balance() {
    Outcome o;
    oracle::Rng rng(2024);
    for (int trial = 0; trial < 100 && o.pass; ++trial) {
        std::vector<std::size_t> sizes(10 + rng.below(500));
        const double skew = 1.0 + 4.0 * rng.uniform();
        for (std::size_t& s : sizes) s = 1 + static_cast<std::size_t>(1000 * std::pow(rng.uniform(), skew));
        const int p = 2 + static_cast<int>(rng.below(15));
        const DimPartition part = partition_dims_first_fit(sizes, p);
        double total = 0;
        double heaviest = 0;
        for (std::size_t s : sizes) {
            total += static_cast<double>(work_weight(s));
            heaviest = std::max(heaviest, static_cast<double>(work_weight(s)));
        }
        const double peak = static_cast<double>(*std::max_element(part.loads.begin(), part.loads.end()));
        if (peak > total / p + heaviest) {
            o.pass = false;
            o.detail = "greedy bound violated on profile " + std::to_string(trial);
        }
    }
    std::ostringstream d;
    int worse = 0;
    int cases = 0;
    double closest = 1e300;  // smallest cyclic / first-fit imbalance ratio seen
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset data = gen_synthetic({2000, 1000, 30, 1.2, seed});
        for (int p : {2, 4, 8, 16}) {
            const double ff = partition_dims_first_fit(data, p).imbalance();
            const double cy = partition_dims_cyclic(data, p).imbalance();
            closest = std::min(closest, cy / ff);
            ++cases;
            worse += cy > ff;
        }
    }
    if (o.pass) {
        d << "100 profiles within the greedy bound; cyclic max/avg worse in " << worse << "/" << cases
          << " Zipf cases (cyclic/first-fit ratio >= " << closest << ")";
        o.detail = d.str();
    }
    o.pass = o.pass && worse == cases;
    return o;
}

Outcome fabric_determinism(const Dataset& data, double t) {
    Outcome o;
    std::vector<RunRequest> requests;
    VerticalOpts cube;
    cube.accumulation = Accumulation::hypercube;
    cube.block_size = 4;
    requests.push_back({"vert", 4, 1, 1, cube});
    VerticalOpts rec;
    rec.accumulation = Accumulation::recursive;
    requests.push_back({"2d", 8, 2, 4, rec});
    requests.push_back({"horiz", 4});
    for (const RunRequest& base : requests) {
        const RunResult ref = execute(data, t, base);
        const std::string ref_file = match_file(ref.matches);
        for (int rep = 0; rep < 6; ++rep) {
            RunRequest req = base;
            if (rep == 5) req.world.scheduler = fabric::Scheduler::sequential;
            const RunResult again = execute(data, t, req);
            if (match_file(again.matches) != ref_file || !again.profile.same_counters(ref.profile)) {
                o.pass = false;
                o.detail = describe(base) + (rep == 5 ? " differs under the sequential scheduler" : " differs on repeat");
                return o;
            }
        }
    }
    o.detail = "3 configurations x (5 concurrent + 1 sequential) identical";
    return o;
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    int failures = 0;
    auto report = [&](int id, const char* title, const Outcome& o) {
        std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };

    const std::vector<MatrixDataset> sets = matrix_datasets();
    auto [eq, witness] = equivalence_and_witness(sets);
    const std::chrono::duration<double> matrix_time = std::chrono::steady_clock::now() - start;
    char took[48];
    std::snprintf(took, sizeof took, ", %.1f s", matrix_time.count());
    eq.detail += took;
    report(1, "oracle equivalence matrix", eq);
    report(2, "local pruning witness >= t/p", witness);
    report(3, "multiplication count identity", multiplication_identity(sets));

    const Dataset zipf = gen_synthetic({2000, 2000, 50, 1.0, 1});
    const double t = auto_threshold(zipf);
    report(4, "pruning effect direction", pruning_direction(zipf, t));
    report(5, "horizontal volume size(V)(p-1)", horizontal_volume(zipf, t));
    report(6, "block processing collective count", block_calls(zipf, t));
    report(7, "degenerate mesh identities", degenerate_meshes(sets));
    report(8, "partition balance", partition_balance());
    report(9, "fabric determinism", fabric_determinism(sets.back().data, sets.back().t));

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::printf("%d of 9 criteria failed, %.1f s\n", failures, elapsed.count());
    return failures == 0 ? 0 : 1;
}
