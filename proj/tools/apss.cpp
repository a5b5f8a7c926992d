#include "apss/dataset_io.hpp"
#include "apss/driver.hpp"
#include "apss/seqengine.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

struct CommonArgs {
    std::string input;
    double t = -1.0;
    bool auto_t = false;
    std::string algo = "vert";
    int p = 1;
    std::string mesh = "1x1";
    std::size_t block_size = 1;
    std::string pruning = "local";
    std::string accum = "flat";
    std::string dim_dist = "first-fit";
    std::string scheduler = "concurrent";
    bool no_normalize = false;
    std::size_t mem_budget_cells = std::size_t{1} << 26;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("input", a.input, "dataset file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--t", a.t, "similarity threshold");
    cmd->add_flag("--auto-t", a.auto_t, "choose t for about n lg n matches");
    cmd->add_option("--algo", a.algo, "seq:<variant>, vert, horiz or 2d")->capture_default_str();
    cmd->add_option("--p", a.p, "number of ranks")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--mesh", a.mesh, "2d mesh QxR")->capture_default_str();
    cmd->add_option("--block-size", a.block_size, "vectors per accumulation round")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--pruning", a.pruning, "none or local")->capture_default_str();
    cmd->add_option("--accum", a.accum, "flat, hypercube or recursive")->capture_default_str();
    cmd->add_option("--dim-dist", a.dim_dist, "first-fit or cyclic")->capture_default_str();
    cmd->add_option("--scheduler", a.scheduler, "concurrent or sequential")->capture_default_str();
    cmd->add_flag("--no-normalize", a.no_normalize, "keep weights as read");
    cmd->add_option("--mem-budget-cells", a.mem_budget_cells, "cap on block-size * n score cells")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

/// Block processing keeps one score array of n cells per vector in flight.
void clamp_block_size(apss::RunRequest& req, const CommonArgs& a, std::size_t n) {
    if (n == 0 || req.opts.block_size * n <= a.mem_budget_cells) return;
    const std::size_t fit = std::max<std::size_t>(1, a.mem_budget_cells / n);
    std::fprintf(stderr, "block size %zu exceeds the memory budget, using %zu\n", req.opts.block_size, fit);
    req.opts.block_size = fit;
}

apss::RunRequest make_request(const CommonArgs& a) {
    apss::RunRequest req;
    req.algo = a.algo;
    req.p = a.p;
    std::tie(req.q, req.r) = apss::parse_mesh(a.mesh);
    req.opts.block_size = a.block_size;
    req.opts.pruning = apss::parse_pruning(a.pruning);
    req.opts.accumulation = apss::parse_accumulation(a.accum);
    req.opts.distribution = apss::parse_distribution(a.dim_dist);
    if (a.scheduler == "sequential") {
        req.world.scheduler = apss::fabric::Scheduler::sequential;
    } else if (a.scheduler != "concurrent") {
        throw apss::InvalidParams("scheduler must be concurrent or sequential");
    }
    return req;
}

double resolve_t(const CommonArgs& a, const apss::Dataset& data) {
    if (a.auto_t) {
        const double t = apss::auto_threshold(data);
        std::fprintf(stderr, "auto t = %.9f\n", t);
        return t;
    }
    if (a.t < 0.0) throw apss::InvalidParams("give --t or --auto-t");
    return a.t;
}

nlohmann::json profile_json(const apss::RunProfile& profile) {
    nlohmann::json ranks = nlohmann::json::array();
    for (const apss::RankProfile& r : profile.ranks) {
        ranks.push_back({{"commElements", r.comm_elements},
                         {"commReceived", r.comm_received},
                         {"gatheredElements", r.gathered_elements},
                         {"collectiveCalls", r.collective_calls},
                         {"multCount", r.mult_count},
                         {"candTotal", r.cand_total},
                         {"candMax", r.cand_max},
                         {"scoresCommunicated", r.scores_communicated},
                         {"workTime", r.work_time},
                         {"commTime", r.comm_time}});
    }
    return {{"algo", profile.algo}, {"p", profile.p}, {"ranks", ranks}};
}

template <class Fn>
void with_output(const std::string& path, Fn fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw apss::InvalidParams("cannot write " + path);
    fn(out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"All-pairs similarity search over sparse vectors"};
    app.require_subcommand(1);

    CommonArgs run_args;
    std::string matches_path;
    std::string profile_path;
    std::string profile_json_path;
    std::string partition_path;
    auto* run = app.add_subcommand("run", "find all pairs with similarity >= t");
    add_common(run, run_args);
    run->add_option("-o,--output", matches_path, "matches file (default stdout)");
    run->add_option("--profile", profile_path, "profile CSV");
    run->add_option("--profile-json", profile_json_path, "per-rank profile as JSON");
    run->add_option("--dump-partition", partition_path, "write the dimension partition");

    CommonArgs check_args;
    auto* check = app.add_subcommand("oracle-check", "compare a run with brute force");
    add_common(check, check_args);

    apss::SynthParams gen_params;
    std::string gen_path;
    auto* gen = app.add_subcommand("gen", "generate a synthetic Zipf dataset");
    gen->add_option("--n", gen_params.n, "vectors")->capture_default_str();
    gen->add_option("--m", gen_params.m, "dimensions")->capture_default_str();
    gen->add_option("--avg-nnz", gen_params.avg_nnz, "average entries per vector")->capture_default_str();
    gen->add_option("--zipf", gen_params.zipf, "popularity exponent")->capture_default_str();
    gen->add_option("--seed", gen_params.seed, "random seed")->capture_default_str();
    gen->add_option("-o,--output", gen_path, "dataset file (default stdout)");

    CommonArgs prof_args;
    std::vector<int> prof_ps{2, 4, 8};
    std::string prof_path;
    auto* prof = app.add_subcommand("profile", "profile table over several rank counts");
    add_common(prof, prof_args);
    prof->add_option("--ps", prof_ps, "rank counts (p, or Q for 2d with R from --mesh)")->delimiter(',');
    prof->add_option("-o,--output", prof_path, "CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            apss::RunRequest req = make_request(run_args);
            const apss::Dataset data = apss::load_dataset(run_args.input, !run_args.no_normalize);
            clamp_block_size(req, run_args, data.size());
            const double t = resolve_t(run_args, data);
            if (!partition_path.empty()) {
                with_output(partition_path, [&](std::ostream& out) {
                    apss::write_partition(out, apss::request_partition(data, req));
                });
            }
            const apss::RunResult result = apss::execute(data, t, req);
            with_output(matches_path, [&](std::ostream& out) { apss::write_matches(out, result.matches); });
            if (!profile_path.empty()) {
                with_output(profile_path, [&](std::ostream& out) {
                    out << apss::kProfileCsvHeader << '\n';
                    apss::write_profile_row(out, result.profile);
                });
            }
            if (!profile_json_path.empty()) {
                with_output(profile_json_path,
                            [&](std::ostream& out) { out << profile_json(result.profile).dump(2) << '\n'; });
            }
        } else if (*check) {
            apss::RunRequest req = make_request(check_args);
            const apss::Dataset data = apss::load_dataset(check_args.input, !check_args.no_normalize);
            clamp_block_size(req, check_args, data.size());
            const double t = resolve_t(check_args, data);
            const apss::MatchDiff diff = apss::oracle_check(data, t, req);
            for (const apss::Match& m : diff.missing) std::printf("missing %u %u %.9f\n", m.i, m.j, m.score);
            for (const apss::Match& m : diff.extra) std::printf("extra %u %u %.9f\n", m.i, m.j, m.score);
            for (const auto& [want, got] : diff.score_mismatch) {
                std::printf("score %u %u %.9f != %.9f\n", want.i, want.j, want.score, got.score);
            }
            std::printf("%s %s\n", diff.ok() ? "OK" : "MISMATCH", apss::profile_name(req).c_str());
            return diff.ok() ? 0 : 1;
        } else if (*gen) {
            const apss::Dataset data = apss::gen_synthetic(gen_params);
            with_output(gen_path, [&](std::ostream& out) { apss::save_dataset(out, data); });
        } else if (*prof) {
            apss::RunRequest req = make_request(prof_args);
            const apss::Dataset data = apss::load_dataset(prof_args.input, !prof_args.no_normalize);
            clamp_block_size(req, prof_args, data.size());
            const double t = resolve_t(prof_args, data);
            with_output(prof_path, [&](std::ostream& out) {
                out << apss::kProfileCsvHeader << '\n';
                for (int p : prof_ps) {
                    if (req.algo == "2d") {
                        req.q = p;
                    } else {
                        req.p = p;
                    }
                    apss::write_profile_row(out, apss::execute(data, t, req).profile);
                }
            });
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "apss: %s\n", e.what());
        return 2;
    }
    return 0;
}
