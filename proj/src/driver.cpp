#include "apss/driver.hpp"

#include "apss/seqengine.hpp"

#include <charconv>

namespace apss {

namespace {

constexpr std::string_view kSeqPrefix = "seq:";

bool is_seq(const std::string& algo) { return algo.rfind(kSeqPrefix, 0) == 0; }

int parse_positive(std::string_view text, const std::string& whole) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
        throw InvalidParams("bad mesh '" + whole + "', expected QxR");
    }
    return value;
}

} // namespace

Pruning parse_pruning(const std::string& text) {
    if (text == "none") return Pruning::none;
    if (text == "local") return Pruning::local;
    throw InvalidParams("pruning must be none or local, got '" + text + "'");
}

Accumulation parse_accumulation(const std::string& text) {
    if (text == "flat") return Accumulation::flat;
    if (text == "hypercube") return Accumulation::hypercube;
    if (text == "recursive") return Accumulation::recursive;
    throw InvalidParams("accumulation must be flat, hypercube or recursive, got '" + text + "'");
}

DimDistribution parse_distribution(const std::string& text) {
    if (text == "first-fit") return DimDistribution::first_fit;
    if (text == "cyclic") return DimDistribution::cyclic;
    throw InvalidParams("dimension distribution must be first-fit or cyclic, got '" + text + "'");
}

std::pair<int, int> parse_mesh(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw InvalidParams("bad mesh '" + text + "', expected QxR");
    const std::string_view view(text);
    return {parse_positive(view.substr(0, x), text), parse_positive(view.substr(x + 1), text)};
}

const char* to_string(Pruning pruning) { return pruning == Pruning::local ? "local" : "none"; }

const char* to_string(Accumulation accumulation) {
    switch (accumulation) {
    case Accumulation::flat: return "flat";
    case Accumulation::hypercube: return "hypercube";
    case Accumulation::recursive: return "recursive";
    }
    return "?";
}

std::string profile_name(const RunRequest& request) {
    if (is_seq(request.algo)) return request.algo.substr(kSeqPrefix.size());
    if (request.algo == "horiz") return "horizontal";
    std::string name;
    if (request.algo == "vert") {
        name = "vertical";
    } else if (request.algo == "2d") {
        name = "2d-" + std::to_string(request.q) + "x" + std::to_string(request.r);
    } else {
        throw InvalidParams("unknown algorithm '" + request.algo + "'");
    }
    name += request.opts.pruning == Pruning::local ? "-localpruning" : "-noopt";
    if (request.opts.accumulation != Accumulation::flat) {
        name += std::string("-") + to_string(request.opts.accumulation);
    }
    if (request.opts.block_size > 1) name += "-block" + std::to_string(request.opts.block_size);
    return name;
}

RunResult execute(const Dataset& data, double t, const RunRequest& request) {
    RunResult out;
    if (is_seq(request.algo)) {
        SeqRun run = run_variant(request.algo.substr(kSeqPrefix.size()), data, t);
        out.matches = std::move(run.matches);
        out.profile = std::move(run.profile);
        return out;
    }
    ParRun run;
    if (request.algo == "vert") {
        run = run_vertical(data, t, request.p, request.opts, request.world);
    } else if (request.algo == "horiz") {
        run = run_horizontal(data, t, request.p, request.world);
    } else if (request.algo == "2d") {
        run = run_2d(data, t, request.q, request.r, request.opts, request.world);
    } else {
        throw InvalidParams("unknown algorithm '" + request.algo + "'");
    }
    out.matches = std::move(run.matches);
    out.profile = std::move(run.profile);
    out.profile.algo = profile_name(request);
    out.raw = std::move(run.raw);
    return out;
}

DimPartition request_partition(const Dataset& data, const RunRequest& request) {
    if (request.algo == "vert") return vertical_partition(data, request.p, request.opts.distribution);
    if (request.algo == "2d") return partition_dims_first_fit(data, request.r);
    throw InvalidParams("algorithm '" + request.algo + "' does not partition dimensions");
}

MatchDiff oracle_check(const Dataset& data, double t, const RunRequest& request) {
    const MatchSet expected = brute_force_all_pairs(data, t);
    return compare_within_band(expected, execute(data, t, request).matches, t);
}

} // namespace apss
