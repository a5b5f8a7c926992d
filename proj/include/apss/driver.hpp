#pragma once

#include "apss/par1d.hpp"
#include "apss/par2d.hpp"

#include <string>
#include <utility>

namespace apss {

/// What to run: `algo` is seq:<variant>, vert, horiz or 2d.
struct RunRequest {
    std::string algo = "vert";
    int p = 1;
    int q = 1;  // mesh rows, 2d only
    int r = 1;  // mesh columns, 2d only
    VerticalOpts opts;
    fabric::WorldOptions world;
};

struct RunResult {
    MatchSet matches;
    RunProfile profile;
    std::vector<RankMatch> raw;  // parallel runs only
};

Pruning parse_pruning(const std::string& text);
Accumulation parse_accumulation(const std::string& text);
DimDistribution parse_distribution(const std::string& text);
/// "QxR" -> {Q, R}.
std::pair<int, int> parse_mesh(const std::string& text);

const char* to_string(Pruning pruning);
const char* to_string(Accumulation accumulation);

/// Row label of the profile table, e.g. "vertical-localpruning".
std::string profile_name(const RunRequest& request);

RunResult execute(const Dataset& data, double t, const RunRequest& request);

/// The dimension partition a vert or 2d run uses. Throws InvalidParams otherwise.
DimPartition request_partition(const Dataset& data, const RunRequest& request);

/// Runs the request and brute force and compares them within the threshold band.
MatchDiff oracle_check(const Dataset& data, double t, const RunRequest& request);

} // namespace apss
