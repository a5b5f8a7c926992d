#pragma once

#include "apss/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace apss {

/// One vector per line of `dim:weight` tokens; `#` lines are comments, and an
/// optional `# apss n=<n> m=<m>` header is checked against the contents.
/// Blank lines are empty vectors. Throws ParseError, NegativeWeight, DuplicateDim.
Dataset parse_dataset(std::istream& in, bool normalize = true);
Dataset load_dataset(const std::string& path, bool normalize = true);

/// Writes the header and one line per vector with shortest round-trip weights.
void save_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::string& path, const Dataset& data);

struct SynthParams {
    std::size_t n = 1000;
    std::size_t m = 1000;
    std::size_t avg_nnz = 10;
    double zipf = 1.0;
    std::uint64_t seed = 1;
};

/// Zipf-popular dimensions, entry counts spread evenly around avg_nnz, weights
/// uniform in (0,1], normalized. Identical output for identical parameters.
Dataset gen_synthetic(const SynthParams& params);

/// Target output size n·lg n.
double threshold_advisor(std::size_t n);

/// Bisects t until the number of matches among the first `sample` vectors is
/// within a factor 2 of the sample's share of threshold_advisor(n).
double auto_threshold(const Dataset& data, std::size_t sample = 500);

/// `i j score` lines sorted by (i, j), scores with 9 decimals.
void write_matches(std::ostream& out, const MatchSet& matches);

} // namespace apss
