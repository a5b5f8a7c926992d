#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace apss {

/// Counters collected by one rank over a run. Times are wall-clock seconds and informational.
struct RankProfile {
    std::uint64_t comm_elements = 0;  // payload elements sent
    std::uint64_t comm_received = 0;  // payload elements received
    std::uint64_t gathered_elements = 0;  // subset of comm_elements sent through all-gather
    std::uint64_t collective_calls = 0;
    std::uint64_t mult_count = 0;
    std::uint64_t cand_total = 0;
    std::uint64_t cand_max = 0;
    std::uint64_t scores_communicated = 0;
    double work_time = 0.0;
    double comm_time = 0.0;

    /// Equality on the counters only; times never compare.
    bool same_counters(const RankProfile& other) const;
};

struct FieldSummary {
    double avg = 0.0;
    double max = 0.0;
};

struct RunProfile {
    std::string algo;
    int p = 1;
    std::vector<RankProfile> ranks;

    FieldSummary comm_time() const;
    FieldSummary work_time() const;
    FieldSummary candidates() const;
    std::uint64_t scores() const;
    std::uint64_t total_sent() const;
    std::uint64_t total_received() const;
    std::uint64_t total_gathered() const;
    std::uint64_t total_collective_calls() const;
    std::uint64_t total_mults() const;

    bool same_counters(const RunProfile& other) const;
};

/// Header matching the columns written by write_profile_row.
inline constexpr const char* kProfileCsvHeader = "p,algo,C_avg,C_max,W_avg,W_max,Scores,Cand_avg,Cand_max";

void write_profile_row(std::ostream& out, const RunProfile& profile);

} // namespace apss
