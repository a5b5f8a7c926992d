#include "apss/profile.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace apss {

bool RankProfile::same_counters(const RankProfile& o) const {
    return comm_elements == o.comm_elements && comm_received == o.comm_received &&
           gathered_elements == o.gathered_elements && collective_calls == o.collective_calls &&
           mult_count == o.mult_count && cand_total == o.cand_total && cand_max == o.cand_max &&
           scores_communicated == o.scores_communicated;
}

namespace {

template <class Field>
FieldSummary summarize(const std::vector<RankProfile>& ranks, Field field) {
    FieldSummary s;
    if (ranks.empty()) return s;
    double sum = 0.0;
    for (const RankProfile& r : ranks) {
        const double v = static_cast<double>(field(r));
        sum += v;
        s.max = std::max(s.max, v);
    }
    s.avg = sum / static_cast<double>(ranks.size());
    return s;
}

template <class Field>
std::uint64_t total(const std::vector<RankProfile>& ranks, Field field) {
    std::uint64_t sum = 0;
    for (const RankProfile& r : ranks) sum += field(r);
    return sum;
}

} // namespace

FieldSummary RunProfile::comm_time() const {
    return summarize(ranks, [](const RankProfile& r) { return r.comm_time; });
}
FieldSummary RunProfile::work_time() const {
    return summarize(ranks, [](const RankProfile& r) { return r.work_time; });
}
FieldSummary RunProfile::candidates() const {
    return summarize(ranks, [](const RankProfile& r) { return r.cand_total; });
}
std::uint64_t RunProfile::scores() const {
    return total(ranks, [](const RankProfile& r) { return r.scores_communicated; });
}
std::uint64_t RunProfile::total_sent() const {
    return total(ranks, [](const RankProfile& r) { return r.comm_elements; });
}
std::uint64_t RunProfile::total_received() const {
    return total(ranks, [](const RankProfile& r) { return r.comm_received; });
}
std::uint64_t RunProfile::total_gathered() const {
    return total(ranks, [](const RankProfile& r) { return r.gathered_elements; });
}
std::uint64_t RunProfile::total_collective_calls() const {
    return total(ranks, [](const RankProfile& r) { return r.collective_calls; });
}
std::uint64_t RunProfile::total_mults() const {
    return total(ranks, [](const RankProfile& r) { return r.mult_count; });
}

bool RunProfile::same_counters(const RunProfile& other) const {
    if (p != other.p || algo != other.algo || ranks.size() != other.ranks.size()) return false;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (!ranks[i].same_counters(other.ranks[i])) return false;
    }
    return true;
}

void write_profile_row(std::ostream& out, const RunProfile& profile) {
    const FieldSummary c = profile.comm_time();
    const FieldSummary w = profile.work_time();
    const FieldSummary cand = profile.candidates();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f,%llu,%.1f,%.0f", c.avg, c.max, w.avg,
                  w.max, static_cast<unsigned long long>(profile.scores()), cand.avg, cand.max);
    out << profile.p << ',' << profile.algo << ',' << buf << '\n';
}

} // namespace apss
