#include "apss/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace apss {

namespace {

struct Header {
    std::size_t n = 0;
    std::size_t m = 0;
};

std::optional<Header> parse_header(const std::string& line, std::size_t lineno) {
    std::istringstream in(line);
    std::string hash;
    std::string tag;
    in >> hash >> tag;
    if (hash != "#" || tag != "apss") return std::nullopt;
    Header h;
    bool have_n = false;
    bool have_m = false;
    std::string field;
    while (in >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "bad header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const char* first = field.data() + eq + 1;
        const char* last = field.data() + field.size();
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) throw ParseError(lineno, "bad header value '" + field + "'");
        if (key == "n") {
            h.n = value;
            have_n = true;
        } else if (key == "m") {
            h.m = value;
            have_m = true;
        } else {
            throw ParseError(lineno, "unknown header field '" + key + "'");
        }
    }
    if (!have_n || !have_m) throw ParseError(lineno, "header needs n= and m=");
    return h;
}

std::vector<Entry> parse_row(const std::string& line, std::size_t lineno) {
    std::vector<Entry> row;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) throw ParseError(lineno, "expected dim:weight, got '" + token + "'");
        const char* end = token.data() + token.size();
        DimId dim = 0;
        const auto d = std::from_chars(token.data(), token.data() + colon, dim);
        if (d.ec != std::errc() || d.ptr != token.data() + colon || colon == 0) {
            throw ParseError(lineno, "bad dimension in '" + token + "'");
        }
        double weight = 0.0;
        const auto w = std::from_chars(token.data() + colon + 1, end, weight);
        if (w.ec != std::errc() || w.ptr != end || colon + 1 == token.size()) {
            throw ParseError(lineno, "bad weight in '" + token + "'");
        }
        if (!std::isfinite(weight)) throw ParseError(lineno, "weight is not finite");
        if (weight <= 0.0) throw NegativeWeight(lineno);
        row.push_back({dim, weight});
    }
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
    for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k].dim == row[k - 1].dim) throw DuplicateDim(lineno, row[k].dim);
    }
    return row;
}

/// Uniform double in [0, 1) from the top 53 bits; same on every platform.
double canonical(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t count) {
    return std::min(count - 1, static_cast<std::size_t>(canonical(rng) * static_cast<double>(count)));
}

} // namespace

Dataset parse_dataset(std::istream& in, bool normalize) {
    std::vector<std::vector<Entry>> rows;
    std::optional<Header> header;
    std::string line;
    std::size_t lineno = 0;
    std::size_t dims = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') {
            if (auto h = parse_header(line.substr(first), lineno)) {
                if (header || !rows.empty()) throw ParseError(lineno, "header must come before the data");
                header = h;
            }
            continue;
        }
        rows.push_back(parse_row(line, lineno));
        if (!rows.back().empty()) dims = std::max<std::size_t>(dims, rows.back().back().dim + std::size_t{1});
    }
    if (header) {
        if (rows.size() != header->n) {
            throw ParseError(lineno, "header says n=" + std::to_string(header->n) + ", found " +
                                         std::to_string(rows.size()) + " vectors");
        }
        if (dims > header->m) {
            throw ParseError(lineno, "header says m=" + std::to_string(header->m) + ", found dimension " +
                                         std::to_string(dims - 1));
        }
        dims = header->m;
    }
    Dataset data = Dataset::from_rows(rows, dims);
    return normalize ? data.normalized_copy() : data;
}

Dataset load_dataset(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open dataset " + path);
    return parse_dataset(in, normalize);
}

void save_dataset(std::ostream& out, const Dataset& data) {
    out << "# apss n=" << data.size() << " m=" << data.dims() << '\n';
    char buf[64];
    for (const SparseVector& x : data.vectors()) {
        bool first = true;
        for (const Entry& e : x.entries()) {
            const auto res = std::to_chars(buf, buf + sizeof buf, e.weight);
            if (!first) out << ' ';
            out << e.dim << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
            first = false;
        }
        out << '\n';
    }
}

void save_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw InvalidParams("cannot write " + path);
    save_dataset(out, data);
}

Dataset gen_synthetic(const SynthParams& params) {
    const std::size_t n = params.n;
    const std::size_t m = params.m;
    const std::size_t avg = params.avg_nnz;
    if (n < 1 || m < 1) throw InvalidParams("n and m must be >= 1");
    if (avg < 1 || avg > m) throw InvalidParams("avg_nnz must lie in [1, m]");
    if (!(params.zipf >= 0.0) || !std::isfinite(params.zipf)) throw InvalidParams("zipf exponent must be >= 0");
    if (m > std::numeric_limits<DimId>::max() || n >= kNoVector) throw InvalidParams("dataset too large");

    std::vector<double> popularity(m);
    for (std::size_t d = 0; d < m; ++d) popularity[d] = std::pow(static_cast<double>(d + 1), -params.zipf);
    const std::size_t spread = std::min({avg - 1, m - avg, avg / 2});

    std::mt19937_64 rng(params.seed);
    std::vector<std::vector<Entry>> rows(n);
    std::vector<std::pair<double, DimId>> keys(m);
    for (auto& row : rows) {
        const std::size_t k = avg - spread + uniform_index(rng, 2 * spread + 1);
        // Weighted sampling without replacement: keep the k largest log(u)/w.
        for (std::size_t d = 0; d < m; ++d) {
            const double u = 1.0 - canonical(rng);
            keys[d] = {std::log(u) / popularity[d], static_cast<DimId>(d)};
        }
        std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k - 1), keys.end(),
                         [](const auto& a, const auto& b) { return a > b; });
        row.clear();
        for (std::size_t j = 0; j < k; ++j) row.push_back({keys[j].second, 0.0});
        std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
        for (Entry& e : row) e.weight = 1.0 - canonical(rng);
    }
    return Dataset::from_rows(rows, m).normalized_copy();
}

double threshold_advisor(std::size_t n) {
    if (n < 2) return 0.0;
    return static_cast<double>(n) * std::log2(static_cast<double>(n));
}

double auto_threshold(const Dataset& data, std::size_t sample) {
    const std::size_t s = std::min(sample, data.size());
    if (s < 2) throw InvalidParams("auto threshold needs at least two vectors");
    std::vector<double> scores;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double v = dot(data[i], data[j]);
            if (v > 0.0) scores.push_back(v);
        }
    }
    std::sort(scores.begin(), scores.end());
    auto count_at = [&](double t) {
        return static_cast<double>(scores.end() - std::lower_bound(scores.begin(), scores.end(), t));
    };
    // The sample should hold the same fraction of matching pairs as the full set.
    const double n = static_cast<double>(data.size());
    const double budget = threshold_advisor(data.size()) * (static_cast<double>(s) * (s - 1)) / (n * (n - 1));
    double lo = 0.0;
    double hi = scores.empty() ? 1.0 : std::max(1.0, scores.back());
    double t = (lo + hi) / 2;
    for (int iter = 0; iter < 100; ++iter) {
        t = (lo + hi) / 2;
        const double c = count_at(t);
        if (c > 2 * budget) {
            lo = t;
        } else if (c < budget / 2) {
            hi = t;
        } else {
            break;
        }
    }
    return t;
}

void write_matches(std::ostream& out, const MatchSet& matches) {
    char buf[96];
    for (const auto& [key, score] : matches) {
        std::snprintf(buf, sizeof buf, "%u %u %.9f\n", key.first, key.second, score);
        out << buf;
    }
}

} // namespace apss
