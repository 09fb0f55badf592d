#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace decopt {

// One metrics row, recorded after each outer iteration (or each round for baselines).
struct RunRow {
    long k = 0;
    long comms = 0;
    long subgrads = 0;  // per node
    double model_time = 0.0;
    double primal_gap = std::numeric_limits<double>::quiet_NaN();
    double consensus = 0.0;
    double cert_margin = std::numeric_limits<double>::quiet_NaN();

    bool operator==(const RunRow& o) const {
        auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
        return k == o.k && comms == o.comms && subgrads == o.subgrads && same(model_time, o.model_time) &&
               same(primal_gap, o.primal_gap) && same(consensus, o.consensus) && same(cert_margin, o.cert_margin);
    }
};

struct RunRecord {
    std::string method;
    std::uint64_t seed = 0;
    double tau_com = 1.0;
    double tau_sub = 1.0;
    long gossip_applications = 0;  // raw W products; two per communication round for the optimal method
    std::vector<RunRow> rows;

    bool operator==(const RunRecord& o) const {
        return method == o.method && seed == o.seed && tau_com == o.tau_com && tau_sub == o.tau_sub &&
               gossip_applications == o.gossip_applications && rows == o.rows;
    }
};

inline constexpr const char* kCsvHeader = "k,comms,subgrads,model_time,primal_gap,consensus,cert_margin";

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
    return v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const RunRecord& rec) {
    os << "# method=" << rec.method << " seed=" << rec.seed << " tau_com=" << detail::format_double(rec.tau_com)
       << " tau_sub=" << detail::format_double(rec.tau_sub) << " gossip_applications=" << rec.gossip_applications
       << '\n';
    os << kCsvHeader << '\n';
    for (const auto& r : rec.rows) {
        os << r.k << ',' << r.comms << ',' << r.subgrads << ',' << detail::format_double(r.model_time) << ','
           << detail::format_double(r.primal_gap) << ',' << detail::format_double(r.consensus) << ','
           << detail::format_double(r.cert_margin) << '\n';
    }
}

inline RunRecord parse_csv(std::istream& is) {
    RunRecord rec;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "method") rec.method = val;
                else if (key == "seed") rec.seed = std::stoull(val);
                else if (key == "tau_com") rec.tau_com = detail::parse_double(val);
                else if (key == "tau_sub") rec.tau_sub = detail::parse_double(val);
                else if (key == "gossip_applications") rec.gossip_applications = std::stol(val);
            }
            continue;
        }
        if (!header_seen) {
            if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 7) throw std::invalid_argument("csv: expected 7 fields in '" + line + "'");
        RunRow r;
        r.k = std::stol(f[0]);
        r.comms = std::stol(f[1]);
        r.subgrads = std::stol(f[2]);
        r.model_time = detail::parse_double(f[3]);
        r.primal_gap = detail::parse_double(f[4]);
        r.consensus = detail::parse_double(f[5]);
        r.cert_margin = detail::parse_double(f[6]);
        rec.rows.push_back(r);
    }
    if (!header_seen) throw std::invalid_argument("csv: missing header");
    return rec;
}

}  // namespace decopt
