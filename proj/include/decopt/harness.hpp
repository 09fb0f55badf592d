#pragma once

#include "decopt/baselines.hpp"
#include "decopt/hard_instance.hpp"
#include "decopt/network.hpp"
#include "decopt/problem.hpp"
#include "decopt/run_record.hpp"
#include "decopt/solver.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace decopt {

// Flat key=value experiment configuration.
class Config {
public:
    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {"method", "instance", "n",  "d",        "M",        "R",
                                                   "r",      "chi",      "eps", "K",        "T",        "topology",
                                                   "tau_com", "tau_sub", "seed", "out"};
        return keys;
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
        values_[key] = value;
    }

    /// Parses one `key=value` token (whitespace around '=' allowed).
    void set_assignment(const std::string& token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value, got '" + token + "'");
        set(trim(token.substr(0, eq)), trim(token.substr(eq + 1)));
    }

    /// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
    void load(std::istream& is) {
        std::string line;
        while (std::getline(is, line)) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            set_assignment(t);
        }
    }

    void load_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
        load(f);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != it->second.size())
            throw std::invalid_argument("config: '" + key + "' is not a number: '" + it->second + "'");
        return v;
    }

    long integer(const std::string& key, long fallback) const {
        const double v = num(key, static_cast<double>(fallback));
        if (v != std::floor(v)) throw std::invalid_argument("config: '" + key + "' must be an integer");
        return static_cast<long>(v);
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

struct Experiment {
    ProblemInstance problem;
    std::shared_ptr<TimeVaryingNetwork> network;
};

inline TimeVaryingNetwork make_topology(const std::string& name, int n, std::uint64_t seed) {
    if (name == "rotating_star") return rotating_star(n);
    if (name == "ring") return ring(n);
    if (name == "complete") return complete_graph(n);
    if (name == "erdos_renyi") return erdos_renyi(n, 0.5, seed);
    throw std::invalid_argument("config: unknown topology '" + name + "'");
}

/// Reference optimum of an instance without a closed form, by long centralized subgradient descent.
inline void attach_reference_solution(ProblemInstance& inst, long steps = 200000) {
    const CentralizedResult ref = centralized_subgradient(inst, steps, StepRule::default_for(inst), {}, false);
    inst.x_star = ref.x_best;
    inst.p_star = ref.best_value;
    inst.R = std::max(inst.R, ref.x_best.norm());
}

/// f_i(x) = (M/sqrt d)||x - c_i||_1 with anchors c_i uniform in [-1, 1]^d.
inline ProblemInstance make_custom_instance(int n, int d, double M, double r, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("custom instance: n and d must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ProblemInstance inst;
    inst.name = "custom";
    inst.d = d;
    inst.r = r;
    inst.M = M;
    inst.R = std::sqrt(static_cast<double>(d));
    const double w = M / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < n; ++i) {
        Vector c(d);
        for (int j = 0; j < d; ++j) c(j) = u(rng);
        inst.oracles.push_back(l1_distance_oracle(std::move(c), w));
    }
    return inst;
}

inline Experiment build_experiment(const Config& cfg) {
    const std::string kind = cfg.str("instance", "hard_sc");
    const double M = cfg.num("M", 1.0);
    const double chi = cfg.num("chi", 6.0);
    const double eps = cfg.num("eps", 1e-2);
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    Experiment ex;
    std::optional<TimeVaryingNetwork> net;
    if (kind == "hard_sc") {
        const double r = cfg.num("r", 0.1);
        if (cfg.has("d") || cfg.has("n")) {
            const int n = static_cast<int>(cfg.integer("n", 3 * static_cast<long>(std::floor(chi / 3.0))));
            const int d = static_cast<int>(cfg.integer("d", 3));
            ex.problem = make_hard_sc(n, d, M / (2.0 * std::sqrt(static_cast<double>(d))), r);
            ex.problem.M = M;
            net = rotating_star(n);
        } else {
            HardInstance h = build_sc(M, r, eps, chi);
            ex.problem = std::move(h.problem);
            net = std::move(h.network);
        }
    } else if (kind == "hard_cvx") {
        HardInstanceCvx h = build_cvx(M, cfg.num("R", 1.0), eps, chi);
        ex.problem = std::move(h.problem);
        net = std::move(h.network);
    } else if (kind == "custom") {
        const int n = static_cast<int>(cfg.integer("n", 4));
        const int d = static_cast<int>(cfg.integer("d", 2));
        ex.problem = make_custom_instance(n, d, M, cfg.num("r", 0.1), seed);
        if (cfg.has("R")) ex.problem.R = cfg.num("R", 1.0);
        attach_reference_solution(ex.problem);
        net = ring(n);
    } else {
        throw std::invalid_argument("config: unknown instance '" + kind + "'");
    }
    if (cfg.has("topology")) net = make_topology(cfg.str("topology", ""), static_cast<int>(ex.problem.n()), seed);
    ex.problem.validate();
    ex.network = std::make_shared<TimeVaryingNetwork>(std::move(*net));
    return ex;
}

struct RunOutcome {
    RunRecord record;
    Vector x_o;
    long K = 0;
    long T = 0;
    double final_gap = std::numeric_limits<double>::quiet_NaN();
    bool ok = true;
    std::string message;
    std::string summary;
};

/// Runs the configured method; certification failures set ok = false.
inline RunOutcome run_experiment(const Config& cfg) {
    const Experiment ex = build_experiment(cfg);
    const ProblemInstance& p = ex.problem;
    const TimeVaryingNetwork& net = *ex.network;
    const std::string method = cfg.str("method", "optimal");
    const double eps = cfg.num("eps", 1e-2);
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    SolveOptions opts;
    opts.tau_com = cfg.num("tau_com", 1.0);
    opts.tau_sub = cfg.num("tau_sub", 1.0);

    RunOutcome out;
    auto budget = [&]() {
        if (p.r > 0.0) return choose_budget(p, net.chi(), eps);
        return choose_budget(regularize_for_convex(p, eps), net.chi(), eps / 2.0);
    };

    if (method == "optimal") {
        if (p.r > 0.0) {
            const Budget b = budget();
            out.K = cfg.integer("K", b.K);
            out.T = cfg.integer("T", b.T);
            OptimalSolver solver(p, net, out.K, out.T, opts);
            solver.run();
            out.x_o = solver.output();
            out.record = solver.record();
            std::mt19937_64 rng(seed);
            const auto probes = make_probes(p, solver.schedule(), 20, rng);
            const CertificateReport cert = duality_gap_certificate(solver.state(), p, solver.schedule(), probes);
            if (!cert.ok) {
                out.ok = false;
                out.message = cert.message;
            }
            const SolverState& st = solver.state();
            if (st.max_consensus_z_violation > 1e-8) {
                out.ok = false;
                out.message += " z left the consensus complement;";
            }
            if (st.max_inner_residual > 1e-12) {
                out.ok = false;
                out.message += " inner step residual too large;";
            }
        } else {
            if (cfg.has("K") || cfg.has("T"))
                throw std::invalid_argument("config: K/T cannot be set for r = 0; the budget follows from eps");
            ConvexSolveResult res = solve_convex(p, net, eps, opts);
            out.K = res.budget.K;
            out.T = res.budget.T;
            out.x_o = res.x_o;
            out.record = std::move(res.record);
        }
    } else if (method == "dsubgd") {
        out.K = cfg.integer("K", budget().K);
        out.T = 1;
        DSubgdResult res = d_subgd(p, net, out.K, StepRule::default_for(p), opts.tau_com, opts.tau_sub);
        out.x_o = res.x_o;
        out.record = std::move(res.record);
        if (res.max_mean_drift > 1e-12 * std::max(1.0, p.R)) {
            out.ok = false;
            out.message = "mixing step changed the node average";
        }
    } else if (method == "centralized") {
        out.K = cfg.integer("K", budget().K);
        out.T = 1;
        CentralizedResult res = centralized_subgradient(p, out.K, StepRule::default_for(p));
        out.x_o = res.x_best;
        out.record.method = "centralized";
        out.record.tau_com = opts.tau_com;
        out.record.tau_sub = opts.tau_sub;
        double best = std::numeric_limits<double>::infinity();
        for (long t = 1; t <= out.K; ++t) {
            best = std::min(best, res.values[static_cast<std::size_t>(t)]);
            RunRow row;
            row.k = t;
            row.comms = 0;
            row.subgrads = t;
            row.model_time = opts.tau_sub * static_cast<double>(t);
            if (p.p_star) row.primal_gap = best - *p.p_star;
            row.consensus = 0.0;
            out.record.rows.push_back(row);
        }
    } else {
        throw std::invalid_argument("config: unknown method '" + method + "'");
    }
    out.record.seed = seed;
    if (p.p_star) out.final_gap = primal_gap(p, out.x_o);

    std::ostringstream os;
    os << "method=" << method << " instance=" << p.name << " n=" << p.n() << " d=" << p.d << " chi=" << net.chi()
       << " K=" << out.K << " T=" << out.T;
    if (!out.record.rows.empty())
        os << " comms=" << out.record.rows.back().comms << " subgrads=" << out.record.rows.back().subgrads;
    os << " final_gap=" << detail::format_double(out.final_gap) << (out.ok ? " OK" : " FAIL");
    out.summary = os.str();
    return out;
}

inline void write_csv_file(const std::string& path, const RunRecord& rec) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(f, rec);
}

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog_slope: values must be > 0");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

struct SweepPoint {
    std::string value;
    RunOutcome outcome;
};

struct SweepResult {
    std::string key;
    std::vector<SweepPoint> points;
    bool ok = true;

    void write_summary(std::ostream& os) const {
        os << "key,value,K,T,comms,subgrads,final_gap\n";
        for (const auto& p : points) {
            const auto& rows = p.outcome.record.rows;
            os << key << ',' << p.value << ',' << p.outcome.K << ',' << p.outcome.T << ','
               << (rows.empty() ? 0 : rows.back().comms) << ',' << (rows.empty() ? 0 : rows.back().subgrads) << ','
               << detail::format_double(p.outcome.final_gap) << '\n';
        }
    }

    /// Slope of final gap against the swept value, when both are positive numbers.
    std::optional<double> slope() const {
        std::vector<double> xs, ys;
        for (const auto& p : points) {
            try {
                xs.push_back(std::stod(p.value));
            } catch (const std::exception&) {
                return std::nullopt;
            }
            ys.push_back(p.outcome.final_gap);
        }
        if (xs.size() < 2) return std::nullopt;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) return std::nullopt;
        return fit_loglog_slope(xs, ys);
    }
};

/// Repeats run_experiment for each value of `key`. When `out_stem` is non-empty, writes
/// <stem>_<key><value>.csv per point and <stem>_summary.csv.
inline SweepResult sweep(const Config& base, const std::string& key, const std::vector<std::string>& values,
                         const std::string& out_stem = "") {
    if (!Config::known_keys().count(key)) throw std::invalid_argument("sweep: unknown key '" + key + "'");
    SweepResult res;
    res.key = key;
    for (const auto& v : values) {
        Config cfg = base;
        cfg.set(key, v);
        SweepPoint pt{v, run_experiment(cfg)};
        res.ok = res.ok && pt.outcome.ok;
        if (!out_stem.empty()) write_csv_file(out_stem + "_" + key + v + ".csv", pt.outcome.record);
        res.points.push_back(std::move(pt));
    }
    if (!out_stem.empty()) {
        std::ofstream f(out_stem + "_summary.csv");
        if (!f) throw std::runtime_error("cannot write sweep summary");
        res.write_summary(f);
    }
    return res;
}

}  // namespace decopt
