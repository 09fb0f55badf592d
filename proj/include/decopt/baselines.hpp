#pragma once

#include "decopt/network.hpp"
#include "decopt/problem.hpp"
#include "decopt/run_record.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace decopt {

struct StepRule {
    enum class Kind { InverseSqrt, Constant };
    Kind kind = Kind::InverseSqrt;
    double c = 1.0;

    double operator()(long t) const {
        return kind == Kind::Constant ? c : c / std::sqrt(static_cast<double>(t + 1));
    }

    static StepRule inverse_sqrt(double c) { return {Kind::InverseSqrt, c}; }
    static StepRule constant(double c) { return {Kind::Constant, c}; }
    // c = R/M, the usual non-smooth tuning.
    static StepRule default_for(const ProblemInstance& inst) { return inverse_sqrt(inst.R / inst.M); }
};

struct CentralizedResult {
    Vector x_best;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> values;  // p at every iterate, including the start
};

/// Subgradient descent on p with the average oracle; keeps the best iterate seen.
inline CentralizedResult centralized_subgradient(const ProblemInstance& inst, long steps, StepRule rule,
                                                 Vector x0 = {}, bool keep_values = true) {
    if (steps < 1) throw std::invalid_argument("centralized_subgradient: steps must be >= 1");
    Vector x = x0.size() == 0 ? Vector::Zero(inst.d) : std::move(x0);
    detail::require_dim(x.size(), inst.d, "centralized_subgradient");
    CentralizedResult res;
    const double inv_n = 1.0 / static_cast<double>(inst.n());
    auto consider = [&](const Vector& p) {
        const double v = eval_p(inst, p);
        if (keep_values) res.values.push_back(v);
        if (v < res.best_value) {
            res.best_value = v;
            res.x_best = p;
        }
    };
    consider(x);
    Vector g(inst.d);
    for (long t = 0; t < steps; ++t) {
        g.setZero();
        for (const auto& o : inst.oracles) g += o.subgradient(x);
        g *= inv_n;
        g += inst.r * x;
        x -= rule(t) * g;
        consider(x);
    }
    return res;
}

struct DSubgdResult {
    Vector x_o;
    RunRecord record;
    double max_mean_drift = 0.0;  // largest change of the node average caused by a mixing step
};

/// Decentralized subgradient method: mix with (I - W_k), then a local subgradient step.
inline DSubgdResult d_subgd(const ProblemInstance& inst, const TimeVaryingNetwork& net, long rounds, StepRule rule,
                            double tau_com = 1.0, double tau_sub = 1.0,
                            const ProblemInstance* evaluate_on = nullptr) {
    if (rounds < 1) throw std::invalid_argument("d_subgd: rounds must be >= 1");
    if (net.n() != inst.n()) throw std::invalid_argument("d_subgd: network size does not match instance");
    const Eigen::Index n = inst.n();
    NodeStack x = NodeStack::Zero(n, inst.d);
    DSubgdResult res;
    res.record.method = "dsubgd";
    res.record.tau_com = tau_com;
    res.record.tau_sub = tau_sub;
    const ProblemInstance& ev = evaluate_on ? *evaluate_on : inst;
    for (long t = 0; t < rounds; ++t) {
        const Eigen::MatrixXd W = net.gossip(t);
        const Eigen::RowVectorXd mean_before = x.colwise().mean();
        x -= apply_gossip(W, x);
        res.max_mean_drift = std::max(res.max_mean_drift, (x.colwise().mean() - mean_before).norm());
        const double eta = rule(t);
        x -= eta * (stacked_subgradient(inst, x) + inst.r * x);
        ++res.record.gossip_applications;

        RunRow row;
        row.k = t + 1;
        row.comms = t + 1;
        row.subgrads = t + 1;
        row.model_time = tau_com * static_cast<double>(t + 1) + tau_sub * static_cast<double>(t + 1);
        if (ev.p_star) row.primal_gap = primal_gap(ev, x.colwise().mean().transpose());
        row.consensus = project_consensus_complement(x).norm();
        res.record.rows.push_back(row);
    }
    res.x_o = x.colwise().mean().transpose();
    return res;
}

}  // namespace decopt
