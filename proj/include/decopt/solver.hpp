#pragma once

#include "decopt/network.hpp"
#include "decopt/problem.hpp"
#include "decopt/run_record.hpp"
#include "decopt/schedule.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decopt {

struct SolverState {
    NodeStack x, y, z, m;
    NodeStack x_prev;   // x^{k-1}
    NodeStack x_tilde;  // running inner average of the previous outer step
    NodeStack x_bar, y_bar, z_bar;

    // Weighted sums of (xbar^j, ybar^j, zbar^j) for completed j < k, with non-final weights.
    NodeStack sum_x, sum_y, sum_z;
    double sum_w = 0.0;

    // Averages the method would output if stopped now (exactly line-14 averages at k = K).
    NodeStack x_a, y_a, z_a;

    long k = 0;
    long comms = 0;
    long subgrads = 0;  // per node
    long gossip_applications = 0;

    // diagnostics
    double max_inner_residual = 0.0;      // relative residual of the implicit inner step
    double max_consensus_z_violation = 0.0;  // node sums of z variables relative to max(1, ||z||)
};

/// Inner subgradient loop for one outer iteration. Returns (x^{k,T}, mean of x^{k,1..T}).
/// The implicit update is solved in closed form; its relative residual is reported through
/// `max_residual` when given.
inline std::pair<NodeStack, NodeStack> inner_loop(const ProblemInstance& inst, const NodeStack& x_k,
                                                  const NodeStack& y_next, const IterationParams& p, long T,
                                                  double* max_residual = nullptr) {
    const double eta = p.eta_x;
    const double denom = 1.0 + eta * (p.beta + p.tau_x);
    NodeStack cur = x_k;
    NodeStack sum = NodeStack::Zero(x_k.rows(), x_k.cols());
    const NodeStack shift = eta * y_next + (eta * p.tau_x) * x_k;
    for (long t = 0; t < T; ++t) {
        const NodeStack g = stacked_subgradient(inst, cur);
        NodeStack next = (cur - eta * g + shift) / denom;
        if (max_residual) {
            const NodeStack res = next + eta * (g + p.beta * next - y_next + p.tau_x * (next - x_k)) - cur;
            const double scale = std::max({1.0, cur.norm(), next.norm(), eta * g.norm(), eta * y_next.norm(),
                                           eta * p.tau_x * x_k.norm()});
            *max_residual = std::max(*max_residual, res.norm() / scale);
        }
        sum += next;
        cur = std::move(next);
    }
    return {std::move(cur), sum / static_cast<double>(T)};
}

struct Budget {
    long K = 0;
    long T = 0;
};

/// K = ceil(chi M sqrt(636/(r eps))), T = ceil(216 M^2/(r eps K)). With these the 1/K^2 and 1/(KT)
/// terms of the final bound are each at most eps/3.
inline Budget choose_budget(const ProblemInstance& inst, double chi, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("choose_budget: epsilon must be > 0");
    if (!(inst.r > 0.0)) throw std::invalid_argument("choose_budget: r must be > 0");
    Budget b;
    b.K = static_cast<long>(std::ceil(chi * inst.M * std::sqrt(636.0 / (inst.r * epsilon))));
    b.K = std::max(b.K, 1L);
    b.T = static_cast<long>(std::ceil(216.0 * inst.M * inst.M / (inst.r * epsilon * static_cast<double>(b.K))));
    b.T = std::max(b.T, 1L);
    return b;
}

struct SolveOptions {
    double tau_com = 1.0;
    double tau_sub = 1.0;
    bool record = true;
    bool certificate_each_iteration = true;
    // Objective used for the primal_gap column; defaults to the solved instance.
    const ProblemInstance* evaluate_on = nullptr;
};

/// Probe (x, y, z) for the duality-gap certificate.
struct SaddleProbe {
    NodeStack x, y, z;
};

/// Q(x,y,z) = F(x) - <y,x> - (r_yz/2)||y + z||^2.
inline double saddle_objective(const ProblemInstance& inst, const Schedule& s, const NodeStack& x,
                               const NodeStack& y, const NodeStack& z) {
    return eval_F(inst, x, s.r_x) - (y.array() * x.array()).sum() - 0.5 * s.r_yz * (y + z).squaredNorm();
}

struct ProbeResult {
    double gap = 0.0;
    double bound = 0.0;
    double margin() const { return bound - gap; }
};

struct CertificateReport {
    bool ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::vector<ProbeResult> probes;
    std::string message;
};

/// Checks Q(x_a,y,z) - Q(x,y_a,z_a) <= (2/K^2)(r||x||^2 + (18/r)||y||^2 + (45 chi^2/r)||z||^2)
/// + 72 n M^2/(r K T) for every probe, with K the number of completed outer iterations.
/// Probe z components are projected onto the consensus complement first.
inline CertificateReport duality_gap_certificate(const SolverState& st, const ProblemInstance& inst,
                                                 const Schedule& s, const std::vector<SaddleProbe>& probes) {
    CertificateReport rep;
    if (st.k < 1) throw std::logic_error("duality_gap_certificate: no completed iteration");
    const double K = static_cast<double>(st.k);
    const double r = s.r;
    const double tail = 72.0 * static_cast<double>(inst.n()) * inst.M * inst.M / (r * K * static_cast<double>(s.T));
    for (const auto& pr : probes) {
        const NodeStack z = project_consensus_complement(pr.z);
        ProbeResult res;
        res.gap = saddle_objective(inst, s, st.x_a, pr.y, z) - saddle_objective(inst, s, pr.x, st.y_a, st.z_a);
        res.bound = 2.0 / (K * K) *
                        (r * pr.x.squaredNorm() + 18.0 / r * pr.y.squaredNorm() +
                         45.0 * s.chi * s.chi / r * z.squaredNorm()) +
                    tail;
        rep.worst_margin = std::min(rep.worst_margin, res.margin());
        if (res.gap > res.bound && rep.ok) {
            rep.ok = false;
            std::ostringstream os;
            os << "duality gap " << res.gap << " exceeds bound " << res.bound << " at probe "
               << rep.probes.size();
            rep.message = os.str();
        }
        rep.probes.push_back(res);
    }
    return rep;
}

/// Saddle point (w*, y*, z*) built from x* and a subgradient selection Delta* with
/// r x* + mean(Delta*) = 0. Falls back to the oracle selection at x* when it satisfies that
/// relation; otherwise no probe is available.
inline std::optional<SaddleProbe> saddle_point_probe(const ProblemInstance& inst, const Schedule& s) {
    if (!inst.x_star) return std::nullopt;
    const Eigen::Index n = inst.n();
    NodeStack w = inst.x_star->transpose().replicate(n, 1);
    NodeStack delta;
    if (inst.optimal_subgradients) {
        delta = inst.optimal_subgradients();
    } else {
        delta = stacked_subgradient(inst, w);
    }
    const Vector stationarity = inst.r * *inst.x_star + delta.colwise().mean().transpose();
    if (stationarity.norm() > 1e-10 * std::max(1.0, inst.M)) return std::nullopt;
    SaddleProbe p;
    p.y = delta + s.r_x * w;
    p.z = -inst.r * w - delta;
    p.x = std::move(w);
    return p;
}

/// Origin, the analytic saddle point when available, and `random_count` Gaussian probes of
/// the given scale (z projected onto the consensus complement).
inline std::vector<SaddleProbe> make_probes(const ProblemInstance& inst, const Schedule& s, int random_count,
                                            std::mt19937_64& rng, double scale = 1.0) {
    const Eigen::Index n = inst.n(), d = inst.d;
    std::vector<SaddleProbe> out;
    out.push_back({NodeStack::Zero(n, d), NodeStack::Zero(n, d), NodeStack::Zero(n, d)});
    if (auto sp = saddle_point_probe(inst, s)) out.push_back(std::move(*sp));
    std::normal_distribution<double> g(0.0, scale);
    auto draw = [&]() {
        NodeStack a(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = g(rng);
        return a;
    };
    for (int t = 0; t < random_count; ++t) {
        SaddleProbe p;
        p.x = draw();
        p.y = draw();
        p.z = project_consensus_complement(draw());
        out.push_back(std::move(p));
    }
    return out;
}

/// Step-wise driver of the optimal decentralized primal-dual method.
class OptimalSolver {
public:
    OptimalSolver(const ProblemInstance& inst, const TimeVaryingNetwork& net, long K, long T,
                  SolveOptions opts = {})
        : inst_(inst), net_(net), sched_(make_schedule(inst.r, net.chi(), K, T)), opts_(opts) {
        inst_.validate();
        if (net_.n() != inst_.n()) throw std::invalid_argument("solver: network size does not match instance");
        const Eigen::Index n = inst_.n(), d = inst_.d;
        const NodeStack zero = NodeStack::Zero(n, d);
        st_.x = st_.y = st_.z = st_.m = zero;
        st_.x_prev = st_.x_tilde = st_.x_bar = st_.x;
        st_.y_bar = st_.y;
        st_.z_bar = st_.z;
        st_.sum_x = st_.sum_y = st_.sum_z = zero;
        st_.x_a = st_.y_a = st_.z_a = zero;
        record_.method = "optimal";
        record_.tau_com = opts_.tau_com;
        record_.tau_sub = opts_.tau_sub;
        if (opts_.certificate_each_iteration) {
            cert_probes_.push_back({zero, zero, zero});
            if (auto sp = saddle_point_probe(inst_, sched_)) cert_probes_.push_back(std::move(*sp));
        }
    }

    const Schedule& schedule() const { return sched_; }
    const SolverState& state() const { return st_; }
    const RunRecord& record() const { return record_; }
    RunRecord& record() { return record_; }
    bool done() const { return st_.k >= sched_.K; }

    /// Node average of the current averaged iterate x_a.
    Vector output() const { return st_.x_a.colwise().mean().transpose(); }

    /// One outer iteration (one communication round, T subgradient calls per node).
    void step() {
        if (done()) throw std::logic_error("solver: all outer iterations already performed");
        const long k = st_.k;
        const IterationParams& p = sched_.at(k);
        const double a = p.alpha;

        const NodeStack y_u = a * st_.y + (1.0 - a) * st_.y_bar;
        const NodeStack z_u = a * st_.z + (1.0 - a) * st_.z_bar;

        // gradients of G(y,z) = (r_yz/2)||y+z||^2 coincide in y and z
        const NodeStack g = sched_.r_yz * (y_u + z_u);

        // one exchange of the pair (g, g + m) over the round-k graph
        const Eigen::MatrixXd W = net_.gossip(k);
        const NodeStack g_tilde = apply_gossip(W, g);
        const NodeStack g_hat = apply_gossip(W, g + st_.m);
        ++st_.comms;
        st_.gossip_applications += 2;

        const NodeStack x_hat = st_.x + p.gamma * (st_.x_tilde - st_.x_prev);
        NodeStack y_next = st_.y - p.eta_y * (g + x_hat);
        NodeStack z_next = st_.z - p.eta_z * g_hat;

        NodeStack y_bar_next = y_u + a * (y_next - st_.y);
        NodeStack z_bar_next = z_u - p.theta_z * g_tilde;
        NodeStack m_next = (p.eta_z / sched_.eta_z_at(k + 1)) * (st_.m + g - g_hat);

        auto [x_last, x_avg] = inner_loop(inst_, st_.x, y_next, p, sched_.T, &st_.max_inner_residual);
        st_.subgrads += sched_.T;

        NodeStack x_next = p.sigma * x_last + (1.0 - p.sigma) * x_avg;
        NodeStack x_bar_next = a * x_avg + (1.0 - a) * st_.x_bar;

        track_consensus(z_u);
        track_consensus(z_next);
        track_consensus(z_bar_next);

        st_.x_prev = std::move(st_.x);
        st_.x = std::move(x_next);
        st_.x_tilde = std::move(x_avg);
        st_.x_bar = std::move(x_bar_next);
        st_.y = std::move(y_next);
        st_.y_bar = std::move(y_bar_next);
        st_.z = std::move(z_next);
        st_.z_bar = std::move(z_bar_next);
        st_.m = std::move(m_next);
        st_.k = k + 1;

        if (!st_.x.allFinite() || !st_.y.allFinite() || !st_.z.allFinite() || !st_.m.allFinite()) {
            std::ostringstream os;
            os << "solver: non-finite iterate at outer iteration " << k;
            throw std::runtime_error(os.str());
        }

        update_average();
        if (opts_.record) record_row();
    }

    void run() {
        while (!done()) step();
    }

private:
    void track_consensus(const NodeStack& z) {
        const double sums = z.colwise().sum().cwiseAbs().maxCoeff();
        st_.max_consensus_z_violation = std::max(st_.max_consensus_z_violation, sums / std::max(1.0, z.norm()));
    }

    void update_average() {
        const long j = st_.k;
        const double w_final = Schedule::truncated_lambda(j, j);
        const double total = st_.sum_w + w_final;
        st_.x_a = (st_.sum_x + w_final * st_.x_bar) / total;
        st_.y_a = (st_.sum_y + w_final * st_.y_bar) / total;
        st_.z_a = (st_.sum_z + w_final * st_.z_bar) / total;
        if (j < sched_.K) {
            const double w = Schedule::truncated_lambda(j, sched_.K);
            st_.sum_x += w * st_.x_bar;
            st_.sum_y += w * st_.y_bar;
            st_.sum_z += w * st_.z_bar;
            st_.sum_w += w;
        }
    }

    void record_row() {
        RunRow row;
        row.k = st_.k;
        row.comms = st_.comms;
        row.subgrads = st_.subgrads;
        row.model_time = opts_.tau_com * static_cast<double>(st_.comms) + opts_.tau_sub * static_cast<double>(st_.subgrads);
        const ProblemInstance& ev = opts_.evaluate_on ? *opts_.evaluate_on : inst_;
        if (ev.p_star) row.primal_gap = primal_gap(ev, output());
        row.consensus = project_consensus_complement(st_.x_a).norm();
        if (!cert_probes_.empty())
            row.cert_margin = duality_gap_certificate(st_, inst_, sched_, cert_probes_).worst_margin;
        record_.rows.push_back(row);
        record_.gossip_applications = st_.gossip_applications;
    }

    const ProblemInstance& inst_;
    const TimeVaryingNetwork& net_;
    Schedule sched_;
    SolveOptions opts_;
    SolverState st_;
    RunRecord record_;
    std::vector<SaddleProbe> cert_probes_;
};

struct SolveResult {
    Vector x_o;
    RunRecord record;
    SolverState state;
    Schedule schedule;
};

inline SolveResult solve_strongly_convex(const ProblemInstance& inst, const TimeVaryingNetwork& net, long K, long T,
                                         SolveOptions opts = {}) {
    if (!(inst.r > 0.0)) throw std::invalid_argument("solve_strongly_convex: r must be > 0");
    OptimalSolver solver(inst, net, K, T, opts);
    solver.run();
    return {solver.output(), solver.record(), solver.state(), solver.schedule()};
}

/// Regularized copy with r = eps / R^2; the reference solution of the original problem does
/// not carry over.
inline ProblemInstance regularize_for_convex(const ProblemInstance& inst, double epsilon) {
    ProblemInstance reg = inst;
    reg.r = epsilon / (inst.R * inst.R);
    reg.x_star.reset();
    reg.p_star.reset();
    reg.optimal_subgradients = nullptr;
    reg.name = inst.name + "+reg";
    return reg;
}

struct ConvexSolveResult : SolveResult {
    ProblemInstance regularized;
    Budget budget;
};

/// Convex case: solve the instance regularized with r = eps/R^2 to precision eps/2.
/// The primal_gap column is measured on the original (unregularized) objective.
inline ConvexSolveResult solve_convex(const ProblemInstance& inst, const TimeVaryingNetwork& net, double epsilon,
                                      SolveOptions opts = {}) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("solve_convex: epsilon must be > 0");
    if (inst.r != 0.0) throw std::invalid_argument("solve_convex: instance must have r = 0");
    ConvexSolveResult out;
    out.regularized = regularize_for_convex(inst, epsilon);
    out.budget = choose_budget(out.regularized, net.chi(), epsilon / 2.0);
    opts.evaluate_on = &inst;
    SolveResult r = solve_strongly_convex(out.regularized, net, out.budget.K, out.budget.T, opts);
    static_cast<SolveResult&>(out) = std::move(r);
    return out;
}

}  // namespace decopt
