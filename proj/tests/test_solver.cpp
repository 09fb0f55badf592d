#include "decopt/hard_instance.hpp"
#include "decopt/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace decopt;

namespace {

ProblemInstance abs_instance(int n, double r, double R = 1.0) {
    ProblemInstance p;
    p.name = "abs";
    p.d = 1;
    p.r = r;
    p.M = 1.0;
    p.R = R;
    for (int i = 0; i < n; ++i) p.oracles.push_back(l1_distance_oracle(Vector::Zero(1)));
    p.x_star = Vector::Zero(1);
    p.p_star = 0.0;
    return p;
}

}  // namespace

TEST(InnerLoop, FixedPointAtOrigin) {
    const ProblemInstance p = abs_instance(1, 1.0);
    IterationParams ip;
    ip.eta_x = 0.5;
    ip.beta = 1.0;
    ip.tau_x = 1.0;
    auto [last, avg] = inner_loop(p, NodeStack::Zero(1, 1), NodeStack::Zero(1, 1), ip, 1);
    EXPECT_EQ(last(0, 0), 0.0);
    EXPECT_EQ(avg(0, 0), 0.0);
}

TEST(InnerLoop, ScalarHandSolution) {
    ProblemInstance p = abs_instance(1, 1.0);
    p.oracles[0].subgradient = [](const Vector&) { return Vector::Ones(1).eval(); };
    IterationParams ip;
    ip.eta_x = 1.0;
    ip.beta = 1.0;
    ip.tau_x = 1.0;
    auto [last, avg] = inner_loop(p, NodeStack::Zero(1, 1), NodeStack::Zero(1, 1), ip, 1);
    EXPECT_NEAR(last(0, 0), -1.0 / 3.0, 1e-16);
    EXPECT_NEAR(avg(0, 0), -1.0 / 3.0, 1e-16);
}

TEST(InnerLoop, ImplicitResidualAtEveryStep) {
    const ProblemInstance p = make_hard_sc(6, 5, 0.4, 0.3);
    const Schedule s = make_schedule(0.3, 6.0, 10, 25);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 3.0);
    NodeStack x(6, 5), y(6, 5);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) {
            x(i, j) = g(rng);
            y(i, j) = g(rng);
        }
    double residual = 0.0;
    for (long k = 0; k < s.K; ++k) inner_loop(p, x, y, s.at(k), s.T, &residual);
    EXPECT_LE(residual, 1e-12);
}

TEST(ChooseBudget, Arithmetic) {
    ProblemInstance p = abs_instance(1, 1.0);
    const Budget b = choose_budget(p, 1.0, 1.0);
    EXPECT_EQ(b.K, 26);
    EXPECT_EQ(b.T, 9);
}

TEST(ChooseBudget, EpsilonScalingAndProductBound) {
    ProblemInstance p = abs_instance(1, 0.2);
    p.M = 2.0;
    for (double eps : {1.0, 0.3, 0.01, 1e-4}) {
        const Budget a = choose_budget(p, 4.0, eps);
        const Budget b = choose_budget(p, 4.0, eps / 2.0);
        EXPECT_NEAR(static_cast<double>(b.K) / a.K, std::sqrt(2.0), 2.0 / a.K);
        EXPECT_GE(static_cast<double>(a.K) * a.T, 216.0 * p.M * p.M / (p.r * eps));
        EXPECT_GE(a.T, 1);
    }
}

TEST(ChooseBudget, RejectsBadInput) {
    ProblemInstance p = abs_instance(1, 1.0);
    EXPECT_THROW(choose_budget(p, 1.0, 0.0), std::invalid_argument);
    p.r = 0.0;
    EXPECT_THROW(choose_budget(p, 1.0, 0.1), std::invalid_argument);
}

TEST(Solver, ZeroInputFirstIteration) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    OptimalSolver solver(h.problem, h.network, 5, 3);
    solver.step();
    const SolverState& st = solver.state();
    EXPECT_EQ(st.z.norm(), 0.0);
    EXPECT_EQ(st.m.norm(), 0.0);
    EXPECT_EQ(st.z_bar.norm(), 0.0);
    EXPECT_EQ(st.comms, 1);
    EXPECT_EQ(st.subgrads, 3);
    EXPECT_EQ(st.gossip_applications, 2);
}

TEST(Solver, DeskRunReachesTolerance) {
    const ProblemInstance p = make_hard_sc(6, 5, 1.0 / (2.0 * std::sqrt(5.0)), 0.1);
    ProblemInstance q = p;
    q.M = 1.0;
    const TimeVaryingNetwork net = rotating_star(6);
    const Budget b = choose_budget(q, net.chi(), 1e-2);
    const SolveResult res = solve_strongly_convex(q, net, b.K, b.T);
    EXPECT_LE(primal_gap(q, res.x_o), 1e-2);
}

TEST(Solver, SingleNodeAbs) {
    const ProblemInstance p = abs_instance(1, 1.0);
    const SolveResult res = solve_strongly_convex(p, single_node(), 200, 50);
    EXPECT_LE(std::abs(res.x_o(0)), 1e-2);
}

TEST(Solver, CountersAndRecord) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 3.0);
    const SolveResult res = solve_strongly_convex(h.problem, h.network, 37, 11);
    EXPECT_EQ(res.state.comms, 37);
    EXPECT_EQ(res.state.subgrads, 37 * 11);
    ASSERT_EQ(res.record.rows.size(), 37u);
    for (std::size_t i = 0; i < res.record.rows.size(); ++i) {
        const RunRow& r = res.record.rows[i];
        EXPECT_EQ(r.k, static_cast<long>(i) + 1);
        EXPECT_EQ(r.comms, r.k);
        EXPECT_EQ(r.subgrads, r.k * 11);
        EXPECT_DOUBLE_EQ(r.model_time, r.k + r.k * 11.0);
        EXPECT_FALSE(std::isnan(r.primal_gap));
        EXPECT_GE(r.cert_margin, 0.0);
    }
    EXPECT_EQ(res.record.gossip_applications, 74);
}

TEST(Solver, ModelTimeUsesConfiguredCosts) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 3.0);
    SolveOptions o;
    o.tau_com = 10.0;
    o.tau_sub = 0.5;
    const SolveResult res = solve_strongly_convex(h.problem, h.network, 4, 6, o);
    EXPECT_DOUBLE_EQ(res.record.rows.back().model_time, 10.0 * 4 + 0.5 * 24);
}

TEST(Solver, Deterministic) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    const SolveResult a = solve_strongly_convex(h.problem, h.network, 60, 9);
    const SolveResult b = solve_strongly_convex(h.problem, h.network, 60, 9);
    EXPECT_TRUE((a.x_o.array() == b.x_o.array()).all());
    EXPECT_TRUE(a.record == b.record);
}

TEST(Solver, ConsensusComplementInvariant) {
    const HardInstance h = build_sc(2.0, 0.05, 1e-2, 9.0);
    const SolveResult res = solve_strongly_convex(h.problem, h.network, 150, 20);
    EXPECT_LE(res.state.max_consensus_z_violation, 1e-8);
    EXPECT_LE(res.state.max_inner_residual, 1e-12);
}

TEST(Solver, StoppedEarlyMatchesShorterRun) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    const SolveResult full = solve_strongly_convex(h.problem, h.network, 40, 7);
    const SolveResult part = solve_strongly_convex(h.problem, h.network, 25, 7);
    EXPECT_NEAR(full.record.rows[24].primal_gap, part.record.rows.back().primal_gap, 1e-12);
}

TEST(Solver, RejectsBadInput) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    EXPECT_THROW(OptimalSolver(h.problem, rotating_star(3), 5, 5), std::invalid_argument);
    const ProblemInstance p = abs_instance(1, 0.0);
    EXPECT_THROW(solve_strongly_convex(p, single_node(), 5, 5), std::invalid_argument);
    OptimalSolver s(h.problem, h.network, 1, 1);
    s.step();
    EXPECT_THROW(s.step(), std::logic_error);
}

TEST(Solver, NonFiniteIterateAborts) {
    ProblemInstance p = abs_instance(1, 1.0);
    p.oracles[0].subgradient = [](const Vector&) { return Vector::Constant(1, std::nan("")).eval(); };
    OptimalSolver s(p, single_node(), 10, 2);
    try {
        s.run();
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos);
    }
}

TEST(Certificate, ZeroProbeBoundedByTail) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    OptimalSolver s(h.problem, h.network, 300, 30);
    s.run();
    const Eigen::Index n = h.problem.n(), d = h.problem.d;
    const NodeStack z = NodeStack::Zero(n, d);
    const CertificateReport rep = duality_gap_certificate(s.state(), h.problem, s.schedule(), {{z, z, z}});
    EXPECT_TRUE(rep.ok) << rep.message;
    const double tail = 72.0 * n / (0.1 * 300 * 30);
    EXPECT_NEAR(rep.probes[0].bound, tail, 1e-12);
    EXPECT_LE(rep.probes[0].gap, tail);
}

TEST(Certificate, RandomAndSaddleProbesOnConvergedRun) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 3.0);
    OptimalSolver s(h.problem, h.network, 800, 200);
    s.run();
    std::mt19937_64 rng(12);
    const auto probes = make_probes(h.problem, s.schedule(), 20, rng);
    ASSERT_EQ(probes.size(), 22u);
    const CertificateReport rep = duality_gap_certificate(s.state(), h.problem, s.schedule(), probes);
    EXPECT_TRUE(rep.ok) << rep.message;
    EXPECT_GE(rep.worst_margin, 0.0);
}

TEST(Certificate, ProbeZIsProjected) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    OptimalSolver s(h.problem, h.network, 20, 5);
    s.run();
    const Eigen::Index n = h.problem.n(), d = h.problem.d;
    NodeStack zc = NodeStack::Constant(n, d, 5.0);
    const NodeStack zero = NodeStack::Zero(n, d);
    const auto a = duality_gap_certificate(s.state(), h.problem, s.schedule(), {{zero, zero, zc}});
    const auto b = duality_gap_certificate(s.state(), h.problem, s.schedule(), {{zero, zero, zero}});
    EXPECT_DOUBLE_EQ(a.probes[0].gap, b.probes[0].gap);
    EXPECT_DOUBLE_EQ(a.probes[0].bound, b.probes[0].bound);
}

TEST(Certificate, SaddleProbeIsStationary) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    const Schedule s = make_schedule(0.1, 6.0, 1, 1);
    const auto sp = saddle_point_probe(h.problem, s);
    ASSERT_TRUE(sp.has_value());
    EXPECT_LE(sp->z.colwise().sum().cwiseAbs().maxCoeff(), 1e-14);
    // y* + z* = -(r - r_x) w* = -(1/r_yz) w*
    EXPECT_LE((sp->y + sp->z + sp->x / s.r_yz).norm(), 1e-14);
}

TEST(Certificate, NeedsCompletedIteration) {
    const HardInstance h = build_sc(1.0, 0.1, 1e-2, 6.0);
    OptimalSolver s(h.problem, h.network, 2, 2);
    EXPECT_THROW(duality_gap_certificate(s.state(), h.problem, s.schedule(), {}), std::logic_error);
}

TEST(Convex, RegularizationParameter) {
    const ProblemInstance p = abs_instance(2, 0.0, 2.0);
    EXPECT_DOUBLE_EQ(regularize_for_convex(p, 0.1).r, 0.025);
}

TEST(Convex, AbsoluteValueWithinEpsilon) {
    const ProblemInstance p = abs_instance(3, 0.0);
    const ConvexSolveResult res = solve_convex(p, complete_graph(3), 0.1);
    EXPECT_LE(eval_p(p, res.x_o), 0.1);
    EXPECT_LE(res.record.rows.back().primal_gap, 0.1);
}

TEST(Convex, BudgetOrders) {
    const ProblemInstance p = abs_instance(3, 0.0);
    const TimeVaryingNetwork net = ring(3);
    const Budget a = choose_budget(regularize_for_convex(p, 0.1), net.chi(), 0.05);
    const Budget b = choose_budget(regularize_for_convex(p, 0.05), net.chi(), 0.025);
    EXPECT_NEAR(static_cast<double>(b.K) / a.K, 2.0, 0.05);
    EXPECT_NEAR(static_cast<double>(b.K * b.T) / (a.K * a.T), 4.0, 0.2);
}

TEST(Convex, RejectsBadInput) {
    const ProblemInstance p = abs_instance(1, 0.0);
    EXPECT_THROW(solve_convex(p, single_node(), 0.0), std::invalid_argument);
    EXPECT_THROW(solve_convex(abs_instance(1, 1.0), single_node(), 0.1), std::invalid_argument);
}
