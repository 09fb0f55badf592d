#include "decopt/hard_instance.hpp"
#include "decopt/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace decopt;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double t : v) x(i++) = t;
    return x;
}

ProblemInstance abs_instance(int n, double r) {
    ProblemInstance p;
    p.d = 1;
    p.r = r;
    p.M = 1.0;
    for (int i = 0; i < n; ++i) p.oracles.push_back(l1_distance_oracle(Vector::Zero(1)));
    return p;
}

SubgradientOracle scaled_sign_abs(double slope) {
    SubgradientOracle o;
    o.value = [](const Vector& x) { return std::abs(x(0)); };
    o.subgradient = [slope](const Vector& x) {
        Vector g(1);
        g(0) = x(0) > 0 ? slope : (x(0) < 0 ? -slope : 0.0);
        return g;
    };
    return o;
}

}  // namespace

TEST(EvalP, HardInstanceAtOrigin) {
    const ProblemInstance p = make_hard_sc(3, 3, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(eval_p(p, Vector::Zero(3)), 0.0);
}

TEST(EvalP, HardInstanceAtOptimum) {
    const ProblemInstance p = make_hard_sc(3, 3, 1.0, 1.0);
    EXPECT_NEAR(eval_p(p, Vector::Constant(3, 1.0 / 9.0)), -1.0 / 54.0, 1e-15);
    EXPECT_NEAR(*p.p_star, -1.0 / 54.0, 1e-15);
}

TEST(EvalP, AbsoluteValue) {
    const ProblemInstance p = abs_instance(4, 0.0);
    EXPECT_DOUBLE_EQ(eval_p(p, vec({2.0})), 2.0);
}

TEST(EvalP, RejectsWrongDimension) {
    const ProblemInstance p = make_hard_sc(3, 3, 1.0, 1.0);
    EXPECT_THROW(eval_p(p, Vector::Zero(2)), std::invalid_argument);
}

TEST(EvalF, ZeroForHardInstance) {
    const ProblemInstance p = make_hard_sc(6, 5, 0.3, 0.1);
    EXPECT_DOUBLE_EQ(eval_F(p, NodeStack::Zero(6, 5), 0.7), 0.0);
}

TEST(EvalF, HandEvaluation) {
    const ProblemInstance p = abs_instance(2, 0.0);
    NodeStack x(2, 1);
    x << 1.0, -3.0;
    EXPECT_DOUBLE_EQ(eval_F(p, x, 2.0), 14.0);
    EXPECT_DOUBLE_EQ(eval_F(p, x, 0.0), 4.0);
}

TEST(EvalF, RejectsWrongShape) {
    const ProblemInstance p = abs_instance(2, 0.0);
    EXPECT_THROW(eval_F(p, NodeStack::Zero(3, 1), 1.0), std::invalid_argument);
    EXPECT_THROW(eval_F(p, NodeStack::Zero(2, 2), 1.0), std::invalid_argument);
}

TEST(OracleValidity, AbsWithZeroAtKink) {
    const SubgradientOracle o = scaled_sign_abs(1.0);
    const CheckReport rep = check_oracle_validity(o, {{vec({0.0}), vec({1.0})}, {vec({0.0}), vec({-1.0})}}, 0.0);
    EXPECT_TRUE(rep.ok);
    EXPECT_DOUBLE_EQ(rep.worst_margin, 1.0);
    EXPECT_EQ(rep.checked, 2u);
}

TEST(OracleValidity, HardInstanceRandomPairs) {
    const ProblemInstance p = make_hard_sc(6, 7, 0.5, 0.2);
    std::mt19937_64 rng(11);
    const PointPairs pairs = random_pairs(7, 100, 1.0, rng);
    for (const auto& o : p.oracles) {
        const CheckReport rep = check_oracle_validity(o, pairs, 1e-9);
        EXPECT_TRUE(rep.ok) << rep.message;
        EXPECT_GE(rep.worst_margin, -1e-9);
    }
}

TEST(OracleValidity, OverscaledSlopeIsReported) {
    const SubgradientOracle o = scaled_sign_abs(2.0);
    const CheckReport rep = check_oracle_validity(o, {{vec({1.0}), vec({2.0})}, {vec({1.0}), vec({0.0})}}, 1e-9);
    EXPECT_FALSE(rep.ok);
    ASSERT_TRUE(rep.offending.has_value());
    EXPECT_DOUBLE_EQ(rep.offending->first(0), 1.0);
    EXPECT_DOUBLE_EQ(rep.offending->second(0), 2.0);
    EXPECT_FALSE(rep.message.empty());
}

TEST(Lipschitz, AbsWithUnitConstant) {
    std::mt19937_64 rng(3);
    EXPECT_TRUE(check_lipschitz(scaled_sign_abs(1.0), 1.0, random_pairs(1, 200, 5.0, rng), 1e-12).ok);
}

TEST(Lipschitz, AbsWithHalfConstantFails) {
    std::mt19937_64 rng(3);
    EXPECT_FALSE(check_lipschitz(scaled_sign_abs(1.0), 0.5, random_pairs(1, 200, 5.0, rng), 1e-12).ok);
}

TEST(Lipschitz, HardInstanceV1NodesAreMLipschitz) {
    for (int d : {3, 5, 9}) {
        const double M = 1.7;
        const ProblemInstance p = make_hard_sc(6, d, M / (2.0 * std::sqrt(static_cast<double>(d))), 0.1);
        std::mt19937_64 rng(static_cast<unsigned>(d));
        const PointPairs pairs = random_pairs(d, 300, 2.0, rng);
        for (std::size_t i = 0; i < p.oracles.size(); ++i) {
            const CheckReport rep = check_lipschitz(p.oracles[i], M, pairs, 1e-12);
            EXPECT_TRUE(rep.ok) << "d=" << d << " node " << i << ": " << rep.message;
        }
    }
}

TEST(Lipschitz, SubgradientNormIsChecked) {
    SubgradientOracle o = scaled_sign_abs(1.0);
    o.subgradient = [](const Vector&) { return vec({3.0}); };
    EXPECT_FALSE(check_lipschitz(o, 1.0, {{vec({0.0}), vec({0.0})}}, 1e-12).ok);
}

TEST(ProblemInstance, ValidateRejectsBadConstants) {
    ProblemInstance p = abs_instance(2, 0.0);
    EXPECT_NO_THROW(p.validate());
    p.M = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.M = 1.0;
    p.r = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.r = 0.0;
    p.R = 0.5;
    p.x_star = vec({1.0});
    EXPECT_THROW(p.validate(), std::invalid_argument);
    ProblemInstance empty;
    EXPECT_THROW(empty.validate(), std::invalid_argument);
}

TEST(ProblemInstance, PrimalGapNeedsOptimum) {
    const ProblemInstance p = abs_instance(2, 0.0);
    EXPECT_THROW(primal_gap(p, vec({0.0})), std::logic_error);
}

TEST(ProblemInstance, OptimumIsMinimalAtRandomPoints) {
    const ProblemInstance p = make_hard_sc(9, 5, 0.4, 0.3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        Vector x(5);
        for (int j = 0; j < 5; ++j) x(j) = *p.x_star->data() + g(rng) * std::pow(10.0, -(t % 5));
        EXPECT_GE(eval_p(p, x), *p.p_star - 1e-12);
    }
}

TEST(L1Oracle, ValidAndLipschitz) {
    const SubgradientOracle o = l1_distance_oracle(vec({0.5, -0.25, 1.0}), 0.3);
    std::mt19937_64 rng(8);
    const PointPairs pairs = random_pairs(3, 200, 2.0, rng);
    EXPECT_TRUE(check_oracle_validity(o, pairs, 1e-12).ok);
    EXPECT_TRUE(check_lipschitz(o, 0.3 * std::sqrt(3.0), pairs, 1e-12).ok);
    EXPECT_EQ(o.subgradient(vec({0.5, -0.25, 1.0})), Vector::Zero(3));
}
