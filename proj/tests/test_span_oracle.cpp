#include "decopt/span_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace decopt;

namespace {

// Largest span index touched by the oracle at points supported on K_j.
int brute_force_span(const ProblemInstance& p, int node, int j, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    int best = j;
    for (int t = 0; t < 50; ++t) {
        Vector x = Vector::Zero(p.d);
        for (int c = 0; c < j; ++c) x(c) = g(rng);
        const Vector s = p.oracles[static_cast<std::size_t>(node)].subgradient(x);
        for (Eigen::Index c = p.d - 1; c >= 0; --c)
            if (s(c) != 0.0) {
                best = std::max(best, static_cast<int>(c) + 1);
                break;
            }
    }
    return best;
}

}  // namespace

TEST(SubgradientTransition, Examples) {
    EXPECT_EQ(subgradient_transition(NodeClass::V1, 0, 5), 1);
    EXPECT_EQ(subgradient_transition(NodeClass::V1, 2, 5), 2);
    EXPECT_EQ(subgradient_transition(NodeClass::V1, 1, 5), 2);
    EXPECT_EQ(subgradient_transition(NodeClass::V2, 2, 5), 3);
    EXPECT_EQ(subgradient_transition(NodeClass::V2, 0, 5), 0);
    EXPECT_EQ(subgradient_transition(NodeClass::V2, 3, 5), 3);
    EXPECT_EQ(subgradient_transition(NodeClass::V3, 4, 5), 4);
    EXPECT_EQ(subgradient_transition(NodeClass::V1, 5, 5), 5);
    EXPECT_THROW(subgradient_transition(NodeClass::V1, 6, 5), std::invalid_argument);
}

TEST(SubgradientTransition, MatchesOracleBruteForce) {
    const ProblemInstance p = make_hard_sc(3, 7, 1.0, 1.0);
    std::mt19937_64 rng(1);
    for (int node = 0; node < 3; ++node)
        for (int j = 0; j <= 7; ++j)
            EXPECT_EQ(subgradient_transition(node_class(3, node), j, 7), brute_force_span(p, node, j, rng))
                << "node " << node << " j " << j;
}

TEST(CommunicationRound, EmptySpansStayEmpty) {
    SpanState s = make_span_state(6, 5);
    const SpanState t = communication_round(s);
    for (int j : t.span) EXPECT_EQ(j, 0);
    EXPECT_EQ(t.rounds, 1);
}

TEST(CommunicationRound, CenterCollectsAndBroadcastsPrevious) {
    SpanState s = make_span_state(6, 5);
    s.span = {2, 0, 0, 0, 1, 0};  // center of round 0 is node 5 (index 4)
    const SpanState t = communication_round(s);
    EXPECT_EQ(t.span, (std::vector<int>{2, 1, 1, 1, 2, 1}));
}

TEST(CommunicationRound, CenterRotates) {
    SpanState s = make_span_state(6, 5);
    s.rounds = 1;  // center node 6 (index 5)
    s.span = {3, 0, 0, 0, 0, 2};
    const SpanState t = communication_round(s);
    EXPECT_EQ(t.span, (std::vector<int>{3, 2, 2, 2, 2, 3}));
}

TEST(SpanState, Preconditions) {
    EXPECT_THROW(make_span_state(4, 5), std::invalid_argument);
    EXPECT_THROW(make_span_state(6, 4), std::invalid_argument);
    EXPECT_THROW(make_span_state(6, 5, 0.0, 1.0), std::invalid_argument);
}

TEST(SpanState, ClockCountsBothEvents) {
    SpanState s = make_span_state(3, 3, 2.0, 0.25);
    saturate_local(s);
    s = communication_round(s);
    EXPECT_DOUBLE_EQ(s.clock(), 2.0 * s.rounds + 0.25 * s.subgradient_steps);
}

TEST(LowerBound, ThreeByThreeExact) {
    const LowerBoundWitness w = rounds_to_reach_last_coordinate(3, 3);
    EXPECT_EQ(w.floor_rounds, 1);
    EXPECT_EQ(w.rounds, 2);
    EXPECT_TRUE(w.pass());
}

TEST(LowerBound, SixByFive) {
    const LowerBoundWitness w = rounds_to_reach_last_coordinate(6, 5);
    EXPECT_EQ(w.floor_rounds, 4);
    EXPECT_GE(w.rounds, 4);
    EXPECT_EQ(w.rounds, 9);
    EXPECT_TRUE(w.envelope_ok);
}

TEST(LowerBound, SpansMonotoneAndBounded) {
    for (auto [n, d] : {std::pair{3, 3}, {6, 5}, {9, 7}, {12, 9}, {15, 11}}) {
        const LowerBoundWitness w = rounds_to_reach_last_coordinate(n, d);
        EXPECT_TRUE(w.pass()) << n << "x" << d;
        for (std::size_t k = 1; k < w.trace.size(); ++k)
            for (int i = 0; i < n; ++i) {
                EXPECT_GE(w.trace[k][static_cast<std::size_t>(i)], w.trace[k - 1][static_cast<std::size_t>(i)]);
                EXPECT_LE(w.trace[k][static_cast<std::size_t>(i)], d);
            }
        for (long k = 0; k < w.floor_rounds && k < static_cast<long>(w.trace.size()); ++k)
            for (int j : w.trace[static_cast<std::size_t>(k)]) EXPECT_LE(j, d - 1);
    }
}

TEST(LowerBound, EnvelopeFormula) {
    const auto env = span_envelope(6, 0);
    EXPECT_EQ(env, (std::vector<int>{2, 2, 1, 1, 2, 1}));
    const auto env3 = span_envelope(6, 3);  // p = 1, q = 1
    EXPECT_EQ(env3, (std::vector<int>{4, 4, 3, 3, 4, 4}));
}
