#pragma once

#include "decopt/hard_instance.hpp"
#include "decopt/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace decopt {

// Black-box memory model on the hard instance. Node i's memory is contained in
// K_{j_i} = span(e_1, ..., e_{j_i}), so a single index per node describes it.
struct SpanState {
    int n = 0;
    int d = 0;
    std::vector<int> span;  // j_i per node, 0-indexed nodes
    long rounds = 0;        // completed communication rounds
    long subgradient_steps = 0;
    double tau_com = 1.0;
    double tau_sub = 1.0;

    double clock() const { return tau_com * static_cast<double>(rounds) + tau_sub * static_cast<double>(subgradient_steps); }
    int max_span() const { return *std::max_element(span.begin(), span.end()); }
};

inline SpanState make_span_state(int n, int d, double tau_com = 1.0, double tau_sub = 1.0) {
    if (n < 3 || n % 3 != 0) throw std::invalid_argument("span state: n must be a positive multiple of 3");
    if (d < 3 || d % 2 == 0) throw std::invalid_argument("span state: d must be odd and >= 3");
    if (!(tau_com > 0.0) || !(tau_sub > 0.0)) throw std::invalid_argument("span state: times must be > 0");
    SpanState s;
    s.n = n;
    s.d = d;
    s.span.assign(static_cast<std::size_t>(n), 0);
    s.tau_com = tau_com;
    s.tau_sub = tau_sub;
    return s;
}

/// Largest span reachable by one local subgradient step from K_j.
/// V1 terms couple (2i-1, 2i) and pull on e_1; V2 terms couple (2i, 2i+1); V3 is zero.
inline int subgradient_transition(NodeClass cls, int j, int d) {
    if (j < 0 || j > d) throw std::invalid_argument("subgradient_transition: j out of range");
    switch (cls) {
    case NodeClass::V1:
        if (j == 0) return 1;
        return (j % 2 == 1) ? std::min(j + 1, d) : j;
    case NodeClass::V2:
        if (j >= 2 && j % 2 == 0) return std::min(j + 1, d);
        return j;
    case NodeClass::V3:
        return j;
    }
    return j;
}

/// Applies subgradient steps at every node until no span grows.
inline void saturate_local(SpanState& s) {
    for (int i = 0; i < s.n; ++i) {
        int& j = s.span[static_cast<std::size_t>(i)];
        for (;;) {
            const int next = subgradient_transition(node_class(s.n, i), j, s.d);
            if (next == j) break;
            j = next;
            ++s.subgradient_steps;
        }
    }
}

/// One exchange over the round-k star (k = completed rounds), centered per rotating_center.
inline SpanState communication_round(const SpanState& s) {
    SpanState out = s;
    const int c = rotating_center(s.n, s.rounds) - 1;
    const int center_prev = s.span[static_cast<std::size_t>(c)];
    out.span[static_cast<std::size_t>(c)] = s.max_span();
    for (int i = 0; i < s.n; ++i)
        if (i != c) out.span[static_cast<std::size_t>(i)] = std::max(s.span[static_cast<std::size_t>(i)], center_prev);
    ++out.rounds;
    return out;
}

/// Upper bounds on every node's span after k rounds (p = floor(3k/n), q = k mod n/3).
inline std::vector<int> span_envelope(int n, long k) {
    const long p = (3 * k) / n;
    const long q = k % (n / 3);
    std::vector<int> env(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int one_based = i + 1;
        const NodeClass cls = node_class(n, i);
        const bool high = cls == NodeClass::V1 || (cls == NodeClass::V3 && one_based <= 2 * n / 3 + q + 1);
        env[static_cast<std::size_t>(i)] = static_cast<int>(high ? 2 * p + 2 : 2 * p + 1);
    }
    return env;
}

struct LowerBoundWitness {
    int n = 0;
    int d = 0;
    long rounds = 0;       // communication rounds before some node first reaches K_d
    long floor_rounds = 0; // n(d-1)/6
    bool envelope_ok = true;
    long envelope_violation_round = -1;
    std::vector<std::vector<int>> trace;  // span after saturation, per completed round count

    bool pass() const { return envelope_ok && rounds >= floor_rounds; }
};

/// Greedy simulation: unlimited subgradient steps between rounds, then one exchange.
/// Returns the number of rounds after which some node first spans the last coordinate.
inline LowerBoundWitness rounds_to_reach_last_coordinate(int n, int d, double tau_com = 1.0, double tau_sub = 1.0) {
    SpanState s = make_span_state(n, d, tau_com, tau_sub);
    LowerBoundWitness w;
    w.n = n;
    w.d = d;
    w.floor_rounds = static_cast<long>(n) * (d - 1) / 6;
    for (;;) {
        saturate_local(s);
        w.trace.push_back(s.span);
        if (s.rounds < w.floor_rounds) {
            const auto env = span_envelope(n, s.rounds);
            for (int i = 0; i < n; ++i) {
                if (s.span[static_cast<std::size_t>(i)] > env[static_cast<std::size_t>(i)] && w.envelope_ok) {
                    w.envelope_ok = false;
                    w.envelope_violation_round = s.rounds;
                }
            }
        }
        if (s.max_span() >= d) break;
        s = communication_round(s);
    }
    w.rounds = s.rounds;
    return w;
}

}  // namespace decopt
