#pragma once

#include "decopt/network.hpp"
#include "decopt/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace decopt {

// Partition of the nodes of a hard instance into thirds: [1, n/3], (n/3, 2n/3], (2n/3, n].
enum class NodeClass { V1, V2, V3 };

inline NodeClass node_class(int n, int node /* 0-indexed */) {
    if (node < n / 3) return NodeClass::V1;
    if (node < 2 * n / 3) return NodeClass::V2;
    return NodeClass::V3;
}

/// Canonical subgradient of h_j(x) = |x_{j+1} - x_j| (1-indexed j); exact ties give 0.
inline Vector subgrad_h(int j, const Vector& x) {
    const Eigen::Index d = x.size();
    if (j < 1 || j > d - 1) throw std::invalid_argument("subgrad_h: j out of range");
    Vector g = Vector::Zero(d);
    const double lo = x(j - 1), hi = x(j);
    if (hi > lo) {
        g(j) = 1.0;
        g(j - 1) = -1.0;
    } else if (hi < lo) {
        g(j - 1) = 1.0;
        g(j) = -1.0;
    }
    return g;
}

inline double h_value(int j, const Vector& x) { return std::abs(x(j) - x(j - 1)); }

/// Coordinate-wise Huber function with width delta.
inline double huber(double delta, const Vector& x) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double t = std::abs(x(j));
        s += t <= delta ? 0.5 * t * t : delta * t - 0.5 * delta * delta;
    }
    return s;
}

inline Vector huber_grad(double delta, const Vector& x) {
    return x.cwiseMax(-delta).cwiseMin(delta);
}

namespace detail {

// Piecewise-linear part of the hard local functions: chain terms of one parity plus the
// linear pull on e_1 for V1.
inline SubgradientOracle chain_oracle(NodeClass cls, int d, double a) {
    SubgradientOracle o;
    if (cls == NodeClass::V3) return zero_oracle();
    const int first = cls == NodeClass::V1 ? 1 : 2;
    const bool pull = cls == NodeClass::V1;
    o.value = [=](const Vector& x) {
        double s = 0.0;
        for (int j = first; j <= d - 1; j += 2) s += h_value(j, x);
        s *= a;
        if (pull) s -= a * x(0);
        return s;
    };
    o.subgradient = [=](const Vector& x) {
        Vector g = Vector::Zero(d);
        for (int j = first; j <= d - 1; j += 2) g += subgrad_h(j, x);
        g *= a;
        if (pull) g(0) -= a;
        return g;
    };
    return o;
}

// Subgradient selection at x* = c 1_d: every chain term sits at a kink, and choosing the
// multiplier (j/d - 1) on h_j makes the node average equal to -(a/(3d)) 1_d.
inline NodeStack chain_optimal_subgradients(int n, int d, double a) {
    NodeStack delta = NodeStack::Zero(n, d);
    for (int i = 0; i < n; ++i) {
        const NodeClass cls = node_class(n, i);
        if (cls == NodeClass::V3) continue;
        const int first = cls == NodeClass::V1 ? 1 : 2;
        for (int j = first; j <= d - 1; j += 2) {
            const double s = static_cast<double>(j) / d - 1.0;
            delta(i, j) += a * s;
            delta(i, j - 1) -= a * s;
        }
        if (cls == NodeClass::V1) delta(i, 0) -= a;
    }
    return delta;
}

inline void check_hard_shape(int n, int d) {
    if (n < 3 || n % 3 != 0) throw std::invalid_argument("hard instance: n must be a positive multiple of 3");
    if (d < 3 || d % 2 == 0) throw std::invalid_argument("hard instance: d must be odd and >= 3");
}

}  // namespace detail

/// Strongly convex hard instance with explicit (n, d, a, r).
/// p(x) = (a/3) sum_j h_j(x) - (a/3) x_1 + (r/2)||x||^2, minimized at (a/(3rd)) 1_d.
inline ProblemInstance make_hard_sc(int n, int d, double a, double r) {
    detail::check_hard_shape(n, d);
    if (!(a > 0.0) || !(r > 0.0)) throw std::invalid_argument("hard instance: a and r must be > 0");
    ProblemInstance inst;
    inst.name = "hard_sc";
    inst.d = d;
    inst.r = r;
    inst.M = 2.0 * a * std::sqrt(static_cast<double>(d));
    for (int i = 0; i < n; ++i) inst.oracles.push_back(detail::chain_oracle(node_class(n, i), d, a));
    inst.x_star = Vector::Constant(d, a / (3.0 * r * d));
    inst.p_star = -a * a / (18.0 * r * d);
    inst.R = inst.x_star->norm();
    inst.optimal_subgradients = [n, d, a] { return detail::chain_optimal_subgradients(n, d, a); };
    return inst;
}

struct HardInstance {
    ProblemInstance problem;
    TimeVaryingNetwork network;
    double a = 0.0;
    double gap_floor = 0.0;  // p(x) - p(x*) lower bound for x with zero last coordinate
};

/// Strongly convex lower-bound instance for (M, r, eps, chi) on the rotating star.
inline HardInstance build_sc(double M, double r, double epsilon, double chi) {
    if (!(M > 0.0) || !(r > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("build_sc: M, r, eps must be > 0");
    if (!(chi >= 3.0)) throw std::invalid_argument("build_sc: requires chi >= 3");
    if (!(epsilon <= M * M / (576.0 * r))) {
        std::ostringstream os;
        os << "build_sc: requires eps <= M^2/(576 r) = " << M * M / (576.0 * r);
        throw std::invalid_argument(os.str());
    }
    const int n = 3 * static_cast<int>(std::floor(chi / 3.0));
    const int d = 2 * static_cast<int>(std::floor(M / (12.0 * std::sqrt(r * epsilon)))) - 1;
    if (d < 3) throw std::invalid_argument("build_sc: dimension rule gives d < 3");
    const double a = M / (2.0 * std::sqrt(static_cast<double>(d)));
    ProblemInstance p = make_hard_sc(n, d, a, r);
    p.M = M;
    return {std::move(p), rotating_star(n), a, a * a / (18.0 * r * d)};
}

/// Convex (r = 0) hard instance with explicit (n, d, a, c): every node adds c * h_delta,
/// delta = a/(3cd), so the average matches the displayed objective with weight c.
inline ProblemInstance make_hard_cvx(int n, int d, double a, double c) {
    detail::check_hard_shape(n, d);
    if (!(a > 0.0) || !(c > 0.0)) throw std::invalid_argument("hard instance: a and c must be > 0");
    const double delta = a / (3.0 * c * d);
    ProblemInstance inst;
    inst.name = "hard_cvx";
    inst.d = d;
    inst.r = 0.0;
    const double sd = std::sqrt(static_cast<double>(d));
    inst.M = 2.0 * a * sd + c * delta * sd;
    for (int i = 0; i < n; ++i) {
        SubgradientOracle chain = detail::chain_oracle(node_class(n, i), d, a);
        SubgradientOracle o;
        o.value = [chain, c, delta](const Vector& x) { return chain.value(x) + c * huber(delta, x); };
        o.subgradient = [chain, c, delta](const Vector& x) {
            return (chain.subgradient(x) + c * huber_grad(delta, x)).eval();
        };
        inst.oracles.push_back(std::move(o));
    }
    inst.x_star = Vector::Constant(d, delta);
    inst.p_star = -a * a / (18.0 * c * d);
    inst.R = inst.x_star->norm();
    inst.optimal_subgradients = [n, d, a, c, delta] {
        NodeStack g = detail::chain_optimal_subgradients(n, d, a);
        g.array() += c * delta;
        return g;
    };
    return inst;
}

struct HardInstanceCvx {
    ProblemInstance problem;
    TimeVaryingNetwork network;
    double a = 0.0;
    double c = 0.0;
    double delta = 0.0;
    double gap_floor = 0.0;
};

/// Convex lower-bound instance for (M, R, eps, chi): a = M/(3 sqrt d), c = M/(9 R d).
inline HardInstanceCvx build_cvx(double M, double R, double epsilon, double chi) {
    if (!(M > 0.0) || !(R > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("build_cvx: M, R, eps must be > 0");
    if (!(chi >= 3.0)) throw std::invalid_argument("build_cvx: requires chi >= 3");
    if (!(epsilon <= M * R / 72.0)) {
        std::ostringstream os;
        os << "build_cvx: requires eps <= M R / 72 = " << M * R / 72.0;
        throw std::invalid_argument(os.str());
    }
    const int n = 3 * static_cast<int>(std::floor(chi / 3.0));
    const int d = 2 * static_cast<int>(std::floor(M * R / (36.0 * epsilon))) - 1;
    if (d < 3) throw std::invalid_argument("build_cvx: dimension rule gives d < 3");
    const double sd = std::sqrt(static_cast<double>(d));
    const double a = M / (3.0 * sd);
    const double c = M / (9.0 * R * d);
    ProblemInstance p = make_hard_cvx(n, d, a, c);
    p.M = M;
    p.R = std::max(R, p.x_star->norm());
    const double delta = a / (3.0 * c * d);
    return {std::move(p), rotating_star(n), a, c, delta, a * a / (18.0 * c * d)};
}

}  // namespace decopt
