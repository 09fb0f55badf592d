#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decopt {

using Vector = Eigen::VectorXd;

// Stacked per-node iterate: row i holds the local vector of node i.
using NodeStack = Eigen::MatrixXd;

// A convex function together with a fixed subgradient selection.
struct SubgradientOracle {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> subgradient;
};

struct ProblemInstance {
    std::string name;
    std::vector<SubgradientOracle> oracles;
    double r = 0.0;  // quadratic regularization
    double M = 1.0;  // Lipschitz constant of every local function
    double R = 1.0;  // bound on the solution norm
    Eigen::Index d = 1;
    std::optional<Vector> x_star;
    std::optional<double> p_star;
    // Per-node subgradients Delta_i in df_i(x*) with r x* + mean(Delta_i) = 0.
    // Only some instances can produce such a selection in closed form.
    std::function<NodeStack()> optimal_subgradients;

    Eigen::Index n() const { return static_cast<Eigen::Index>(oracles.size()); }

    void validate() const {
        if (oracles.empty()) throw std::invalid_argument("problem: need at least one node");
        if (d < 1) throw std::invalid_argument("problem: dimension must be >= 1");
        if (!(M > 0.0)) throw std::invalid_argument("problem: M must be > 0");
        if (!(R > 0.0)) throw std::invalid_argument("problem: R must be > 0");
        if (!(r >= 0.0)) throw std::invalid_argument("problem: r must be >= 0");
        if (x_star) {
            if (x_star->size() != d) throw std::invalid_argument("problem: x* has wrong dimension");
            if (x_star->norm() > R * (1.0 + 1e-12))
                throw std::invalid_argument("problem: ||x*|| exceeds R");
        }
    }
};

namespace detail {

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        std::ostringstream os;
        os << what << ": dimension mismatch (got " << got << ", expected " << want << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace detail

/// Global objective p(x) = (1/n) sum_i f_i(x) + (r/2)||x||^2.
inline double eval_p(const ProblemInstance& inst, const Vector& x) {
    detail::require_dim(x.size(), inst.d, "eval_p");
    double sum = 0.0;
    for (const auto& o : inst.oracles) sum += o.value(x);
    return sum / static_cast<double>(inst.n()) + 0.5 * inst.r * x.squaredNorm();
}

/// Primal gap p(x) - p(x*); requires a known optimal value.
inline double primal_gap(const ProblemInstance& inst, const Vector& x) {
    if (!inst.p_star) throw std::logic_error("primal_gap: optimal value unknown");
    return eval_p(inst, x) - *inst.p_star;
}

/// Stacked objective F(x) = sum_i f_i(x_i) + (r_x/2)||x||^2 over all n*d entries.
inline double eval_F(const ProblemInstance& inst, const NodeStack& x, double r_x) {
    detail::require_dim(x.rows(), inst.n(), "eval_F rows");
    detail::require_dim(x.cols(), inst.d, "eval_F cols");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < inst.n(); ++i) {
        sum += inst.oracles[static_cast<std::size_t>(i)].value(x.row(i).transpose());
    }
    return sum + 0.5 * r_x * x.squaredNorm();
}

/// Rows are the oracle subgradients at the corresponding rows of x.
inline NodeStack stacked_subgradient(const ProblemInstance& inst, const NodeStack& x) {
    NodeStack g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        g.row(i) = inst.oracles[static_cast<std::size_t>(i)].subgradient(x.row(i).transpose()).transpose();
    }
    return g;
}

struct CheckReport {
    bool ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::size_t checked = 0;
    std::optional<std::pair<Vector, Vector>> offending;
    std::string message;
};

using PointPairs = std::vector<std::pair<Vector, Vector>>;

/// Checks f(x') >= f(x) + <g(x), x' - x> - tol on every pair (x, x').
inline CheckReport check_oracle_validity(const SubgradientOracle& oracle, const PointPairs& pairs,
                                         double tol) {
    CheckReport rep;
    for (const auto& [x, xp] : pairs) {
        const double margin = oracle.value(xp) - oracle.value(x) - oracle.subgradient(x).dot(xp - x);
        ++rep.checked;
        if (margin < rep.worst_margin) rep.worst_margin = margin;
        if (margin < -tol && rep.ok) {
            rep.ok = false;
            rep.offending = std::make_pair(x, xp);
            std::ostringstream os;
            os << "subgradient inequality violated by " << -margin << " at x=" << x.transpose()
               << " x'=" << xp.transpose();
            rep.message = os.str();
        }
    }
    return rep;
}

/// Checks |f(x) - f(x')| <= M||x - x'|| + tol and ||g(x)|| <= M + tol.
/// worst_margin is the smallest slack seen over both inequalities.
inline CheckReport check_lipschitz(const SubgradientOracle& oracle, double M, const PointPairs& pairs,
                                   double tol) {
    CheckReport rep;
    auto fail = [&](const Vector& x, const Vector& xp, const std::string& what) {
        if (!rep.ok) return;
        rep.ok = false;
        rep.offending = std::make_pair(x, xp);
        rep.message = what;
    };
    for (const auto& [x, xp] : pairs) {
        ++rep.checked;
        const double slack = M * (x - xp).norm() - std::abs(oracle.value(x) - oracle.value(xp));
        rep.worst_margin = std::min(rep.worst_margin, slack);
        if (slack < -tol) fail(x, xp, "function value change exceeds M*||x-x'||");
        for (const Vector* p : {&x, &xp}) {
            const double gslack = M - oracle.subgradient(*p).norm();
            rep.worst_margin = std::min(rep.worst_margin, gslack);
            if (gslack < -tol) fail(x, xp, "subgradient norm exceeds M");
        }
    }
    return rep;
}

/// Uniform random pairs in the box [-half_width, half_width]^d.
inline PointPairs random_pairs(Eigen::Index d, std::size_t count, double half_width, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-half_width, half_width);
    PointPairs out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Vector a(d), b(d);
        for (Eigen::Index j = 0; j < d; ++j) a(j) = u(rng);
        for (Eigen::Index j = 0; j < d; ++j) b(j) = u(rng);
        out.emplace_back(std::move(a), std::move(b));
    }
    return out;
}

/// f(x) = weight * ||x - anchor||_1, with the sign subgradient (0 at kinks).
inline SubgradientOracle l1_distance_oracle(Vector anchor, double weight = 1.0) {
    SubgradientOracle o;
    o.value = [anchor, weight](const Vector& x) { return weight * (x - anchor).lpNorm<1>(); };
    o.subgradient = [anchor, weight](const Vector& x) {
        Vector g(x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double t = x(j) - anchor(j);
            g(j) = t > 0.0 ? weight : (t < 0.0 ? -weight : 0.0);
        }
        return g;
    };
    return o;
}

inline SubgradientOracle zero_oracle() {
    SubgradientOracle o;
    o.value = [](const Vector&) { return 0.0; };
    o.subgradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
    return o;
}

}  // namespace decopt
