#pragma once

#include "decopt/problem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decopt {

// Undirected edge between 0-indexed nodes.
using Edge = std::pair<int, int>;
using EdgeList = std::vector<Edge>;

/// Graph Laplacian scaled by 1/n. Off-pattern entries are exactly 0.0.
inline Eigen::MatrixXd normalized_laplacian(int n, const EdgeList& edges) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    const double s = 1.0 / n;
    for (const auto& [i, j] : edges) {
        if (i == j || i < 0 || j < 0 || i >= n || j >= n)
            throw std::invalid_argument("normalized_laplacian: bad edge");
        W(i, j) = -s;
        W(j, i) = -s;
    }
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        for (int j = 0; j < n; ++j) deg += (j != i && W(i, j) != 0.0) ? 1 : 0;
        W(i, i) = deg * s;
    }
    return W;
}

inline EdgeList star_edges(int n, int center) {
    EdgeList e;
    for (int i = 0; i < n; ++i)
        if (i != center) e.emplace_back(center, i);
    return e;
}

/// Star Laplacian / n with a 1-indexed center, as used by the lower-bound network.
inline Eigen::MatrixXd star_laplacian(int n, int center) {
    if (n < 2) throw std::invalid_argument("star_laplacian: need n >= 2");
    if (center < 1 || center > n) throw std::invalid_argument("star_laplacian: center out of range");
    return normalized_laplacian(n, star_edges(n, center - 1));
}

/// Center of the rotating star at round k: 2n/3 + 1 + (k mod n/3), 1-indexed.
inline int rotating_center(int n, long k) {
    if (n < 3 || n % 3 != 0) throw std::invalid_argument("rotating_center: n must be a positive multiple of 3");
    if (k < 0) throw std::invalid_argument("rotating_center: negative round");
    const int third = n / 3;
    return 2 * third + 1 + static_cast<int>(k % third);
}

/// A gossip sequence indexed by communication round. Immutable once built.
class TimeVaryingNetwork {
public:
    using TopologyFn = std::function<EdgeList(long)>;

    TimeVaryingNetwork(std::string name, int n, double chi, TopologyFn topology)
        : name_(std::move(name)), n_(n), chi_(chi), topology_(std::move(topology)) {
        if (n_ < 1) throw std::invalid_argument("network: n must be >= 1");
        if (!(chi_ >= 1.0)) throw std::invalid_argument("network: chi must be >= 1");
    }

    const std::string& name() const { return name_; }
    int n() const { return n_; }
    double chi() const { return chi_; }

    EdgeList topology(long k) const { return topology_(k); }
    Eigen::MatrixXd gossip(long k) const {
        if (n_ == 1) return Eigen::MatrixXd::Zero(1, 1);
        return normalized_laplacian(n_, topology_(k));
    }

private:
    std::string name_;
    int n_;
    double chi_;
    TopologyFn topology_;
};

/// Rotating star of the lower-bound construction; chi = n.
inline TimeVaryingNetwork rotating_star(int n) {
    if (n < 3 || n % 3 != 0) throw std::invalid_argument("rotating_star: n must be a positive multiple of 3");
    return TimeVaryingNetwork("rotating_star", n, static_cast<double>(n),
                              [n](long k) { return star_edges(n, rotating_center(n, k) - 1); });
}

/// Complete graph; W acts as the identity minus the mean, chi = 1.
inline TimeVaryingNetwork complete_graph(int n) {
    EdgeList e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return TimeVaryingNetwork("complete", n, 1.0, [e](long) { return e; });
}

/// Fixed ring. chi = 1 / lambda_min^+(L/n) = n / (2 - 2 cos(2 pi / n)).
inline TimeVaryingNetwork ring(int n) {
    if (n < 1) throw std::invalid_argument("ring: n must be >= 1");
    EdgeList e;
    if (n == 2) e.emplace_back(0, 1);
    if (n >= 3)
        for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    double chi = 1.0;
    if (n >= 2) {
        const double pi = std::acos(-1.0);
        chi = n / (2.0 - 2.0 * std::cos(2.0 * pi / n));
        chi = std::max(chi, 1.0);
    }
    return TimeVaryingNetwork("ring", n, chi, [e](long) { return e; });
}

/// Single node: the only gossip matrix is 0 and chi = 1.
inline TimeVaryingNetwork single_node() {
    return TimeVaryingNetwork("single", 1, 1.0, [](long) { return EdgeList{}; });
}

namespace detail {

inline bool connected(int n, const EdgeList& edges) {
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    int comps = n;
    for (const auto& [i, j] : edges) {
        const int a = find(i), b = find(j);
        if (a != b) {
            parent[static_cast<std::size_t>(a)] = b;
            --comps;
        }
    }
    return comps == 1;
}

inline EdgeList erdos_renyi_round(int n, double p, std::uint64_t seed, long slot) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(slot), 0x9e3779b9u};
    std::mt19937_64 rng(seq);
    std::bernoulli_distribution coin(p);
    for (;;) {
        EdgeList e;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (coin(rng)) e.emplace_back(i, j);
        if (n == 1 || connected(n, e)) return e;
    }
}

// Orthonormal basis of the mean-zero subspace of R^n, as columns.
inline Eigen::MatrixXd mean_zero_basis(int n) {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    Eigen::MatrixXd Q = qr.householderQ();
    return Q.rightCols(n - 1);
}

inline double smallest_positive_eigenvalue_bound(const Eigen::MatrixXd& W, double& lambda_max) {
    const Eigen::MatrixXd U = mean_zero_basis(static_cast<int>(W.rows()));
    const Eigen::MatrixXd B = U.transpose() * W * U;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
    lambda_max = es.eigenvalues().maxCoeff();
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Random connected G(n, p) graph per round, cycling over `period` distinct draws.
/// chi is the worst 1/lambda_min^+ over the period.
inline TimeVaryingNetwork erdos_renyi(int n, double p, std::uint64_t seed, long period = 16) {
    if (n < 1) throw std::invalid_argument("erdos_renyi: n must be >= 1");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi: p must be in (0,1]");
    if (period < 1) throw std::invalid_argument("erdos_renyi: period must be >= 1");
    auto rounds = std::make_shared<std::vector<EdgeList>>();
    double chi = 1.0;
    for (long s = 0; s < period; ++s) {
        rounds->push_back(detail::erdos_renyi_round(n, p, seed, s));
        if (n >= 2) {
            double lmax = 0.0;
            const double lmin = detail::smallest_positive_eigenvalue_bound(normalized_laplacian(n, rounds->back()), lmax);
            chi = std::max(chi, 1.0 / lmin);
        }
    }
    return TimeVaryingNetwork("erdos_renyi", n, chi,
                              [rounds, period](long k) { return (*rounds)[static_cast<std::size_t>(k % period)]; });
}

struct ChiCertificate {
    bool ok = true;
    double chi = 1.0;        // certified contraction constant, max over rounds
    double chi_tight = 1.0;  // 1/(1 - rho), rho = sigma_max^2 of (W - I) on mean-zero vectors
    long offending_round = -1;
    std::string message;
};

/// Certifies ||W_k x - x||^2 <= (1 - 1/chi)||x||^2 on mean-zero x for rounds [0, rounds).
///
/// Symmetric W with spectrum in [0, 1] on the mean-zero subspace is certified by
/// 1/lambda_min^+ since (1 - l)^2 <= 1 - l there; the sharper singular-value constant is
/// reported separately as chi_tight. Other matrices are certified by chi_tight. `trials` random mean-zero vectors are then checked
/// against the declared chi directly.
inline ChiCertificate certify_chi(const TimeVaryingNetwork& net, long rounds, int trials,
                                  std::uint64_t seed = 7, double tol = 1e-8) {
    if (trials < 1) throw std::invalid_argument("certify_chi: trials must be >= 1");
    ChiCertificate cert;
    const int n = net.n();
    if (n == 1) return cert;
    const Eigen::MatrixXd U = detail::mean_zero_basis(n);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    auto fail = [&](long k, const std::string& msg) {
        if (!cert.ok) return;
        cert.ok = false;
        cert.offending_round = k;
        cert.message = msg;
    };
    for (long k = 0; k < rounds; ++k) {
        const Eigen::MatrixXd W = net.gossip(k);
        if ((W * Eigen::VectorXd::Ones(n)).norm() > 1e-12 || (W.transpose() * Eigen::VectorXd::Ones(n)).norm() > 1e-12)
            fail(k, "gossip matrix does not annihilate the ones vector");

        Eigen::JacobiSVD<Eigen::MatrixXd> svd((W - I) * U);
        const double rho = svd.singularValues()(0) * svd.singularValues()(0);
        const double chi_tight = rho < 1.0 ? 1.0 / (1.0 - rho) : std::numeric_limits<double>::infinity();
        cert.chi_tight = std::max(cert.chi_tight, chi_tight);

        double chi_k = chi_tight;
        if ((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0) {
            double lmax = 0.0;
            const double lmin = detail::smallest_positive_eigenvalue_bound(W, lmax);
            if (lmin > 0.0 && lmax <= 1.0 + 1e-12) chi_k = 1.0 / lmin;
        }
        cert.chi = std::max(cert.chi, chi_k);
        if (!(chi_k <= net.chi() + tol)) {
            std::ostringstream os;
            os << "round " << k << ": certified chi " << chi_k << " exceeds declared " << net.chi();
            fail(k, os.str());
        }

        for (int t = 0; t < trials; ++t) {
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i) x(i) = g(rng);
            x.array() -= x.mean();
            const double lhs = (W * x - x).squaredNorm();
            const double rhs = (1.0 - 1.0 / net.chi()) * x.squaredNorm();
            if (lhs > rhs + 1e-10 * std::max(1.0, x.squaredNorm())) {
                std::ostringstream os;
                os << "round " << k << ": contraction violated on a sampled vector (" << lhs << " > " << rhs << ")";
                fail(k, os.str());
            }
        }
    }
    return cert;
}

/// Orthogonal projection onto the consensus complement: subtract the node mean per coordinate.
inline NodeStack project_consensus_complement(const NodeStack& x) {
    return x.rowwise() - x.colwise().mean();
}

/// Applies (W kron I_d) to a node stack without forming the Kronecker product.
inline NodeStack apply_gossip(const Eigen::MatrixXd& W, const NodeStack& x) {
    return W * x;
}

}  // namespace decopt
