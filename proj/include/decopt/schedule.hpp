#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace decopt {

// Step sizes and mixing weights of one outer iteration.
struct IterationParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double sigma = 0.0;
    double tau_x = 0.0;
    double eta_x = 0.0;
    double eta_y = 0.0;
    double eta_z = 0.0;
    double theta_z = 0.0;
};

/// Parameter schedule of the optimal primal-dual method for given (r, chi, K, T).
struct Schedule {
    double r = 0.0;
    double chi = 1.0;
    long K = 0;
    long T = 0;

    // base constants; r_x + 1/r_yz = r
    double r_x = 0.0;
    double r_yz = 0.0;
    double tau_x = 0.0;
    double eta_y = 0.0;
    double eta_z = 0.0;

    std::vector<IterationParams> steps;  // k = 0..K-1
    std::vector<double> lambda;          // index k = 1..K; lambda[0] unused
    double alpha_K = 0.0;
    double eta_z_K = 0.0;

    static double alpha_at(long k) { return 3.0 / static_cast<double>(k + 3); }

    const IterationParams& at(long k) const { return steps.at(static_cast<std::size_t>(k)); }

    /// eta_z^k for k in [0, K]; k = K is needed by the last error-feedback update.
    double eta_z_at(long k) const { return k == K ? eta_z_K : at(k).eta_z; }

    /// Averaging weight of xbar^k if the run were stopped after `last` iterations.
    /// With last == K this is exactly lambda[k].
    static double truncated_lambda(long k, long last) {
        const double a_prev = alpha_at(k - 1);
        if (k == last) return 1.0 / (a_prev * a_prev);
        const double a = alpha_at(k);
        return 1.0 / (a_prev * a_prev) + 1.0 / a - 1.0 / (a * a);
    }
};

inline Schedule make_schedule(double r, double chi, long K, long T) {
    if (!(r > 0.0)) throw std::invalid_argument("make_schedule: r must be > 0 (use solve_convex for r = 0)");
    if (!(chi >= 1.0)) throw std::invalid_argument("make_schedule: chi must be >= 1");
    if (K < 1 || T < 1) throw std::invalid_argument("make_schedule: K and T must be >= 1");

    Schedule s;
    s.r = r;
    s.chi = chi;
    s.K = K;
    s.T = T;
    s.r_x = 2.0 * r / 3.0;
    s.r_yz = 3.0 / r;
    s.tau_x = 0.5 * s.r_x;
    s.eta_y = 1.0 / (4.0 * s.r_yz);
    s.eta_z = 1.0 / (10.0 * s.r_yz * chi * chi);

    s.steps.resize(static_cast<std::size_t>(K));
    for (long k = 0; k < K; ++k) {
        IterationParams& p = s.steps[static_cast<std::size_t>(k)];
        p.alpha = Schedule::alpha_at(k);
        p.gamma = static_cast<double>(k + 2) / static_cast<double>(k + 3);
        p.beta = s.r_x;
        p.tau_x = s.tau_x / p.alpha;
        p.eta_y = s.eta_y / p.alpha;
        p.eta_z = s.eta_z / p.alpha;
        p.sigma = p.tau_x / (2.0 * p.tau_x + p.beta);
        p.eta_x = 1.0 / (p.tau_x * static_cast<double>(T));
        p.theta_z = 1.0 / (2.0 * s.r_yz);
    }
    s.alpha_K = Schedule::alpha_at(K);
    s.eta_z_K = s.eta_z / s.alpha_K;

    s.lambda.assign(static_cast<std::size_t>(K + 1), 0.0);
    for (long k = 1; k <= K; ++k) s.lambda[static_cast<std::size_t>(k)] = Schedule::truncated_lambda(k, K);
    return s;
}

/// Relative violation of the schedule invariants; empty string when all hold.
inline std::string check_schedule(const Schedule& s, double tol = 1e-12) {
    std::ostringstream os;
    if (std::abs(s.r_x + 1.0 / s.r_yz - s.r) > tol * std::max(1.0, s.r)) os << "r_x + 1/r_yz != r; ";
    for (long k = 0; k < s.K; ++k) {
        const auto& p = s.at(k);
        const double a = 3.0 / static_cast<double>(k + 3);
        if (std::abs(p.alpha - a) > tol) os << "alpha_" << k << "; ";
        if (std::abs(p.gamma - static_cast<double>(k + 2) / (k + 3)) > tol) os << "gamma_" << k << "; ";
        if (std::abs(p.tau_x * p.alpha - s.tau_x) > tol * s.tau_x) os << "tau_x^" << k << "; ";
        if (std::abs(p.eta_y * p.alpha - s.eta_y) > tol * s.eta_y) os << "eta_y^" << k << "; ";
        if (std::abs(p.eta_z * p.alpha - s.eta_z) > tol * s.eta_z) os << "eta_z^" << k << "; ";
    }
    for (long k = 1; k <= s.K; ++k)
        if (!(s.lambda[static_cast<std::size_t>(k)] >= 0.0)) os << "lambda_" << k << " < 0; ";
    return os.str();
}

}  // namespace decopt
