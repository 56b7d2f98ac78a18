#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the closed forms or the chain assembly it is used to check.

#include "ehcr/harvest.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace ehcr::oracle {

/// Pr{X/Y <= z, Y >= a} by nested adaptive Gauss-Kronrod quadrature of the
/// joint exponential density over {a <= y < inf, 0 <= x <= z y}.
inline double ratio_cdf_quadrature(double z, double lambda_x, double lambda_y, double a) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double tol = 1e-13;
    auto inner = [&](double y) {
        if (z == 0.0) return 0.0;
        auto density_x = [&](double x) { return lambda_x * std::exp(-lambda_x * x); };
        return gauss_kronrod<double, 31>::integrate(density_x, 0.0, z * y, 15, tol);
    };
    auto outer = [&](double y) { return lambda_y * std::exp(-lambda_y * y) * inner(y); };
    return gauss_kronrod<double, 31>::integrate(outer, a, std::numeric_limits<double>::infinity(), 15,
                                                tol);
}

/// Slot-by-slot enumeration of the energy queue: from level j, an idle slot
/// (probability pi_idle) spends g packets if j >= g, then n packets arrive with
/// probability idle.at(n); an active slot only receives arrivals from `active`.
/// The level is capped at e_max. Unrepresented tail mass is sent to e_max.
inline Eigen::MatrixXd enumerate_transitions(const HarvestPmf& idle, const HarvestPmf& active,
                                             double pi_idle, int g, int e_max) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(e_max + 1, e_max + 1);
    auto land = [&](int j, int level, double p) { omega(j, std::min(level, e_max)) += p; };
    for (int j = 0; j <= e_max; ++j) {
        for (int slot_idle = 0; slot_idle <= 1; ++slot_idle) {
            const double p_slot = slot_idle ? pi_idle : 1.0 - pi_idle;
            const HarvestPmf& arrivals = slot_idle ? idle : active;
            int level = j;
            if (slot_idle && level >= g) level -= g;
            for (std::size_t n = 0; n < arrivals.probs.size(); ++n) {
                land(j, level + static_cast<int>(std::min<std::size_t>(n, 1u << 20)), p_slot * arrivals.probs[n]);
            }
            land(j, e_max, p_slot * arrivals.tail_mass);
        }
    }
    return omega;
}

/// Poisson pmf by direct factorial evaluation.
inline double poisson_direct(double mean, int k) {
    double factorial = 1.0;
    for (int i = 2; i <= k; ++i) factorial *= i;
    return std::pow(mean, k) * std::exp(-mean) / factorial;
}

/// Fraction of `samples` exponential draws with mean `sigma` that are >= threshold.
inline double exceed_fraction(double sigma, double threshold, std::int64_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> exp_dist(1.0 / sigma);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < samples; ++i) hits += exp_dist(rng) >= threshold;
    return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace ehcr::oracle
