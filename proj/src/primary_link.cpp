#include "ehcr/primary_link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ehcr {

const char* to_string(PuRegime regime) {
    return regime == PuRegime::stable ? "stable" : "saturated";
}

double min_power(double h_ppd, const DerivedConstants& dc) {
    if (!(h_ppd > 0.0)) throw std::invalid_argument("min_power: h_ppd must be > 0");
    return dc.noise_w / h_ppd;
}

double mu_p(const SystemParams& params, const DerivedConstants& dc) {
    return std::exp(-dc.a / params.sigma_ppd);
}

PuRegime pu_regime(const SystemParams& params, const DerivedConstants& dc) {
    return params.lambda_p < mu_p(params, dc) ? PuRegime::stable : PuRegime::saturated;
}

double pu_busy_fraction(const SystemParams& params, const DerivedConstants& dc) {
    const double mu = mu_p(params, dc);
    if (mu <= 0.0) return params.lambda_p > 0.0 ? 1.0 : 0.0;
    return std::min(params.lambda_p / mu, 1.0);
}

// min(lambda_p/mu_p, 1) * mu_p, written so each regime is exact: lambda_p when
// stable, mu_p when saturated.
double pu_throughput(const SystemParams& params, const DerivedConstants& dc) {
    return std::min(params.lambda_p, mu_p(params, dc));
}

double pi_idle(const SystemParams& params, const DerivedConstants& dc) {
    return 1.0 - pu_throughput(params, dc);
}

PrimaryStats primary_stats(const SystemParams& params, const DerivedConstants& dc) {
    PrimaryStats s;
    s.mu_p = mu_p(params, dc);
    s.p_over = 1.0 - s.mu_p;
    s.thr_p = pu_throughput(params, dc);
    s.pi_idle = 1.0 - s.thr_p;
    s.regime = pu_regime(params, dc);
    return s;
}

}  // namespace ehcr
