#pragma once

#include "ehcr/config.hpp"

namespace ehcr {

enum class PuRegime { stable, saturated };

const char* to_string(PuRegime regime);

struct PrimaryStats {
    double mu_p = 0.0;      ///< per-slot service probability, Pr{h_ppd >= a}
    double p_over = 0.0;    ///< Pr{P*_p > P_max} = 1 - mu_p
    double pi_idle = 0.0;   ///< probability the PU does not transmit in a slot
    double thr_p = 0.0;     ///< delivered PU packets per slot, 1 - pi_idle
    PuRegime regime = PuRegime::stable;
};

/// Channel-inversion power that exactly meets the PU rate on gain `h_ppd`.
/// Throws std::invalid_argument when h_ppd <= 0.
double min_power(double h_ppd, const DerivedConstants& dc);

double mu_p(const SystemParams& params, const DerivedConstants& dc);

/// Stable iff lambda_p < mu_p; equality counts as saturated.
PuRegime pu_regime(const SystemParams& params, const DerivedConstants& dc);

/// Fraction of slots in which the PU queue is non-empty, min(lambda_p/mu_p, 1).
/// Zero when mu_p == 0.
double pu_busy_fraction(const SystemParams& params, const DerivedConstants& dc);

double pi_idle(const SystemParams& params, const DerivedConstants& dc);
double pu_throughput(const SystemParams& params, const DerivedConstants& dc);

PrimaryStats primary_stats(const SystemParams& params, const DerivedConstants& dc);

}  // namespace ehcr
