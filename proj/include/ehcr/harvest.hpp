#pragma once

#include "ehcr/config.hpp"

#include <iosfwd>
#include <vector>

namespace ehcr {

enum class PmfKind { rf_conditional, rf_joint, nature, nature_idle, combined_active };

const char* to_string(PmfKind kind);

/// Truncated pmf over energy-packet counts 0..probs.size()-1.
/// sum(probs) + tail_mass == mass, where mass is 1 for every kind except
/// rf_joint (whose mass is Pr{h_ppd >= a}).
struct HarvestPmf {
    std::vector<double> probs;
    double tail_mass = 0.0;
    double mass = 1.0;
    PmfKind kind = PmfKind::nature;

    /// Probability of exactly n packets; 0 beyond the stored support.
    double at(long n) const;
    double mean() const;
    std::size_t size() const { return probs.size(); }
};

inline constexpr double kDefaultTailEpsilon = 1e-12;

enum class RfNormalization {
    conditional,  ///< conditioned on the PU transmitting (sums to 1)
    joint,        ///< raw F-increments, sums to exp(-lambda_y a)
};

/// Pr{h_ps/h_ppd <= z, h_ppd >= a} for independent exponential gains.
double f_of_z(double z, const DerivedConstants& dc);

/// Pr{h_ps/h_ppd > z, h_ppd >= a}, evaluated without cancellation.
double f_of_z_complement(double z, const DerivedConstants& dc);

/// Packets harvested from one PU transmission. eta == 0 gives {0 -> 1}.
HarvestPmf rf_pmf(const SystemParams& params, const DerivedConstants& dc,
                  double epsilon = kDefaultTailEpsilon,
                  RfNormalization mode = RfNormalization::conditional);

HarvestPmf nature_pmf(const SystemParams& params, double epsilon = kDefaultTailEpsilon);

/// Distribution of the sum of independent counts (discrete convolution).
HarvestPmf combined_pmf(const HarvestPmf& rf, const HarvestPmf& nature);

/// Per-slot energy arrivals seen by the energy queue: idle slots receive
/// nature only, active slots receive nature plus RF.
struct ArrivalPmfs {
    HarvestPmf idle;
    HarvestPmf active;
};

ArrivalPmfs arrival_pmfs(const SystemParams& params, const DerivedConstants& dc,
                         double epsilon = kDefaultTailEpsilon);

/// Two-column "n probability" text, one line per bin, preceded by a comment
/// header carrying kind and tail mass.
void write_pmf(std::ostream& out, const HarvestPmf& pmf);

}  // namespace ehcr
