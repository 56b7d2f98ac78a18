#include "ehcr/harvest.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ehcr {

namespace {

constexpr std::size_t kMaxBins = std::size_t{1} << 24;

// Pr{X/Y > z | Y >= a} for X ~ Exp(lambda_x), Y ~ Exp(lambda_y). Memorylessness
// of Y makes this lambda_y/(lambda_y + lambda_x z) * exp(-a lambda_x z).
double conditional_exceed(double z, const DerivedConstants& dc) {
    if (std::isinf(z)) return 0.0;
    const double rate = dc.lambda_x * z;
    return dc.lambda_y / (dc.lambda_y + rate) * std::exp(-dc.a * rate);
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("tail epsilon must lie in (0, 1)");
    }
}

HarvestPmf point_mass_at_zero(PmfKind kind) {
    HarvestPmf pmf;
    pmf.probs = {1.0};
    pmf.kind = kind;
    return pmf;
}

}  // namespace

const char* to_string(PmfKind kind) {
    switch (kind) {
        case PmfKind::rf_conditional: return "rf_conditional";
        case PmfKind::rf_joint: return "rf_joint";
        case PmfKind::nature: return "nature";
        case PmfKind::nature_idle: return "nature_idle";
        case PmfKind::combined_active: return "combined_active";
    }
    return "unknown";
}

double HarvestPmf::at(long n) const {
    if (n < 0 || static_cast<std::size_t>(n) >= probs.size()) return 0.0;
    return probs[static_cast<std::size_t>(n)];
}

double HarvestPmf::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) m += static_cast<double>(n) * probs[n];
    return m;
}

double f_of_z(double z, const DerivedConstants& dc) {
    if (!(z >= 0.0)) throw std::invalid_argument("f_of_z: z must be >= 0");
    const double active = std::exp(-dc.lambda_y * dc.a);
    if (std::isinf(z)) return active;
    // 1 - r e^{-c} split as (1 - r) + r (1 - e^{-c}); both terms are >= 0.
    const double rate = dc.lambda_x * z;
    const double r = dc.lambda_y / (dc.lambda_y + rate);
    const double bracket = rate / (dc.lambda_y + rate) - r * std::expm1(-dc.a * rate);
    return active * bracket;
}

double f_of_z_complement(double z, const DerivedConstants& dc) {
    if (!(z >= 0.0)) throw std::invalid_argument("f_of_z_complement: z must be >= 0");
    return std::exp(-dc.lambda_y * dc.a) * conditional_exceed(z, dc);
}

HarvestPmf rf_pmf(const SystemParams& params, const DerivedConstants& dc, double epsilon,
                  RfNormalization mode) {
    check_epsilon(epsilon);
    const bool joint = mode == RfNormalization::joint;
    const PmfKind kind = joint ? PmfKind::rf_joint : PmfKind::rf_conditional;
    const double scale = joint ? std::exp(-dc.lambda_y * dc.a) : 1.0;

    if (dc.rf_disabled || !(params.eta > 0.0)) {
        HarvestPmf pmf = point_mass_at_zero(kind);
        pmf.probs[0] = scale;
        pmf.mass = scale;
        return pmf;
    }

    HarvestPmf pmf;
    pmf.kind = kind;
    pmf.mass = scale;
    double exceed = 1.0;  // conditional_exceed(0)
    for (std::size_t n = 0;; ++n) {
        if (n >= kMaxBins) {
            throw std::domain_error("rf_pmf: tail does not fall below epsilon within bin cap");
        }
        const double next = conditional_exceed(static_cast<double>(n + 1) * dc.alpha, dc);
        pmf.probs.push_back(scale * (exceed - next));
        exceed = next;
        if (scale * exceed < epsilon) break;
    }
    pmf.tail_mass = scale * exceed;
    return pmf;
}

HarvestPmf nature_pmf(const SystemParams& params, double epsilon) {
    check_epsilon(epsilon);
    const double mean = params.lambda_e * params.T;
    if (!(mean > 0.0)) return point_mass_at_zero(PmfKind::nature);

    HarvestPmf pmf;
    pmf.kind = PmfKind::nature;
    const double log_mean = std::log(mean);
    for (std::size_t k = 0;; ++k) {
        if (k >= kMaxBins) {
            throw std::domain_error("nature_pmf: tail does not fall below epsilon within bin cap");
        }
        const double kd = static_cast<double>(k);
        pmf.probs.push_back(std::exp(kd * log_mean - mean - std::lgamma(kd + 1.0)));
        // Pr{N > k} = P(k + 1, mean), the regularized lower incomplete gamma.
        const double tail = boost::math::gamma_p(kd + 1.0, mean);
        if (tail < epsilon && kd >= mean) {
            pmf.tail_mass = tail;
            break;
        }
    }
    return pmf;
}

HarvestPmf combined_pmf(const HarvestPmf& rf, const HarvestPmf& nature) {
    constexpr double tol = 1e-9;
    if (std::abs(rf.mass - 1.0) > tol || std::abs(nature.mass - 1.0) > tol) {
        throw std::invalid_argument("combined_pmf: inputs must be normalized pmfs");
    }
    if (rf.probs.empty() || nature.probs.empty()) {
        throw std::invalid_argument("combined_pmf: empty pmf");
    }
    HarvestPmf out;
    out.kind = PmfKind::combined_active;
    out.probs.assign(rf.probs.size() + nature.probs.size() - 1, 0.0);
    for (std::size_t k = 0; k < nature.probs.size(); ++k) {
        const double pk = nature.probs[k];
        if (pk == 0.0) continue;
        for (std::size_t m = 0; m < rf.probs.size(); ++m) out.probs[k + m] += pk * rf.probs[m];
    }
    // Mass outside the product of the two stored supports.
    out.tail_mass = rf.tail_mass + nature.tail_mass - rf.tail_mass * nature.tail_mass;
    return out;
}

ArrivalPmfs arrival_pmfs(const SystemParams& params, const DerivedConstants& dc, double epsilon) {
    ArrivalPmfs out;
    out.idle = nature_pmf(params, epsilon);
    out.active = combined_pmf(rf_pmf(params, dc, epsilon), out.idle);
    out.idle.kind = PmfKind::nature_idle;
    return out;
}

void write_pmf(std::ostream& out, const HarvestPmf& pmf) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "# kind " << to_string(pmf.kind) << "\n";
    out << std::setprecision(17) << "# tail_mass " << pmf.tail_mass << "\n";
    out << "# n probability\n";
    for (std::size_t n = 0; n < pmf.probs.size(); ++n) out << n << ' ' << pmf.probs[n] << '\n';
    out.flags(flags);
    out.precision(precision);
}

}  // namespace ehcr
