#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehcr {

/// Physical and traffic parameters of the PU/SU system. All quantities are SI
/// (Watts, Joules, seconds, Hz). Defaults are the reference operating point
/// used by the figure presets.
struct SystemParams {
    double beta = 1000.0;       ///< packet length, bits
    double T = 1.0;             ///< slot duration, s
    double tau = 0.1;           ///< sensing duration, s
    double W = 1000.0;          ///< bandwidth, Hz
    double N0 = 1e-6;           ///< noise PSD, W/Hz
    double e_pkt = 1e-3;        ///< energy per energy packet, J
    double P_max = 0.01;        ///< PU power cap, W (10 dBm)
    double lambda_p = 0.4;      ///< PU Bernoulli arrival probability per slot
    double lambda_e = 0.0;      ///< nature harvest rate, packets per slot
    double eta = 0.6;           ///< RF-to-DC efficiency
    int E_max = 10;             ///< energy queue capacity, packets
    int G = 1;                  ///< packets spent per SU transmission
    double sigma_ppd = 0.5;     ///< mean gain PU -> PU destination
    double sigma_ps = 1.0;      ///< mean gain PU -> SU
    double sigma_ssd = 1.0;     ///< mean gain SU -> SU destination

    bool operator==(const SystemParams&) const = default;
};

struct DerivedConstants {
    double R_p = 0.0;           ///< primary spectral efficiency, bits/s/Hz
    double R_s = 0.0;           ///< secondary spectral efficiency, bits/s/Hz
    double a = 0.0;             ///< minimum h_ppd for which the PU transmits
    double alpha = 0.0;         ///< h_ps/h_ppd width of one harvested packet
    bool rf_disabled = false;   ///< eta == 0; alpha is meaningless
    double lambda_x = 0.0;      ///< 1/sigma_ps
    double lambda_y = 0.0;      ///< 1/sigma_ppd
    double noise_w = 0.0;       ///< N0*W*(2^R_p - 1), the PU's power-gain product
};

struct FieldError {
    std::string field;
    std::string message;
};

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }
    bool mentions(std::string_view field) const;

private:
    std::vector<FieldError> errors_;
};

/// Returns `params` unchanged; throws ValidationError naming every bad field.
SystemParams validate(const SystemParams& params);

double dbm_to_watts(double p_dbm);
double watts_to_dbm(double p_watts);

DerivedConstants derive(const SystemParams& params);

// Field access by name, used by the config file reader, the CLI and sweeps.
// Names are the struct member names; `p_max_dbm` is accepted as a write-only
// alias of P_max.
const std::vector<std::string>& field_names();
bool is_field(std::string_view name);
bool is_integer_field(std::string_view name);
double get_field(const SystemParams& params, std::string_view name);
void set_field(SystemParams& params, std::string_view name, double value);

/// Reads `key = value` lines; `#` starts a comment. Unknown keys throw.
SystemParams read_config(std::istream& in, SystemParams base = {});
SystemParams load_config_file(const std::string& path, SystemParams base = {});

}  // namespace ehcr
