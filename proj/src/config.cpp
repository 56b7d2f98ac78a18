#include "ehcr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace ehcr {

namespace {

std::string join_errors(const std::vector<FieldError>& errors) {
    std::string out = "invalid parameters:";
    for (const auto& e : errors) {
        out += " " + e.field + " (" + e.message + ");";
    }
    return out;
}

// Lowercase, '-' folded to '_'. Field names are unique under this folding.
std::string canonical(std::string_view name) {
    std::string out(name);
    for (auto& c : out) {
        c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

struct FieldSlot {
    const char* name;
    double SystemParams::*real;
    int SystemParams::*integer;
};

constexpr FieldSlot kSlots[] = {
    {"beta", &SystemParams::beta, nullptr},
    {"T", &SystemParams::T, nullptr},
    {"tau", &SystemParams::tau, nullptr},
    {"W", &SystemParams::W, nullptr},
    {"N0", &SystemParams::N0, nullptr},
    {"e_pkt", &SystemParams::e_pkt, nullptr},
    {"P_max", &SystemParams::P_max, nullptr},
    {"lambda_p", &SystemParams::lambda_p, nullptr},
    {"lambda_e", &SystemParams::lambda_e, nullptr},
    {"eta", &SystemParams::eta, nullptr},
    {"E_max", nullptr, &SystemParams::E_max},
    {"G", nullptr, &SystemParams::G},
    {"sigma_ppd", &SystemParams::sigma_ppd, nullptr},
    {"sigma_ps", &SystemParams::sigma_ps, nullptr},
    {"sigma_ssd", &SystemParams::sigma_ssd, nullptr},
};

const FieldSlot* find_slot(std::string_view name) {
    const auto key = canonical(name);
    for (const auto& slot : kSlots) {
        if (canonical(slot.name) == key) return &slot;
    }
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

bool ValidationError::mentions(std::string_view field) const {
    return std::any_of(errors_.begin(), errors_.end(),
                       [&](const FieldError& e) { return e.field == field; });
}

SystemParams validate(const SystemParams& p) {
    std::vector<FieldError> errors;
    auto require = [&](bool ok, const char* field, const char* message) {
        if (!ok) errors.push_back({field, message});
    };
    auto positive = [&](double v, const char* field) {
        require(std::isfinite(v) && v > 0.0, field, "must be finite and > 0");
    };

    positive(p.beta, "beta");
    positive(p.T, "T");
    require(std::isfinite(p.tau) && p.tau > 0.0 && p.tau < p.T, "tau", "must satisfy 0 < tau < T");
    positive(p.W, "W");
    positive(p.N0, "N0");
    positive(p.e_pkt, "e_pkt");
    positive(p.P_max, "P_max");
    require(p.lambda_p >= 0.0 && p.lambda_p <= 1.0, "lambda_p", "must lie in [0, 1]");
    require(std::isfinite(p.lambda_e) && p.lambda_e >= 0.0, "lambda_e", "must be >= 0");
    require(p.eta >= 0.0 && p.eta <= 1.0, "eta", "must lie in [0, 1]");
    require(p.E_max >= 1, "E_max", "must be >= 1");
    require(p.G >= 1 && p.G <= p.E_max, "G", "must satisfy 1 <= G <= E_max");
    positive(p.sigma_ppd, "sigma_ppd");
    positive(p.sigma_ps, "sigma_ps");
    positive(p.sigma_ssd, "sigma_ssd");

    if (!errors.empty()) throw ValidationError(std::move(errors));
    return p;
}

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double watts_to_dbm(double p_watts) { return 10.0 * std::log10(p_watts) + 30.0; }

DerivedConstants derive(const SystemParams& p) {
    DerivedConstants dc;
    dc.R_p = p.beta / (p.T * p.W);
    dc.R_s = p.beta / ((p.T - p.tau) * p.W);
    dc.noise_w = p.N0 * p.W * (std::exp2(dc.R_p) - 1.0);
    dc.a = dc.noise_w / p.P_max;
    dc.rf_disabled = !(p.eta > 0.0);
    dc.alpha = dc.rf_disabled ? 0.0 : p.e_pkt / (p.eta * dc.noise_w * p.T);
    dc.lambda_x = 1.0 / p.sigma_ps;
    dc.lambda_y = 1.0 / p.sigma_ppd;
    return dc;
}

const std::vector<std::string>& field_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& slot : kSlots) out.emplace_back(slot.name);
        return out;
    }();
    return names;
}

bool is_field(std::string_view name) {
    return find_slot(name) != nullptr || canonical(name) == "p_max_dbm";
}

bool is_integer_field(std::string_view name) {
    const auto* slot = find_slot(name);
    return slot != nullptr && slot->integer != nullptr;
}

double get_field(const SystemParams& params, std::string_view name) {
    const auto* slot = find_slot(name);
    if (slot == nullptr) {
        if (canonical(name) == "p_max_dbm") return watts_to_dbm(params.P_max);
        throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    }
    return slot->real ? params.*(slot->real) : static_cast<double>(params.*(slot->integer));
}

void set_field(SystemParams& params, std::string_view name, double value) {
    if (canonical(name) == "p_max_dbm") {
        params.P_max = dbm_to_watts(value);
        return;
    }
    const auto* slot = find_slot(name);
    if (slot == nullptr) {
        throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    }
    if (slot->real) {
        params.*(slot->real) = value;
        return;
    }
    const double rounded = std::round(value);
    if (std::abs(rounded - value) > 1e-9) {
        throw std::invalid_argument("parameter '" + std::string(slot->name) + "' must be an integer");
    }
    params.*(slot->integer) = static_cast<int>(rounded);
}

SystemParams read_config(std::istream& in, SystemParams base) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(std::string_view(body).substr(0, eq));
        const auto text = trim(std::string_view(body).substr(eq + 1));
        double value = 0.0;
        std::istringstream parse(text);
        if (!(parse >> value) || !(parse >> std::ws).eof()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad number '" + text + "'");
        }
        if (!is_field(key)) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        set_field(base, key, value);
    }
    return base;
}

SystemParams load_config_file(const std::string& path, SystemParams base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return read_config(in, base);
}

}  // namespace ehcr
