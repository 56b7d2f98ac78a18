#pragma once

#include "ehcr/config.hpp"
#include "ehcr/harvest.hpp"
#include "ehcr/primary_link.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehcr {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

enum class StationaryMethod { direct, power_iteration, absorbing };

const char* to_string(StationaryMethod method);

struct StationaryInfo {
    StationaryMethod method = StationaryMethod::direct;
    double residual = 0.0;          ///< ||chi Omega - chi||_inf
    bool reducible = false;         ///< more than one closed class
    std::string warning;
};

/// Energy-queue chain over states 0..e_max for a fixed burst size g.
struct EnergyChain {
    Matrix omega;                   ///< row-stochastic, omega(j, k) = P_{j -> k}
    RowVector chi;                  ///< stationary row vector (empty until solved)
    int g = 1;
    double pi_idle = 1.0;
    StationaryInfo info;

    int e_max() const { return static_cast<int>(omega.rows()) - 1; }
    /// sum_{j >= g} chi_j: probability the SU holds enough energy to transmit.
    double availability() const;
};

class StationaryError : public std::runtime_error {
public:
    StationaryError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Assembles the transition matrix. Idle slots draw from `idle` and spend g
/// packets when j >= g; active slots draw from `active` and spend nothing.
/// Overflow past e_max lands in the top state. Throws std::invalid_argument
/// on unnormalized pmfs or g outside 1..e_max.
EnergyChain build_chain(const HarvestPmf& idle, const HarvestPmf& active, double pi_idle, int g,
                        int e_max);

struct StationaryOptions {
    int direct_max_states = 2048;      ///< larger chains go straight to power iteration
    double tolerance = 1e-12;
    long max_iterations = 1'000'000;
    double accept_residual = 1e-10;
};

/// Solves chi = chi Omega. Irreducible chains use a direct linear solve with
/// the normalization row, falling back to power iteration. Chains with
/// several closed classes return the limit distribution started from the
/// empty queue (state 0) and set info.reducible.
RowVector stationary(const Matrix& omega, StationaryInfo* info = nullptr,
                     const StationaryOptions& options = {});

void solve(EnergyChain& chain, const StationaryOptions& options = {});

double max_residual(const Matrix& omega, const RowVector& chi);

/// Pr{no outage on s -> sd} when spending g packets.
double su_success_probability(int g, const SystemParams& params, const DerivedConstants& dc);

double su_throughput(const EnergyChain& chain, const SystemParams& params, const DerivedConstants& dc);

/// Energy packets consumed per slot, g * pi_idle * availability.
double energy_service_rate(const EnergyChain& chain);

struct GCandidate {
    int g = 1;
    double availability = 0.0;
    double success = 0.0;
    double mu_e = 0.0;
    double mu_s = 0.0;
    StationaryInfo info;
};

struct ThroughputReport {
    double pi_idle = 0.0;
    double mu_p = 0.0;
    double pu_throughput = 0.0;
    PuRegime regime = PuRegime::stable;
    std::vector<GCandidate> by_g;   ///< index g-1
    int g_star = 1;
    double mu_s_star = 0.0;
    double mu_e_star = 0.0;

    const GCandidate& best() const { return by_g.at(static_cast<std::size_t>(g_star - 1)); }
};

/// Evaluates every g in 1..E_max and picks the largest SU throughput; ties go
/// to the smallest g.
ThroughputReport optimize_g(const SystemParams& params, const DerivedConstants& dc,
                            const ArrivalPmfs& pmfs);
ThroughputReport optimize_g(const SystemParams& params);

/// Chain for the configured params.G, solved.
EnergyChain solved_chain(const SystemParams& params, const DerivedConstants& dc,
                         const ArrivalPmfs& pmfs, int g);

void write_matrix(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const RowVector& v);

}  // namespace ehcr
