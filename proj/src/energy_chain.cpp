#include "ehcr/energy_chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>

namespace ehcr {

namespace {

void require_normalized(const HarvestPmf& pmf, const char* which) {
    constexpr double tol = 1e-9;
    double sum = pmf.tail_mass;
    for (double p : pmf.probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument(std::string("build_chain: negative probability in ") + which);
        }
        sum += p;
    }
    if (pmf.probs.empty() || std::abs(pmf.mass - 1.0) > tol || std::abs(sum - 1.0) > tol) {
        throw std::invalid_argument(std::string("build_chain: ") + which + " pmf is not normalized");
    }
}

// Prefix sums so that cdf[m] = sum_{n < m} p_n.
std::vector<double> prefix_sums(const HarvestPmf& pmf, int length) {
    std::vector<double> cdf(static_cast<std::size_t>(length) + 1, 0.0);
    for (int m = 0; m < length; ++m) cdf[m + 1] = cdf[m] + pmf.at(m);
    return cdf;
}

double upper_tail(const std::vector<double>& cdf, int from) {
    if (from <= 0) return 1.0;
    return std::max(0.0, 1.0 - cdf[static_cast<std::size_t>(from)]);
}

// Tarjan SCC over the positive-entry graph of omega.
std::vector<std::vector<int>> closed_classes(const Matrix& omega) {
    const int n = static_cast<int>(omega.rows());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int counter = 0, n_comp = 0;

    std::function<void(int)> strong = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w = 0; w < n; ++w) {
            if (!(omega(v, w) > 0.0)) continue;
            if (index[w] < 0) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w = -1;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = n_comp;
            } while (w != v);
            ++n_comp;
        }
    };
    for (int v = 0; v < n; ++v) {
        if (index[v] < 0) strong(v);
    }

    std::vector<bool> leaks(n_comp, false);
    for (int v = 0; v < n; ++v) {
        for (int w = 0; w < n; ++w) {
            if (omega(v, w) > 0.0 && comp[v] != comp[w]) leaks[comp[v]] = true;
        }
    }
    std::vector<std::vector<int>> members(n_comp);
    for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);
    std::vector<std::vector<int>> closed;
    for (int c = 0; c < n_comp; ++c) {
        if (!leaks[c]) closed.push_back(std::move(members[c]));
    }
    return closed;
}

void normalize(RowVector& chi) {
    chi = chi.cwiseMax(0.0);
    chi /= chi.sum();
}

RowVector direct_solve(const Matrix& omega) {
    const auto n = omega.rows();
    Matrix a = omega.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd x = a.fullPivLu().solve(b);
    RowVector chi = x.transpose();
    normalize(chi);
    return chi;
}

RowVector power_iterate(const Matrix& omega, const StationaryOptions& options) {
    const auto n = omega.rows();
    // The lazy kernel (I + Omega)/2 shares chi and is aperiodic.
    const Matrix lazy = 0.5 * (omega + Matrix::Identity(n, n));
    RowVector chi = RowVector::Constant(n, 1.0 / static_cast<double>(n));
    for (long it = 0; it < options.max_iterations; ++it) {
        RowVector next = chi * lazy;
        next /= next.sum();
        const double step = (next - chi).cwiseAbs().maxCoeff();
        chi = std::move(next);
        if (step < options.tolerance) return chi;
    }
    throw StationaryError("stationary: power iteration did not converge within " +
                              std::to_string(options.max_iterations) + " iterations",
                          max_residual(omega, chi));
}

RowVector irreducible_stationary(const Matrix& omega, const StationaryOptions& options,
                                 StationaryInfo& info) {
    if (omega.rows() <= options.direct_max_states) {
        RowVector chi = direct_solve(omega);
        info.method = StationaryMethod::direct;
        info.residual = max_residual(omega, chi);
        if (chi.allFinite() && info.residual <= options.accept_residual) return chi;
    }
    RowVector chi = power_iterate(omega, options);
    info.method = StationaryMethod::power_iteration;
    info.residual = max_residual(omega, chi);
    return chi;
}

Matrix sub_matrix(const Matrix& omega, const std::vector<int>& states) {
    const auto m = static_cast<Eigen::Index>(states.size());
    Matrix sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = omega(states[r], states[c]);
    }
    return sub;
}

// Limit distribution of the chain started in state 0 when several closed
// classes exist: sum over classes of Pr{absorbed in C | start 0} * pi_C.
RowVector absorbing_limit(const Matrix& omega, const std::vector<std::vector<int>>& closed,
                          const StationaryOptions& options) {
    const auto n = omega.rows();
    std::vector<int> owner(static_cast<std::size_t>(n), -1);
    for (std::size_t c = 0; c < closed.size(); ++c) {
        for (int s : closed[c]) owner[s] = static_cast<int>(c);
    }
    std::vector<int> transient;
    for (int s = 0; s < n; ++s) {
        if (owner[s] < 0) transient.push_back(s);
    }

    std::vector<double> weight(closed.size(), 0.0);
    if (owner[0] >= 0) {
        weight[owner[0]] = 1.0;
    } else {
        // h = Q h + r per class, solved for all classes at once.
        const auto t = static_cast<Eigen::Index>(transient.size());
        Matrix system = Matrix::Identity(t, t) - sub_matrix(omega, transient);
        Matrix rhs = Matrix::Zero(t, static_cast<Eigen::Index>(closed.size()));
        for (Eigen::Index r = 0; r < t; ++r) {
            for (std::size_t c = 0; c < closed.size(); ++c) {
                for (int s : closed[c]) rhs(r, static_cast<Eigen::Index>(c)) += omega(transient[r], s);
            }
        }
        const Matrix h = system.fullPivLu().solve(rhs);
        const auto start = std::find(transient.begin(), transient.end(), 0) - transient.begin();
        for (std::size_t c = 0; c < closed.size(); ++c) {
            weight[c] = h(start, static_cast<Eigen::Index>(c));
        }
    }

    RowVector chi = RowVector::Zero(n);
    for (std::size_t c = 0; c < closed.size(); ++c) {
        if (weight[c] <= 0.0) continue;
        StationaryInfo local;
        const RowVector pi = irreducible_stationary(sub_matrix(omega, closed[c]), options, local);
        for (std::size_t i = 0; i < closed[c].size(); ++i) {
            chi(closed[c][i]) += weight[c] * pi(static_cast<Eigen::Index>(i));
        }
    }
    normalize(chi);
    return chi;
}

}  // namespace

const char* to_string(StationaryMethod method) {
    switch (method) {
        case StationaryMethod::direct: return "direct";
        case StationaryMethod::power_iteration: return "power_iteration";
        case StationaryMethod::absorbing: return "absorbing";
    }
    return "unknown";
}

double EnergyChain::availability() const {
    if (chi.size() == 0) throw std::logic_error("EnergyChain: chain not solved");
    return chi.tail(chi.size() - g).sum();
}

EnergyChain build_chain(const HarvestPmf& idle, const HarvestPmf& active, double pi_idle, int g,
                        int e_max) {
    if (e_max < 1 || g < 1 || g > e_max) {
        throw std::invalid_argument("build_chain: require 1 <= g <= e_max");
    }
    if (!(pi_idle >= 0.0 && pi_idle <= 1.0)) {
        throw std::invalid_argument("build_chain: pi_idle must lie in [0, 1]");
    }
    require_normalized(idle, "idle-slot");
    require_normalized(active, "active-slot");

    const double busy = 1.0 - pi_idle;
    const auto idle_cdf = prefix_sums(idle, e_max + 1);
    const auto active_cdf = prefix_sums(active, e_max + 1);

    EnergyChain chain;
    chain.g = g;
    chain.pi_idle = pi_idle;
    chain.omega = Matrix::Zero(e_max + 1, e_max + 1);
    for (int j = 0; j <= e_max; ++j) {
        // Level left after an idle slot's transmission, if any.
        const int after_idle = j >= g ? j - g : j;
        for (int k = 0; k < e_max; ++k) {
            chain.omega(j, k) = pi_idle * idle.at(k - after_idle) + busy * active.at(k - j);
        }
        chain.omega(j, e_max) =
            pi_idle * upper_tail(idle_cdf, e_max - after_idle) + busy * upper_tail(active_cdf, e_max - j);
    }
    return chain;
}

double max_residual(const Matrix& omega, const RowVector& chi) {
    return (chi * omega - chi).cwiseAbs().maxCoeff();
}

RowVector stationary(const Matrix& omega, StationaryInfo* info, const StationaryOptions& options) {
    if (omega.rows() != omega.cols() || omega.rows() == 0) {
        throw std::invalid_argument("stationary: matrix must be square and non-empty");
    }
    for (Eigen::Index r = 0; r < omega.rows(); ++r) {
        if ((omega.row(r).array() < 0.0).any() || std::abs(omega.row(r).sum() - 1.0) > 1e-9) {
            throw std::invalid_argument("stationary: matrix is not row-stochastic");
        }
    }

    StationaryInfo local;
    StationaryInfo& out = info ? *info : local;
    out = {};
    const auto closed = closed_classes(omega);
    RowVector chi;
    if (closed.size() == 1) {
        chi = irreducible_stationary(omega, options, out);
    } else {
        chi = absorbing_limit(omega, closed, options);
        out.method = StationaryMethod::absorbing;
        out.reducible = true;
        out.residual = max_residual(omega, chi);
        out.warning = "chain has " + std::to_string(closed.size()) +
                      " closed classes; returning the limit from the empty queue";
    }
    if (out.residual > options.accept_residual) {
        throw StationaryError("stationary: residual above tolerance", out.residual);
    }
    return chi;
}

void solve(EnergyChain& chain, const StationaryOptions& options) {
    chain.chi = stationary(chain.omega, &chain.info, options);
}

double su_success_probability(int g, const SystemParams& params, const DerivedConstants& dc) {
    const double energy = static_cast<double>(g) * params.e_pkt;
    return std::exp(-params.N0 * params.W * (params.T - params.tau) * (std::exp2(dc.R_s) - 1.0) /
                    (energy * params.sigma_ssd));
}

double su_throughput(const EnergyChain& chain, const SystemParams& params, const DerivedConstants& dc) {
    return chain.pi_idle * su_success_probability(chain.g, params, dc) * chain.availability();
}

double energy_service_rate(const EnergyChain& chain) {
    return static_cast<double>(chain.g) * chain.pi_idle * chain.availability();
}

EnergyChain solved_chain(const SystemParams& params, const DerivedConstants& dc,
                         const ArrivalPmfs& pmfs, int g) {
    EnergyChain chain = build_chain(pmfs.idle, pmfs.active, pi_idle(params, dc), g, params.E_max);
    solve(chain);
    return chain;
}

ThroughputReport optimize_g(const SystemParams& params, const DerivedConstants& dc,
                            const ArrivalPmfs& pmfs) {
    ThroughputReport report;
    const auto stats = primary_stats(params, dc);
    report.pi_idle = stats.pi_idle;
    report.mu_p = stats.mu_p;
    report.pu_throughput = stats.thr_p;
    report.regime = stats.regime;

    for (int g = 1; g <= params.E_max; ++g) {
        const EnergyChain chain = solved_chain(params, dc, pmfs, g);
        GCandidate c;
        c.g = g;
        c.availability = chain.availability();
        c.success = su_success_probability(g, params, dc);
        c.mu_e = energy_service_rate(chain);
        c.mu_s = chain.pi_idle * c.success * c.availability;
        c.info = chain.info;
        if (report.by_g.empty() || c.mu_s > report.mu_s_star) {
            report.g_star = g;
            report.mu_s_star = c.mu_s;
            report.mu_e_star = c.mu_e;
        }
        report.by_g.push_back(std::move(c));
    }
    return report;
}

ThroughputReport optimize_g(const SystemParams& params) {
    const auto p = validate(params);
    const auto dc = derive(p);
    return optimize_g(p, dc, arrival_pmfs(p, dc));
}

void write_matrix(std::ostream& out, const Matrix& m) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

void write_vector(std::ostream& out, const RowVector& v) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
    out << '\n';
    out.flags(flags);
    out.precision(precision);
}

}  // namespace ehcr
