#include <doctest.h>

#include "ehcr/energy_chain.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ehcr;

namespace {

HarvestPmf pmf_of(std::vector<double> probs, PmfKind kind = PmfKind::nature_idle) {
    HarvestPmf pmf;
    pmf.probs = std::move(probs);
    pmf.kind = kind;
    return pmf;
}

HarvestPmf random_pmf(std::mt19937_64& rng, std::size_t size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(size);
    double total = 0.0;
    for (auto& v : w) total += (v = u(rng) * u(rng));
    for (auto& v : w) v /= total;
    return pmf_of(std::move(w));
}

SystemParams reference(double lambda_p = 0.4, double eta = 0.6, double lambda_e = 0.0, int e_max = 10) {
    SystemParams p;
    p.lambda_p = lambda_p;
    p.eta = eta;
    p.lambda_e = lambda_e;
    p.E_max = e_max;
    return p;
}

}  // namespace

TEST_CASE("two-state chain entry from the first case") {
    const double pi = 0.7;
    const auto idle = pmf_of({0.8, 0.2});
    const auto active = pmf_of({0.35, 0.65}, PmfKind::combined_active);
    const auto chain = build_chain(idle, active, pi, 1, 1);
    CHECK(chain.omega(0, 0) == doctest::Approx(pi * 0.8 + (1 - pi) * 0.35).epsilon(1e-15));
    const auto brute = oracle::enumerate_transitions(idle, active, pi, 1, 1);
    CHECK((chain.omega - brute).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("E_max = 2, G = 1 chain written out by hand") {
    const double pi = 0.6, busy = 1.0 - pi;
    const double q0 = 0.5, q1 = 0.3, q2 = 0.2;
    const double r0 = 0.2, r1 = 0.3, r2 = 0.5;
    const auto chain = build_chain(pmf_of({q0, q1, q2}), pmf_of({r0, r1, r2}), pi, 1, 2);
    Eigen::MatrixXd expected(3, 3);
    // j = 0 < G: never spends.
    expected(0, 0) = pi * q0 + busy * r0;
    expected(0, 1) = pi * q1 + busy * r1;
    expected(0, 2) = pi * (1.0 - (q0 + q1)) + busy * (1.0 - (r0 + r1));
    // j = 1: idle slots spend down to 0, active slots keep the packet.
    expected(1, 0) = pi * q0;
    expected(1, 1) = pi * q1 + busy * r0;
    expected(1, 2) = pi * (1.0 - (q0 + q1)) + busy * (1.0 - r0);
    // j = 2: idle slots land on 1 plus arrivals.
    expected(2, 0) = 0.0;
    expected(2, 1) = pi * q0;
    expected(2, 2) = pi * (1.0 - q0) + busy * 1.0;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            CAPTURE(j);
            CAPTURE(k);
            CHECK(chain.omega(j, k) == doctest::Approx(expected(j, k)).epsilon(1e-15));
        }
    }
    (void)q2;
    (void)r2;
}

TEST_CASE("assembled chain equals slot enumeration on random inputs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const int e_max = 1 + static_cast<int>(u(rng) * 12);
        const int g = 1 + static_cast<int>(u(rng) * e_max);
        const auto idle = random_pmf(rng, 1 + static_cast<std::size_t>(u(rng) * 20));
        const auto active = random_pmf(rng, 1 + static_cast<std::size_t>(u(rng) * 20));
        const double pi = u(rng);
        const auto chain = build_chain(idle, active, pi, g, e_max);
        const auto brute = oracle::enumerate_transitions(idle, active, pi, g, e_max);
        CHECK((chain.omega - brute).cwiseAbs().maxCoeff() <= 1e-14);
        for (int j = 0; j <= e_max; ++j) {
            CHECK(std::abs(chain.omega.row(j).sum() - 1.0) <= 1e-12);
            CHECK(chain.omega.row(j).minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("no arrivals gives the deterministic spend kernel") {
    const auto zero = pmf_of({1.0});
    const double pi = 0.3;
    const auto chain = build_chain(zero, zero, pi, 2, 5);
    for (int j = 0; j <= 5; ++j) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(6);
        if (j >= 2) {
            row(j - 2) += pi;
            row(j) += 1.0 - pi;
        } else {
            row(j) = 1.0;
        }
        CHECK((chain.omega.row(j) - row).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("build_chain argument checks") {
    const auto ok = pmf_of({1.0});
    CHECK_THROWS_AS(build_chain(ok, ok, 0.5, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_chain(ok, ok, 0.5, 4, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_chain(ok, ok, 1.5, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_chain(pmf_of({0.5, 0.4}), ok, 0.5, 1, 3), std::invalid_argument);
    auto joint = pmf_of({0.8});
    joint.mass = 0.8;
    CHECK_THROWS_AS(build_chain(ok, joint, 0.5, 1, 3), std::invalid_argument);
}

TEST_CASE("stationary: rank-one and two-state chains") {
    Eigen::MatrixXd rank_one(3, 3);
    rank_one << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
    const auto chi = stationary(rank_one);
    CHECK(chi(0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(chi(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(chi(2) == doctest::Approx(0.3).epsilon(1e-14));

    const double p = 0.15, q = 0.4;
    Eigen::MatrixXd two(2, 2);
    two << 1 - p, p, q, 1 - q;
    StationaryInfo info;
    const auto pi = stationary(two, &info);
    CHECK(info.method == StationaryMethod::direct);
    CHECK_FALSE(info.reducible);
    CHECK(pi(0) == doctest::Approx(q / (p + q)).epsilon(1e-14));
    CHECK(pi(1) == doctest::Approx(p / (p + q)).epsilon(1e-14));
}

TEST_CASE("stationary: power iteration agrees and handles periodic chains") {
    const auto p = reference();
    const auto dc = derive(p);
    const auto pmfs = arrival_pmfs(p, dc);
    auto chain = build_chain(pmfs.idle, pmfs.active, pi_idle(p, dc), 2, p.E_max);
    StationaryInfo direct_info, power_info;
    const auto direct = stationary(chain.omega, &direct_info);
    StationaryOptions force_power;
    force_power.direct_max_states = 0;
    const auto power = stationary(chain.omega, &power_info, force_power);
    CHECK(power_info.method == StationaryMethod::power_iteration);
    CHECK((direct - power).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(power_info.residual < 1e-10);

    Eigen::MatrixXd flip(2, 2);
    flip << 0, 1, 1, 0;
    const auto half = stationary(flip, nullptr, force_power);
    CHECK(half(0) == doctest::Approx(0.5));

    StationaryOptions starve = force_power;
    starve.max_iterations = 2;
    starve.tolerance = 1e-300;
    CHECK_THROWS_AS(stationary(chain.omega, nullptr, starve), StationaryError);
}

TEST_CASE("stationary: reducible chains return the limit from the empty queue") {
    // No arrivals, G = 2: levels 0 and 1 are both absorbing.
    const auto zero = pmf_of({1.0});
    auto chain = build_chain(zero, zero, 1.0, 2, 4);
    solve(chain);
    CHECK(chain.info.reducible);
    CHECK(chain.info.method == StationaryMethod::absorbing);
    CHECK_FALSE(chain.info.warning.empty());
    CHECK(chain.chi(0) == 1.0);
    CHECK(chain.availability() == 0.0);

    // Absorption split from a transient start.
    Eigen::MatrixXd m(3, 3);
    m << 0.5, 0.3, 0.2,
         0.0, 1.0, 0.0,
         0.0, 0.0, 1.0;
    const auto chi = stationary(m);
    CHECK(chi(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(chi(1) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(chi(2) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("stationary input checks") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS_AS(stationary(bad), std::invalid_argument);
    CHECK_THROWS_AS(stationary(Eigen::MatrixXd(2, 3)), std::invalid_argument);
}

TEST_CASE("SU success probability") {
    const auto p = reference();
    const auto dc = derive(p);
    const double s1 = su_success_probability(1, p, dc);
    const double expected = std::exp(-9e-4 * (std::exp2(10.0 / 9.0) - 1.0) / 1e-3);
    CHECK(s1 == doctest::Approx(expected).epsilon(1e-14));
    CHECK(s1 == doctest::Approx(0.352).epsilon(1e-3));
    const double threshold = 9e-4 * (std::exp2(10.0 / 9.0) - 1.0) / 1e-3;
    CHECK(std::abs(oracle::exceed_fraction(p.sigma_ssd, threshold, 1'000'000, 8) - s1) < 0.002);
    double prev = 0.0;
    for (int g = 1; g <= 50; ++g) {
        const double s = su_success_probability(g, p, dc);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("SU throughput and energy service rate") {
    const auto p = reference();
    const auto dc = derive(p);
    const auto pmfs = arrival_pmfs(p, dc);
    for (int g = 1; g <= p.E_max; ++g) {
        const auto chain = solved_chain(p, dc, pmfs, g);
        CHECK(std::abs(chain.chi.sum() - 1.0) <= 1e-12);
        CHECK(max_residual(chain.omega, chain.chi) < 1e-10);
        const double avail = chain.chi.tail(p.E_max + 1 - g).sum();
        CHECK(energy_service_rate(chain) == doctest::Approx(g * 0.6 * avail).epsilon(1e-12));
        const double mu_s = su_throughput(chain, p, dc);
        CHECK(mu_s == doctest::Approx(0.6 * su_success_probability(g, p, dc) * avail).epsilon(1e-12));
        CHECK(mu_s >= 0.0);
        CHECK(mu_s <= 0.6);
    }
}

TEST_CASE("saturated PU: pi_idle is 1 - mu_p and SU throughput stops moving") {
    auto at = [](double lambda_p) { return optimize_g(reference(lambda_p)); };
    const auto sat = at(1.0);
    CHECK(sat.pi_idle == 1.0 - sat.mu_p);
    for (double lp : {0.82, 0.9, 0.95}) {
        const auto r = at(lp);
        CHECK(r.regime == PuRegime::saturated);
        CHECK(r.g_star == sat.g_star);
        CHECK(std::abs(r.mu_s_star - sat.mu_s_star) <= 1e-12);
    }
}

TEST_CASE("large G starves the SU") {
    // Spending the whole battery needs chi(E_max), which vanishes as the cap
    // outgrows the harvest.
    double prev = 1.0;
    for (int e_max : {5, 10, 20, 40}) {
        const auto p = reference(0.4, 0.05, 0.0, e_max);
        const auto dc = derive(p);
        const auto chain = solved_chain(p, dc, arrival_pmfs(p, dc), e_max);
        const double mu_s = su_throughput(chain, p, dc);
        CHECK(mu_s == doctest::Approx(0.6 * su_success_probability(e_max, p, dc) * chain.chi(e_max)));
        CHECK(mu_s < prev);
        prev = mu_s;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("optimize_g equals exhaustive re-evaluation") {
    CHECK(optimize_g(reference(0.4, 0.6, 0.0, 1)).g_star == 1);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 25; ++t) {
        auto p = reference(u(rng), u(rng), 2.0 * u(rng) * u(rng), 1 + static_cast<int>(u(rng) * 12));
        const auto report = optimize_g(p);
        const auto dc = derive(p);
        const auto pmfs = arrival_pmfs(p, dc);
        int best_g = 0;
        double best = -1.0;
        for (int g = 1; g <= p.E_max; ++g) {
            auto chain = build_chain(pmfs.idle, pmfs.active, pi_idle(p, dc), g, p.E_max);
            solve(chain);
            const double v = su_throughput(chain, p, dc);
            CHECK(report.by_g[static_cast<std::size_t>(g - 1)].mu_s == v);
            if (v > best) {
                best = v;
                best_g = g;
            }
        }
        CHECK(report.g_star == best_g);
        CHECK(report.mu_s_star == best);
    }
}

TEST_CASE("optimal burst size regression at E_max = 6, lambda_p = 0.3") {
    const auto report = optimize_g(reference(0.3, 0.6, 0.0, 6));
    CHECK(report.g_star == 1);
    CHECK(report.mu_s_star == doctest::Approx(0.106699818973).epsilon(1e-10));
    CHECK(report.pi_idle == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("availability shrinks as G grows at the reference operating points") {
    for (double lp : {0.1, 0.4, 0.7, 1.0}) {
        for (double le : {0.0, 0.5}) {
            const auto report = optimize_g(reference(lp, 0.6, le));
            for (std::size_t g = 1; g < report.by_g.size(); ++g) {
                CHECK(report.by_g[g].availability <= report.by_g[g - 1].availability + 1e-12);
            }
        }
    }
}

TEST_CASE("matrix and vector text export") {
    Eigen::MatrixXd m(2, 2);
    m << 0.25, 0.75, 1.0, 0.0;
    std::ostringstream out;
    write_matrix(out, m);
    CHECK(out.str() == "0.25 0.75\n1 0\n");
    std::ostringstream v;
    write_vector(v, Eigen::RowVectorXd::Constant(3, 0.5));
    CHECK(v.str() == "0.5 0.5 0.5\n");
}
