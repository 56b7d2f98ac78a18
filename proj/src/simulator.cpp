#include "ehcr/simulator.hpp"

#include "ehcr/primary_link.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace ehcr {

namespace {

enum Stream : std::uint64_t { kArrivals = 1, kPpd, kPs, kSsd, kNature };

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Histogram {
public:
    void add(std::int64_t n) {
        const auto i = static_cast<std::size_t>(n);
        if (i >= counts_.size()) counts_.resize(i + 1, 0);
        ++counts_[i];
        ++total_;
    }
    // Fractions; an empty histogram reports a point mass at zero.
    std::vector<double> fractions() const {
        if (total_ == 0) return {1.0};
        std::vector<double> out(counts_.size());
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            out[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
        }
        return out;
    }
    void ensure_size(std::size_t n) {
        if (counts_.size() < n) counts_.resize(n, 0);
    }

private:
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

// Unit-mean exponential; callers scale by the link's mean gain so that
// parameter points share the same underlying randomness.
double unit_exponential(std::mt19937_64& rng) {
    return std::exponential_distribution<double>(1.0)(rng);
}

double uniform(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::int64_t poisson_draw(std::mt19937_64& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(splitmix64(seed ^ splitmix64(stream)))};
    return std::mt19937_64(seq);
}

std::int64_t harvest_draw(double h_ppd, double h_ps, const SystemParams& params,
                          const DerivedConstants& dc) {
    if (!(h_ppd >= dc.a)) throw std::invalid_argument("harvest_draw: h_ppd below the transmit cutoff a");
    if (!(h_ps >= 0.0)) throw std::invalid_argument("harvest_draw: h_ps must be >= 0");
    if (dc.rf_disabled || !(params.eta > 0.0)) return 0;
    return static_cast<std::int64_t>(std::floor((h_ps / h_ppd) / dc.alpha));
}

double su_gain_threshold(int g, const SystemParams& params, const DerivedConstants& dc) {
    return params.N0 * params.W * (params.T - params.tau) * (std::exp2(dc.R_s) - 1.0) /
           (static_cast<double>(g) * params.e_pkt);
}

SimResult run(const SystemParams& raw, const SimConfig& sim) {
    const SystemParams params = validate(raw);
    if (!(sim.warmup >= 0 && sim.n_slots > sim.warmup)) {
        throw std::invalid_argument("simulate: require n_slots > warmup >= 0");
    }
    const DerivedConstants dc = derive(params);
    const double su_threshold = su_gain_threshold(params.G, params, dc);
    const double nature_mean = params.lambda_e * params.T;

    auto arrivals = substream(sim.seed, kArrivals);
    auto ppd = substream(sim.seed, kPpd);
    auto ps = substream(sim.seed, kPs);
    auto ssd = substream(sim.seed, kSsd);
    auto nature = substream(sim.seed, kNature);

    std::int64_t pu_queue = 0;
    std::int64_t energy = 0;

    SimResult r;
    r.seed = sim.seed;
    r.g = params.G;
    r.ledger.initial = energy;

    Histogram occupancy, rf_hist, nature_hist, active_hist;
    occupancy.ensure_size(static_cast<std::size_t>(params.E_max) + 1);
    std::int64_t pu_delivered = 0, su_delivered = 0, su_attempts = 0, idle_slots = 0;
    std::int64_t consumed_measured = 0;
    double pu_queue_sum = 0.0;

    for (std::int64_t t = 0; t < sim.n_slots; ++t) {
        const bool measure = t >= sim.warmup;
        if (measure) occupancy.add(energy);

        if (uniform(arrivals) < params.lambda_p) ++pu_queue;
        const double h_ppd = params.sigma_ppd * unit_exponential(ppd);
        const double h_ps = params.sigma_ps * unit_exponential(ps);
        const double h_ssd = params.sigma_ssd * unit_exponential(ssd);
        const std::int64_t from_nature = poisson_draw(nature, nature_mean);

        const bool pu_active = pu_queue > 0 && h_ppd >= dc.a;
        std::int64_t from_rf = 0;
        std::int64_t spent = 0;
        bool su_success = false;
        if (pu_active) {
            --pu_queue;
            from_rf = harvest_draw(h_ppd, h_ps, params, dc);
        } else if (energy >= params.G) {
            spent = params.G;
            su_success = h_ssd >= su_threshold;
        }

        // Departures first; this slot's harvest is usable from the next slot.
        energy -= spent;
        const std::int64_t harvested = from_rf + from_nature;
        const std::int64_t room = params.E_max - energy;
        const std::int64_t stored = std::min(harvested, room);
        energy += stored;

        r.ledger.harvested += harvested;
        r.ledger.consumed += spent;
        r.ledger.dropped += harvested - stored;

        if (measure) {
            pu_queue_sum += static_cast<double>(pu_queue);
            nature_hist.add(from_nature);
            if (pu_active) {
                ++pu_delivered;
                ++r.active_slots;
                rf_hist.add(from_rf);
                active_hist.add(harvested);
            } else {
                ++idle_slots;
            }
            if (spent > 0) {
                ++su_attempts;
                consumed_measured += spent;
            }
            if (su_success) ++su_delivered;
        }
    }
    r.ledger.final_level = energy;

    const auto n = static_cast<double>(sim.n_slots - sim.warmup);
    r.slots = sim.n_slots - sim.warmup;
    r.pu_throughput_hat = static_cast<double>(pu_delivered) / n;
    r.su_throughput_hat = static_cast<double>(su_delivered) / n;
    r.pi_idle_hat = static_cast<double>(idle_slots) / n;
    r.su_attempt_rate = static_cast<double>(su_attempts) / n;
    r.energy_consumption_hat = static_cast<double>(consumed_measured) / n;
    r.pu_queue_mean = pu_queue_sum / n;
    r.energy_occupancy_hist = occupancy.fractions();
    r.rf_harvest_hist = rf_hist.fractions();
    r.nature_harvest_hist = nature_hist.fractions();
    r.active_harvest_hist = active_hist.fractions();
    return r;
}

HarvestSamples sample_harvest(const SystemParams& raw, std::int64_t n_samples, std::uint64_t seed) {
    const SystemParams params = validate(raw);
    if (n_samples <= 0) throw std::invalid_argument("sample_harvest: n_samples must be > 0");
    const DerivedConstants dc = derive(params);
    if (!(std::exp(-dc.lambda_y * dc.a) > 1e-9)) {
        throw std::invalid_argument("sample_harvest: PU practically never transmits");
    }

    auto ppd = substream(seed, kPpd);
    auto ps = substream(seed, kPs);
    auto nature = substream(seed, kNature);
    const double nature_mean = params.lambda_e * params.T;

    Histogram rf_hist, nature_hist, combined_hist;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        double h_ppd = params.sigma_ppd * unit_exponential(ppd);
        while (h_ppd < dc.a) h_ppd = params.sigma_ppd * unit_exponential(ppd);
        const double h_ps = params.sigma_ps * unit_exponential(ps);
        const std::int64_t rf = harvest_draw(h_ppd, h_ps, params, dc);
        const std::int64_t nat = poisson_draw(nature, nature_mean);
        rf_hist.add(rf);
        nature_hist.add(nat);
        combined_hist.add(rf + nat);
    }
    HarvestSamples out;
    out.samples = n_samples;
    out.rf_hist = rf_hist.fractions();
    out.nature_hist = nature_hist.fractions();
    out.combined_hist = combined_hist.fractions();
    return out;
}

void write_sim_result(std::ostream& out, const SimResult& r) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    auto list = [&](const char* key, const std::vector<double>& v) {
        out << key << ' ';
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
        out << '\n';
    };
    out << "seed " << r.seed << '\n'
        << "slots " << r.slots << '\n'
        << "G " << r.g << '\n'
        << "pu_throughput_hat " << r.pu_throughput_hat << '\n'
        << "su_throughput_hat " << r.su_throughput_hat << '\n'
        << "pi_idle_hat " << r.pi_idle_hat << '\n'
        << "su_attempt_rate " << r.su_attempt_rate << '\n'
        << "energy_consumption_hat " << r.energy_consumption_hat << '\n'
        << "pu_queue_mean " << r.pu_queue_mean << '\n'
        << "active_slots " << r.active_slots << '\n';
    list("energy_occupancy_hist", r.energy_occupancy_hist);
    list("rf_harvest_hist", r.rf_harvest_hist);
    list("nature_harvest_hist", r.nature_harvest_hist);
    list("active_harvest_hist", r.active_harvest_hist);
    out << "ledger_initial " << r.ledger.initial << '\n'
        << "ledger_harvested " << r.ledger.harvested << '\n'
        << "ledger_consumed " << r.ledger.consumed << '\n'
        << "ledger_dropped " << r.ledger.dropped << '\n'
        << "ledger_final " << r.ledger.final_level << '\n';
    out.flags(flags);
    out.precision(precision);
}

}  // namespace ehcr
