#pragma once

#include "ehcr/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace ehcr {

struct SimConfig {
    std::int64_t n_slots = 1'000'000;
    std::uint64_t seed = 1;
    std::int64_t warmup = 10'000;   ///< slots discarded before statistics
};

/// Packet bookkeeping over the whole run, warmup included.
struct EnergyLedger {
    std::int64_t initial = 0;
    std::int64_t harvested = 0;
    std::int64_t consumed = 0;
    std::int64_t dropped = 0;       ///< arrivals lost to the E_max cap
    std::int64_t final_level = 0;

    bool balanced() const { return consumed + final_level + dropped == harvested + initial; }
    bool operator==(const EnergyLedger&) const = default;
};

struct SimResult {
    std::int64_t slots = 0;                     ///< post-warmup slots measured
    std::uint64_t seed = 0;
    int g = 1;

    double pu_throughput_hat = 0.0;
    double su_throughput_hat = 0.0;
    double pi_idle_hat = 0.0;
    double su_attempt_rate = 0.0;               ///< slots with an SU transmission
    double energy_consumption_hat = 0.0;        ///< packets spent per slot
    double pu_queue_mean = 0.0;

    std::vector<double> energy_occupancy_hist;  ///< queue level at slot start
    std::vector<double> rf_harvest_hist;        ///< over PU-active slots
    std::vector<double> nature_harvest_hist;    ///< over all slots
    std::vector<double> active_harvest_hist;    ///< rf + nature, PU-active slots
    std::int64_t active_slots = 0;

    EnergyLedger ledger;

    bool operator==(const SimResult&) const = default;
};

/// Packets from one PU transmission, floor(eta P*_p h_ps T / e_pkt).
/// Throws std::invalid_argument when h_ppd < a (the PU would stay silent).
std::int64_t harvest_draw(double h_ppd, double h_ps, const SystemParams& params,
                          const DerivedConstants& dc);

/// Minimum h_ssd for which an SU transmission with g packets is decoded.
double su_gain_threshold(int g, const SystemParams& params, const DerivedConstants& dc);

/// Slot-level simulation of the coupled PU queue, fading links and SU
/// energy queue. Uses params.G. Deterministic for a fixed seed.
SimResult run(const SystemParams& params, const SimConfig& sim);

/// Independent per-slot harvest samples, RF draws conditioned on h_ppd >= a
/// by rejection. Oracle for the analytic harvest pmfs.
struct HarvestSamples {
    std::int64_t samples = 0;
    std::vector<double> rf_hist;
    std::vector<double> nature_hist;
    std::vector<double> combined_hist;
};

HarvestSamples sample_harvest(const SystemParams& params, std::int64_t n_samples, std::uint64_t seed);

/// Independent, reproducible substream for (seed, stream id).
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream);

/// Flat `key value` record, histograms as comma-separated lists.
void write_sim_result(std::ostream& out, const SimResult& result);

}  // namespace ehcr
