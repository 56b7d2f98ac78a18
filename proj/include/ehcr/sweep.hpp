#pragma once

#include "ehcr/config.hpp"
#include "ehcr/energy_chain.hpp"
#include "ehcr/simulator.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ehcr {

enum class Engines { analytic, simulate, both };
enum class SimBurst {
    optimal,  ///< simulate with the analytic g_star of the point
    fixed,    ///< simulate with params.G
};
enum class OutputFormat { csv, json };

Engines parse_engines(const std::string& text);
OutputFormat parse_format(const std::string& text);
const char* to_string(Engines engines);

/// One curve: parameter overrides applied on top of SweepSpec::fixed.
struct SweepSeries {
    std::string label;
    std::vector<std::pair<std::string, double>> overrides;
};

struct SweepSpec {
    std::string swept_param;
    std::vector<double> grid;
    SystemParams fixed;
    std::vector<SweepSeries> series{SweepSeries{}};
    Engines engines = Engines::analytic;
    SimBurst sim_burst = SimBurst::optimal;
    SimConfig sim;
    double epsilon = kDefaultTailEpsilon;
    unsigned workers = 0;   ///< 0 = hardware concurrency
};

/// Throws std::invalid_argument when the grid is empty or not strictly
/// monotone, or the swept/override names are not parameters.
void validate_spec(const SweepSpec& spec);

struct AnalyticPoint {
    ThroughputReport report;
    RowVector chi;          ///< stationary vector for g_star
};

struct SweepPoint {
    std::size_t series_index = 0;
    std::string series;
    std::size_t grid_index = 0;
    double value = 0.0;
    SystemParams params;
    std::optional<AnalyticPoint> analytic;
    std::optional<SimResult> simulated;
    std::string error;      ///< non-empty when the point failed
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepPoint> points;     ///< series-major, then grid order
};

/// Evaluates every (series, grid value) point on a worker pool. A failing
/// point records its error and the sweep continues.
SweepResult sweep(const SweepSpec& spec);

struct CompareRow {
    std::string series;
    std::size_t grid_index = 0;
    double value = 0.0;
    int g = 1;
    double mu_s_analytic = 0.0, mu_s_sim = 0.0;
    double pi_idle_analytic = 0.0, pi_idle_sim = 0.0;
    double pu_thr_analytic = 0.0, pu_thr_sim = 0.0;
    double occupancy_tv = 0.0;
    std::string error;

    double mu_s_abs() const;
    double mu_s_rel() const;    ///< relative to the simulated value; 0 when both are 0
    double pi_idle_abs() const;
    double pu_thr_abs() const;
};

/// Runs the spec with both engines (simulating at each point's g_star) and
/// pairs the results.
std::vector<CompareRow> compare(SweepSpec spec);
std::vector<CompareRow> compare_rows(const SweepResult& result);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);
double total_variation(const RowVector& chi, const std::vector<double>& hist);

/// Column order of write_sweep's CSV output.
const std::vector<std::string>& sweep_columns();
const std::vector<std::string>& compare_columns();

void write_sweep(std::ostream& out, const SweepResult& result, OutputFormat format);
void write_compare(std::ostream& out, const std::vector<CompareRow>& rows, OutputFormat format);

/// Figure presets: fig2, fig3, fig4, fig5. Throws on unknown names.
SweepSpec preset(const std::string& name);
const std::vector<std::string>& preset_names();

}  // namespace ehcr
