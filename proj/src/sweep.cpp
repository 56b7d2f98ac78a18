#include "ehcr/sweep.hpp"

#include "ehcr/harvest.hpp"
#include "ehcr/primary_link.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace ehcr {

namespace {

std::vector<double> linear_grid(double from, double to, double step) {
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        // Rounded so that grid values print cleanly (0.35, not 0.35000000000000003).
        grid.push_back(std::round((from + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return grid;
}

SweepPoint evaluate(const SweepSpec& spec, std::size_t series_index, std::size_t grid_index) {
    SweepPoint point;
    point.series_index = series_index;
    point.series = spec.series[series_index].label;
    point.grid_index = grid_index;
    point.value = spec.grid[grid_index];
    try {
        SystemParams p = spec.fixed;
        for (const auto& [name, v] : spec.series[series_index].overrides) set_field(p, name, v);
        set_field(p, spec.swept_param, point.value);
        // G is not an input of the analytic optimization; keep it feasible
        // unless it is the swept quantity.
        if (spec.swept_param != "G" && spec.swept_param != "g") {
            p.G = std::clamp(p.G, 1, std::max(1, p.E_max));
        }
        point.params = validate(p);

        const bool want_analytic = spec.engines != Engines::simulate;
        const bool want_sim = spec.engines != Engines::analytic;
        std::optional<AnalyticPoint> analytic;
        if (want_analytic || (want_sim && spec.sim_burst == SimBurst::optimal)) {
            const auto dc = derive(point.params);
            const auto pmfs = arrival_pmfs(point.params, dc, spec.epsilon);
            AnalyticPoint a;
            a.report = optimize_g(point.params, dc, pmfs);
            a.chi = solved_chain(point.params, dc, pmfs, a.report.g_star).chi;
            analytic = std::move(a);
        }
        if (want_sim) {
            SystemParams sp = point.params;
            if (spec.sim_burst == SimBurst::optimal) sp.G = analytic->report.g_star;
            point.simulated = run(sp, spec.sim);
        }
        if (want_analytic) point.analytic = std::move(analytic);
    } catch (const std::exception& e) {
        point.error = e.what();
    }
    return point;
}

std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

using Record = std::vector<std::pair<std::string, nlohmann::json>>;

void emit(std::ostream& out, const std::vector<std::string>& columns, const std::vector<Record>& rows,
          OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json array = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (const auto& [k, v] : row) obj[k] = v;
            array.push_back(std::move(obj));
        }
        out << array.dump(2) << '\n';
        return;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out << ',';
            const auto it = std::find_if(row.begin(), row.end(),
                                         [&](const auto& kv) { return kv.first == columns[c]; });
            if (it == row.end() || it->second.is_null()) continue;
            const auto& v = it->second;
            if (v.is_string()) {
                out << csv_field(v.get<std::string>());
            } else if (v.is_number_float()) {
                out << format_number(v.get<double>());
            } else {
                out << v.dump();
            }
        }
        out << '\n';
    }
}

}  // namespace

Engines parse_engines(const std::string& text) {
    if (text == "analytic") return Engines::analytic;
    if (text == "simulate") return Engines::simulate;
    if (text == "both") return Engines::both;
    throw std::invalid_argument("unknown engine '" + text + "' (analytic|simulate|both)");
}

OutputFormat parse_format(const std::string& text) {
    if (text == "csv") return OutputFormat::csv;
    if (text == "json") return OutputFormat::json;
    throw std::invalid_argument("unknown format '" + text + "' (csv|json)");
}

const char* to_string(Engines engines) {
    switch (engines) {
        case Engines::analytic: return "analytic";
        case Engines::simulate: return "simulate";
        case Engines::both: return "both";
    }
    return "unknown";
}

void validate_spec(const SweepSpec& spec) {
    if (!is_field(spec.swept_param)) {
        throw std::invalid_argument("sweep: '" + spec.swept_param + "' is not a parameter");
    }
    if (spec.grid.empty()) throw std::invalid_argument("sweep: grid is empty");
    bool increasing = true, decreasing = true;
    for (std::size_t i = 1; i < spec.grid.size(); ++i) {
        increasing = increasing && spec.grid[i] > spec.grid[i - 1];
        decreasing = decreasing && spec.grid[i] < spec.grid[i - 1];
    }
    if (!increasing && !decreasing) throw std::invalid_argument("sweep: grid must be strictly monotone");
    if (spec.series.empty()) throw std::invalid_argument("sweep: no series");
    for (const auto& s : spec.series) {
        for (const auto& [name, v] : s.overrides) {
            if (!is_field(name)) throw std::invalid_argument("sweep: override '" + name + "' is not a parameter");
        }
    }
}

SweepResult sweep(const SweepSpec& spec) {
    validate_spec(spec);
    SweepResult result;
    result.spec = spec;
    const std::size_t per_series = spec.grid.size();
    const std::size_t total = per_series * spec.series.size();
    result.points.resize(total);

    unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            result.points[i] = evaluate(spec, i / per_series, i % per_series);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return result;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    const std::size_t n = std::max(p.size(), q.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        sum += std::abs(a - b);
    }
    return 0.5 * sum;
}

double total_variation(const RowVector& chi, const std::vector<double>& hist) {
    return total_variation(std::vector<double>(chi.data(), chi.data() + chi.size()), hist);
}

double CompareRow::mu_s_abs() const { return std::abs(mu_s_analytic - mu_s_sim); }
double CompareRow::mu_s_rel() const {
    if (mu_s_sim == 0.0) return mu_s_analytic == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return mu_s_abs() / std::abs(mu_s_sim);
}
double CompareRow::pi_idle_abs() const { return std::abs(pi_idle_analytic - pi_idle_sim); }
double CompareRow::pu_thr_abs() const { return std::abs(pu_thr_analytic - pu_thr_sim); }

std::vector<CompareRow> compare_rows(const SweepResult& result) {
    std::vector<CompareRow> rows;
    for (const auto& pt : result.points) {
        CompareRow row;
        row.series = pt.series;
        row.grid_index = pt.grid_index;
        row.value = pt.value;
        row.error = pt.error;
        if (pt.analytic && pt.simulated) {
            const auto& rep = pt.analytic->report;
            row.g = pt.simulated->g;
            const auto& cand = rep.by_g.at(static_cast<std::size_t>(row.g - 1));
            row.mu_s_analytic = cand.mu_s;
            row.mu_s_sim = pt.simulated->su_throughput_hat;
            row.pi_idle_analytic = rep.pi_idle;
            row.pi_idle_sim = pt.simulated->pi_idle_hat;
            row.pu_thr_analytic = rep.pu_throughput;
            row.pu_thr_sim = pt.simulated->pu_throughput_hat;
            if (row.g == rep.g_star) {
                row.occupancy_tv = total_variation(pt.analytic->chi, pt.simulated->energy_occupancy_hist);
            } else {
                const auto dc = derive(pt.params);
                const auto chain = solved_chain(pt.params, dc, arrival_pmfs(pt.params, dc), row.g);
                row.occupancy_tv = total_variation(chain.chi, pt.simulated->energy_occupancy_hist);
            }
        } else if (row.error.empty()) {
            row.error = "point lacks an analytic or simulated result";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CompareRow> compare(SweepSpec spec) {
    spec.engines = Engines::both;
    return compare_rows(sweep(spec));
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> columns = {
        "series", "index", "param", "value", "engine", "regime", "mu_p", "pi_idle", "pu_throughput",
        "g", "mu_s", "mu_e", "success_prob", "availability", "seed", "slots", "error"};
    return columns;
}

const std::vector<std::string>& compare_columns() {
    static const std::vector<std::string> columns = {
        "series", "index", "value", "g", "mu_s_analytic", "mu_s_sim", "mu_s_abs", "mu_s_rel",
        "pi_idle_analytic", "pi_idle_sim", "pi_idle_abs", "pu_thr_analytic", "pu_thr_sim",
        "pu_thr_abs", "occupancy_tv", "error"};
    return columns;
}

void write_sweep(std::ostream& out, const SweepResult& result, OutputFormat format) {
    std::vector<Record> rows;
    const auto& param = result.spec.swept_param;
    for (const auto& pt : result.points) {
        const Record head = {{"series", pt.series},
                             {"index", pt.grid_index},
                             {"param", param},
                             {"value", pt.value}};
        if (!pt.error.empty()) {
            Record r = head;
            r.emplace_back("engine", to_string(result.spec.engines));
            r.emplace_back("error", pt.error);
            rows.push_back(std::move(r));
            continue;
        }
        if (pt.analytic) {
            const auto& rep = pt.analytic->report;
            const auto& best = rep.best();
            Record r = head;
            r.emplace_back("engine", "analytic");
            r.emplace_back("regime", to_string(rep.regime));
            r.emplace_back("mu_p", rep.mu_p);
            r.emplace_back("pi_idle", rep.pi_idle);
            r.emplace_back("pu_throughput", rep.pu_throughput);
            r.emplace_back("g", rep.g_star);
            r.emplace_back("mu_s", rep.mu_s_star);
            r.emplace_back("mu_e", rep.mu_e_star);
            r.emplace_back("success_prob", best.success);
            r.emplace_back("availability", best.availability);
            rows.push_back(std::move(r));
        }
        if (pt.simulated) {
            const auto& s = *pt.simulated;
            double available = 0.0;
            for (std::size_t j = static_cast<std::size_t>(s.g); j < s.energy_occupancy_hist.size(); ++j) {
                available += s.energy_occupancy_hist[j];
            }
            Record r = head;
            r.emplace_back("engine", "simulate");
            r.emplace_back("pi_idle", s.pi_idle_hat);
            r.emplace_back("pu_throughput", s.pu_throughput_hat);
            r.emplace_back("g", s.g);
            r.emplace_back("mu_s", s.su_throughput_hat);
            r.emplace_back("mu_e", s.energy_consumption_hat);
            r.emplace_back("availability", available);
            r.emplace_back("seed", s.seed);
            r.emplace_back("slots", s.slots);
            rows.push_back(std::move(r));
        }
    }
    emit(out, sweep_columns(), rows, format);
}

void write_compare(std::ostream& out, const std::vector<CompareRow>& rows, OutputFormat format) {
    std::vector<Record> records;
    for (const auto& row : rows) {
        Record r = {{"series", row.series}, {"index", row.grid_index}, {"value", row.value}};
        if (row.error.empty()) {
            r.emplace_back("g", row.g);
            r.emplace_back("mu_s_analytic", row.mu_s_analytic);
            r.emplace_back("mu_s_sim", row.mu_s_sim);
            r.emplace_back("mu_s_abs", row.mu_s_abs());
            const double rel = row.mu_s_rel();
            r.emplace_back("mu_s_rel", std::isfinite(rel) ? nlohmann::json(rel) : nlohmann::json());
            r.emplace_back("pi_idle_analytic", row.pi_idle_analytic);
            r.emplace_back("pi_idle_sim", row.pi_idle_sim);
            r.emplace_back("pi_idle_abs", row.pi_idle_abs());
            r.emplace_back("pu_thr_analytic", row.pu_thr_analytic);
            r.emplace_back("pu_thr_sim", row.pu_thr_sim);
            r.emplace_back("pu_thr_abs", row.pu_thr_abs());
            r.emplace_back("occupancy_tv", row.occupancy_tv);
        } else {
            r.emplace_back("error", row.error);
        }
        records.push_back(std::move(r));
    }
    emit(out, compare_columns(), records, format);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5"};
    return names;
}

SweepSpec preset(const std::string& name) {
    SweepSpec spec;
    spec.fixed = SystemParams{};  // reference constants, P_max = 10 dBm
    spec.fixed.lambda_e = 0.0;
    spec.swept_param = "lambda_p";
    spec.grid = linear_grid(0.0, 1.0, 0.05);

    if (name == "fig2") {
        spec.series.clear();
        for (double eta : {0.4, 0.6}) {
            for (int e_max : {6, 10}) {
                std::ostringstream label;
                label << "eta=" << eta << " E_max=" << e_max;
                spec.series.push_back({label.str(), {{"eta", eta}, {"E_max", e_max}}});
            }
        }
    } else if (name == "fig3") {
        spec.swept_param = "sigma_ppd";
        spec.grid = linear_grid(0.1, 3.0, 0.1);
        spec.fixed.eta = 0.6;
        spec.fixed.lambda_p = 0.4;
        spec.fixed.E_max = 10;
        spec.fixed.P_max = dbm_to_watts(1.76);
        spec.series = {{"eta=0.6 lambda_p=0.4 E_max=10 P_max=1.76dBm", {}}};
    } else if (name == "fig4") {
        spec.fixed.E_max = 6;
        spec.series = {
            {"nature only", {{"eta", 0.0}, {"lambda_e", 0.5}}},
            {"rf only", {{"eta", 0.6}, {"lambda_e", 0.0}}},
            {"combined", {{"eta", 0.6}, {"lambda_e", 0.5}}},
        };
    } else if (name == "fig5") {
        spec.fixed.eta = 0.2;
        spec.series.clear();
        for (double lambda_e : {0.1, 0.3, 0.5}) {
            for (int e_max : {6, 10}) {
                std::ostringstream label;
                label << "lambda_e=" << lambda_e << " E_max=" << e_max;
                spec.series.push_back({label.str(), {{"lambda_e", lambda_e}, {"E_max", e_max}}});
            }
        }
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (fig2|fig3|fig4|fig5)");
    }
    return spec;
}

}  // namespace ehcr
