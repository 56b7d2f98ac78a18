// Command-line front end: analytic evaluation, simulation, sweeps and the
// figure presets.

#include "ehcr/config.hpp"
#include "ehcr/energy_chain.hpp"
#include "ehcr/harvest.hpp"
#include "ehcr/simulator.hpp"
#include "ehcr/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using namespace ehcr;

struct ParamFlags {
    std::string config_path;
    std::map<std::string, std::optional<double>> values;
    std::optional<double> p_max_dbm;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key = value parameter file");
        for (const auto& name : field_names()) {
            auto& slot = values[name];
            std::string flag = "--" + name;
            for (auto& c : flag) {
                if (c == '_') c = '-';
            }
            app->add_option(flag, slot, "override " + name);
        }
        app->add_option("--p-max-dbm", p_max_dbm, "PU power cap in dBm (overrides --P-max)");
    }

    SystemParams resolve(SystemParams base = {}) const {
        if (!config_path.empty()) base = load_config_file(config_path, base);
        for (const auto& [name, v] : values) {
            if (v) set_field(base, name, *v);
        }
        if (p_max_dbm) base.P_max = dbm_to_watts(*p_max_dbm);
        return base;
    }
};

struct SimFlags {
    SimConfig sim;
    void attach(CLI::App* app) {
        app->add_option("--seed", sim.seed, "RNG seed");
        app->add_option("--slots", sim.n_slots, "slots per simulation run");
        app->add_option("--warmup", sim.warmup, "slots discarded before statistics");
    }
};

struct OutputFlags {
    std::string out_path;
    std::string format = "csv";
    void attach(CLI::App* app) {
        app->add_option("--out", out_path, "output file (default stdout)");
        app->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    }
    template <class Fn>
    void write(Fn&& fn) const {
        if (out_path.empty()) {
            fn(std::cout);
            return;
        }
        std::ofstream file(out_path);
        if (!file) throw std::runtime_error("cannot open output file '" + out_path + "'");
        fn(file);
    }
};

struct GridFlags {
    std::string param;
    std::vector<double> grid;
    std::optional<double> from, to, step;
    std::string engine = "analytic";
    std::string g_policy = "optimal";
    unsigned workers = 0;

    void attach(CLI::App* app, bool engine_flag) {
        app->add_option("--param", param, "swept parameter name")->required();
        app->add_option("--grid", grid, "explicit grid values")->delimiter(',');
        app->add_option("--from", from, "grid start");
        app->add_option("--to", to, "grid end (inclusive)");
        app->add_option("--step", step, "grid step");
        if (engine_flag) {
            app->add_option("--engine", engine, "analytic|simulate|both")
                ->check(CLI::IsMember({"analytic", "simulate", "both"}));
        }
        app->add_option("--g-policy", g_policy, "burst size for simulation: optimal|fixed")
            ->check(CLI::IsMember({"optimal", "fixed"}));
        app->add_option("--workers", workers, "worker threads (0 = all cores)");
    }

    std::vector<double> resolve_grid() const {
        if (!grid.empty()) return grid;
        if (!(from && to && step) || !(*step > 0.0)) {
            throw std::invalid_argument("give --grid, or --from/--to/--step with step > 0");
        }
        std::vector<double> g;
        const double lo = std::min(*from, *to), hi = std::max(*from, *to);
        for (long i = 0;; ++i) {
            const double v = lo + static_cast<double>(i) * *step;
            if (v > hi + 1e-9 * *step) break;
            g.push_back(std::round(v * 1e9) / 1e9);
        }
        if (*from > *to) std::reverse(g.begin(), g.end());
        return g;
    }
};

void print_report(std::ostream& out, const SystemParams& p, const ThroughputReport& rep,
                  OutputFormat format) {
    const auto dc = derive(p);
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j;
        j["R_p"] = dc.R_p;
        j["R_s"] = dc.R_s;
        j["a"] = dc.a;
        j["alpha"] = dc.rf_disabled ? nlohmann::ordered_json() : nlohmann::ordered_json(dc.alpha);
        j["mu_p"] = rep.mu_p;
        j["pi_idle"] = rep.pi_idle;
        j["pu_throughput"] = rep.pu_throughput;
        j["regime"] = to_string(rep.regime);
        j["g_star"] = rep.g_star;
        j["mu_s_star"] = rep.mu_s_star;
        j["mu_e_star"] = rep.mu_e_star;
        auto& by_g = j["by_g"] = nlohmann::ordered_json::array();
        for (const auto& c : rep.by_g) {
            by_g.push_back({{"g", c.g},
                            {"success_prob", c.success},
                            {"availability", c.availability},
                            {"mu_e", c.mu_e},
                            {"mu_s", c.mu_s},
                            {"stationary", to_string(c.info.method)},
                            {"residual", c.info.residual}});
        }
        out << j.dump(2) << '\n';
        return;
    }
    out << std::setprecision(12);
    out << "# R_p=" << dc.R_p << " R_s=" << dc.R_s << " a=" << dc.a;
    if (!dc.rf_disabled) out << " alpha=" << dc.alpha;
    out << "\n# mu_p=" << rep.mu_p << " pi_idle=" << rep.pi_idle << " pu_throughput=" << rep.pu_throughput
        << " regime=" << to_string(rep.regime) << "\n# g_star=" << rep.g_star
        << " mu_s_star=" << rep.mu_s_star << " mu_e_star=" << rep.mu_e_star << '\n';
    out << "g,success_prob,availability,mu_e,mu_s,stationary,residual\n";
    for (const auto& c : rep.by_g) {
        out << c.g << ',' << c.success << ',' << c.availability << ',' << c.mu_e << ',' << c.mu_s << ','
            << to_string(c.info.method) << ',' << c.info.residual << '\n';
    }
}

void print_sim(std::ostream& out, const SimResult& r, OutputFormat format) {
    if (format == OutputFormat::csv) {
        write_sim_result(out, r);
        return;
    }
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["slots"] = r.slots;
    j["G"] = r.g;
    j["pu_throughput_hat"] = r.pu_throughput_hat;
    j["su_throughput_hat"] = r.su_throughput_hat;
    j["pi_idle_hat"] = r.pi_idle_hat;
    j["su_attempt_rate"] = r.su_attempt_rate;
    j["energy_consumption_hat"] = r.energy_consumption_hat;
    j["pu_queue_mean"] = r.pu_queue_mean;
    j["active_slots"] = r.active_slots;
    j["energy_occupancy_hist"] = r.energy_occupancy_hist;
    j["rf_harvest_hist"] = r.rf_harvest_hist;
    j["nature_harvest_hist"] = r.nature_harvest_hist;
    j["active_harvest_hist"] = r.active_harvest_hist;
    j["ledger"] = {{"initial", r.ledger.initial},
                   {"harvested", r.ledger.harvested},
                   {"consumed", r.ledger.consumed},
                   {"dropped", r.ledger.dropped},
                   {"final", r.ledger.final_level}};
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput of an energy-harvesting secondary user sharing a slotted channel"};
    app.require_subcommand(1);

    ParamFlags params;
    SimFlags sim;
    OutputFlags output;
    GridFlags grid;
    std::string preset_name;
    std::string preset_engine = "analytic";
    std::string dump_chain;
    std::string dump_pmf;

    auto* analytic = app.add_subcommand("analytic", "closed-form throughput and optimal burst size");
    params.attach(analytic);
    output.attach(analytic);
    analytic->add_option("--dump-chain", dump_chain, "write Omega and chi for the optimal G to this file");
    analytic->add_option("--dump-pmf", dump_pmf, "write idle/active arrival pmfs and both RF pmf normalizations to this file");

    auto* simulate = app.add_subcommand("simulate", "seeded slot-level Monte Carlo run (uses --G)");
    params.attach(simulate);
    sim.attach(simulate);
    output.attach(simulate);

    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter");
    params.attach(sweep_cmd);
    sim.attach(sweep_cmd);
    output.attach(sweep_cmd);
    grid.attach(sweep_cmd, true);

    auto* compare_cmd = app.add_subcommand("compare", "analytic vs simulated deltas over a sweep");
    params.attach(compare_cmd);
    sim.attach(compare_cmd);
    output.attach(compare_cmd);
    grid.attach(compare_cmd, false);

    auto* preset_cmd = app.add_subcommand("preset", "reproduce a figure's data (fig2|fig3|fig4|fig5)");
    preset_cmd->add_option("name", preset_name, "preset name")
        ->required()
        ->check(CLI::IsMember(preset_names()));
    preset_cmd->add_option("--engine", preset_engine, "analytic|simulate|both")
        ->check(CLI::IsMember({"analytic", "simulate", "both"}));
    sim.attach(preset_cmd);
    output.attach(preset_cmd);

    CLI11_PARSE(app, argc, argv);

    SystemParams p;
    try {
        if (!preset_cmd->parsed()) p = validate(params.resolve());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto format = parse_format(output.format);
        if (analytic->parsed()) {
            const auto dc = derive(p);
            const auto pmfs = arrival_pmfs(p, dc);
            const auto rep = optimize_g(p, dc, pmfs);
            output.write([&](std::ostream& out) { print_report(out, p, rep, format); });
            if (!dump_chain.empty()) {
                std::ofstream f(dump_chain);
                const auto chain = solved_chain(p, dc, pmfs, rep.g_star);
                f << "# Omega (G=" << chain.g << ")\n";
                write_matrix(f, chain.omega);
                f << "# chi\n";
                write_vector(f, chain.chi);
            }
            if (!dump_pmf.empty()) {
                std::ofstream f(dump_pmf);
                write_pmf(f, pmfs.idle);
                write_pmf(f, pmfs.active);
                write_pmf(f, rf_pmf(p, dc));
                write_pmf(f, rf_pmf(p, dc, kDefaultTailEpsilon, RfNormalization::joint));
            }
        } else if (simulate->parsed()) {
            const auto r = run(p, sim.sim);
            output.write([&](std::ostream& out) { print_sim(out, r, format); });
        } else if (sweep_cmd->parsed() || compare_cmd->parsed()) {
            SweepSpec spec;
            spec.swept_param = grid.param;
            spec.grid = grid.resolve_grid();
            spec.fixed = p;
            spec.engines = parse_engines(grid.engine);
            spec.sim_burst = grid.g_policy == "fixed" ? SimBurst::fixed : SimBurst::optimal;
            spec.sim = sim.sim;
            spec.workers = grid.workers;
            try {
                validate_spec(spec);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return 2;
            }
            if (compare_cmd->parsed()) {
                const auto rows = compare(spec);
                output.write([&](std::ostream& out) { write_compare(out, rows, format); });
            } else {
                const auto result = sweep(spec);
                output.write([&](std::ostream& out) { write_sweep(out, result, format); });
            }
        } else if (preset_cmd->parsed()) {
            SweepSpec spec = preset(preset_name);
            spec.engines = parse_engines(preset_engine);
            spec.sim = sim.sim;
            const auto result = sweep(spec);
            output.write([&](std::ostream& out) { write_sweep(out, result, format); });
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
