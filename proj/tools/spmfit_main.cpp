#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spmfit/campaign.hpp"
#include "spmfit/config.hpp"
#include "spmfit/errors.hpp"

namespace {

// Exit codes: 0 success, 2 configuration problem, 3 simulation infeasible,
// 4 missing input artifact, 1 anything else.
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitMissingInput = 4;

struct CommonFlags {
    std::string config_path;
    std::string cases;
    std::string scenarios;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config_path, "Experiment config JSON");
    cmd->add_option("--cases", f.cases, "Case id list, e.g. 1,4,7-9");
    cmd->add_option("--scenarios", f.scenarios, "Scenario id list");
    cmd->add_option("--out", f.out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", [&f](const std::vector<std::string>& v) {
        f.seed = std::stoull(v.at(0));
        return true;
    }, "Swarm RNG seed (overrides config)");
    cmd->add_option("--workers", [&f](const std::vector<std::string>& v) {
        f.workers = std::stoi(v.at(0));
        return true;
    }, "Parallel worker limit");
}

spmfit::ExperimentConfig make_config(const CommonFlags& f)
{
    spmfit::ExperimentConfig cfg = f.config_path.empty()
                                       ? spmfit::ExperimentConfig::defaults()
                                       : spmfit::ExperimentConfig::load(f.config_path);
    if (!f.cases.empty()) cfg.cases = spmfit::parse_id_list(f.cases);
    if (!f.scenarios.empty()) cfg.scenarios = spmfit::parse_id_list(f.scenarios);
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.seed) cfg.swarm.rng_seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grouped-parameter SPM identification workbench"};
    app.require_subcommand(1);

    CommonFlags synth_f, est_f, val_f, ana_f, rep_f;
    std::string metrics_csv;
    std::string ocp_export_dir;

    CLI::App* synth = app.add_subcommand("synth", "Generate base profiles and scenario datasets");
    add_common(synth, synth_f);

    CLI::App* est = app.add_subcommand("estimate", "Run PSO estimation for the selected cases");
    add_common(est, est_f);

    CLI::App* val = app.add_subcommand("validate", "Cross-validate cases over scenarios");
    add_common(val, val_f);

    CLI::App* ana = app.add_subcommand("analyze", "Cost table, optima and level reports");
    add_common(ana, ana_f);
    ana->add_option("--metrics", metrics_csv,
                    "Metrics CSV (case_id,e_y_v,e_theta,t_total_h); bypasses campaign artifacts");

    CLI::App* rep = app.add_subcommand("report", "Print a human-readable summary");
    add_common(rep, rep_f);

    CLI::App* ocp = app.add_subcommand("export-ocp", "Write the built-in OCP tables as CSV");
    ocp->add_option("--out", ocp_export_dir, "Target directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            spmfit::campaign::run_synth(make_config(synth_f));
            std::cout << "synth: wrote datasets and manifest\n";
        } else if (est->parsed()) {
            const auto cfg = make_config(est_f);
            const auto outcomes = spmfit::campaign::run_estimate(cfg, cfg.cases);
            for (const auto& o : outcomes)
                std::cout << "case " << o.case_id << ": training RMSE " << o.training_rmse_v
                          << " V, t_opt " << o.t_opt_h * 3600.0 << " s\n";
        } else if (val->parsed()) {
            const auto m = spmfit::campaign::run_validate(make_config(val_f));
            std::cout << "validate: wrote " << m.n_cases() << "x" << m.n_scenarios()
                      << " RMSE matrix\n";
        } else if (ana->parsed()) {
            const auto cfg = make_config(ana_f);
            spmfit::campaign::run_analyze(
                cfg, metrics_csv.empty() ? std::nullopt : std::make_optional(metrics_csv));
            std::cout << "analyze: wrote cost table and optima\n";
        } else if (rep->parsed()) {
            spmfit::campaign::run_report(make_config(rep_f), std::cout);
        } else if (ocp->parsed()) {
            spmfit::OcpCurve::default_graphite().write_csv(ocp_export_dir +
                                                           "/ocp_graphite_default.csv");
            spmfit::OcpCurve::default_nmc().write_csv(ocp_export_dir + "/ocp_nmc_default.csv");
            std::cout << "export-ocp: wrote default curve tables\n";
        }
        return 0;
    } catch (const spmfit::SimulationInfeasible& e) {
        std::cerr << "simulation infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        if (msg.find("missing") != std::string::npos) {
            std::cerr << "missing input: " << msg << "\n";
            return kExitMissingInput;
        }
        std::cerr << "error: " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
