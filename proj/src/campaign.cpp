#include "spmfit/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spmfit/scenarios.hpp"

namespace spmfit::campaign {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string designation_slug(const std::string& designation)
{
    if (designation == "C/5") return "c5";
    if (designation == "C/2") return "c2";
    if (designation == "1C") return "1c";
    if (designation == "P") return "p";
    if (designation == "DST") return "dst";
    throw std::invalid_argument("unknown designation '" + designation + "'");
}

std::string two_digit(int id)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", id);
    return buf;
}

void require_file(const std::string& path, const std::string& what)
{
    if (!fs::exists(path))
        throw std::runtime_error("missing " + what + ": '" + path +
                                 "' (run the producing subcommand first)");
}

ordered_json params_json(const GroupedParameters& p)
{
    ordered_json j;
    const auto vals = p.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d)
        j[GroupedParameters::component_names()[d]] = vals[d];
    return j;
}

GroupedParameters params_from(const json& j)
{
    auto vals = GroupedParameters{}.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d)
        vals[d] = j.at(GroupedParameters::component_names()[d]).get<double>();
    return GroupedParameters::from_array(vals);
}

TimeSeries load_series(const std::string& csv)
{
    TimeSeries ts = TimeSeries::read_csv(csv);
    const std::string side = TimeSeries::sidecar_path(csv);
    if (fs::exists(side)) ts.read_sidecar(side);
    return ts;
}

std::uint64_t per_case_seed(std::uint64_t base, int case_id)
{
    return base * 1000003ULL + static_cast<std::uint64_t>(case_id);
}

} // namespace

std::string base_csv_path(const std::string& out_dir, const std::string& designation)
{
    return out_dir + "/base_" + designation_slug(designation) + ".csv";
}
std::string scenario_csv_path(const std::string& out_dir, int id)
{
    return out_dir + "/scenario_" + two_digit(id) + ".csv";
}
std::string case_json_path(const std::string& out_dir, int id)
{
    return out_dir + "/case_" + two_digit(id) + ".json";
}
std::string manifest_path(const std::string& out_dir) { return out_dir + "/manifest.json"; }
std::string matrix_csv_path(const std::string& out_dir) { return out_dir + "/rmse_matrix.csv"; }
std::string cases_json_path(const std::string& out_dir) { return out_dir + "/cases.json"; }
std::string cost_csv_path(const std::string& out_dir) { return out_dir + "/cost_table.csv"; }
std::string optima_json_path(const std::string& out_dir) { return out_dir + "/optima.json"; }
std::string levels_json_path(const std::string& out_dir) { return out_dir + "/levels.json"; }

std::string file_checksum(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checksum: cannot open '" + path + "'");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void run_synth(const ExperimentConfig& cfg)
{
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    const ModelContext ctx = cfg.model_context();
    BaseSeriesCache cache(ctx, cfg.limits, cfg.pulse, cfg.dst);

    ordered_json manifest;
    manifest["bases"] = ordered_json::array();
    for (const char* d : {"C/5", "C/2", "1C", "P", "DST"}) {
        const TimeSeries& s = cache.get(d);
        const std::string csv = base_csv_path(cfg.output_dir, d);
        s.write_csv(csv);
        s.write_sidecar(TimeSeries::sidecar_path(csv));
        manifest["bases"].push_back({{"designation", d},
                                     {"file", csv},
                                     {"rows", s.size()},
                                     {"duration_h", s.duration_h()},
                                     {"equivalent_c_rate",
                                      equivalent_c_rate(s, cfg.limits.nominal_capacity_ah)},
                                     {"degenerate", s.degenerate},
                                     {"checksum", file_checksum(csv)}});
    }

    const auto durations = cache.measured_durations_h();
    const auto scenarios = enumerate_scenarios(durations);
    manifest["scenarios"] = ordered_json::array();
    for (const auto& sc : scenarios) {
        if (std::find(cfg.scenarios.begin(), cfg.scenarios.end(), sc.id) == cfg.scenarios.end())
            continue;
        const TimeSeries ds = build_dataset(sc, cache);
        const std::string csv = scenario_csv_path(cfg.output_dir, sc.id);
        ds.write_csv(csv);
        ds.write_sidecar(TimeSeries::sidecar_path(csv));
        manifest["scenarios"].push_back(
            {{"id", sc.id},
             {"members", sc.members},
             {"duration_h", sc.duration_h},
             {"rows", ds.size()},
             {"file", csv},
             {"equivalent_c_rate", equivalent_c_rate(ds, cfg.limits.nominal_capacity_ah)},
             {"checksum", file_checksum(csv)}});
    }

    std::ofstream out(manifest_path(cfg.output_dir));
    if (!out) throw std::runtime_error("synth: cannot write manifest");
    out << manifest.dump(2) << "\n";
}

std::vector<CaseOutcome> run_estimate(const ExperimentConfig& cfg, const std::vector<int>& case_ids)
{
    cfg.validate();
    const ModelContext ctx = cfg.model_context();
    const SearchSpace space = cfg.effective_search_space();

    struct Job {
        int case_id;
        TimeSeries dataset;
    };
    std::vector<Job> jobs;
    for (int id : case_ids) {
        const std::string csv = scenario_csv_path(cfg.output_dir, id);
        require_file(csv, "scenario dataset");
        jobs.push_back({id, load_series(csv)});
    }

    std::vector<CaseOutcome> outcomes(jobs.size());
    const int case_workers = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
    const int inner_workers = case_workers > 1 ? 1 : cfg.workers;

    auto run_one = [&](std::size_t idx) {
        const Job& job = jobs[idx];
        SwarmConfig sw = cfg.swarm;
        sw.rng_seed = per_case_seed(cfg.swarm.rng_seed, job.case_id);
        const EstimationResult res = estimate(job.dataset, space, sw, ctx, inner_workers);

        const double n = static_cast<double>(job.dataset.size());
        const double training_rmse =
            res.best_fitness >= sw.penalty_fitness ? std::nan("") : std::sqrt(res.best_fitness / n);
        const double t_exp_h = job.dataset.duration_h();
        const double t_opt_h = res.t_opt_s / 3600.0;

        ordered_json j;
        j["case_id"] = job.case_id;
        j["seed"] = sw.rng_seed;
        j["theta_star"] = params_json(res.theta_star);
        j["best_fitness"] = res.best_fitness;
        j["training_rmse_v"] = training_rmse;
        j["t_opt_s"] = res.t_opt_s;
        j["t_opt_h"] = t_opt_h;
        j["t_exp_h"] = t_exp_h;
        j["t_total_h"] = t_opt_h + t_exp_h;
        j["history"] = res.history;
        std::ofstream out(case_json_path(cfg.output_dir, job.case_id));
        if (!out) throw std::runtime_error("estimate: cannot write case file");
        out << j.dump(2) << "\n";

        outcomes[idx] = {job.case_id, training_rmse, t_opt_h, t_exp_h};
    };

    if (case_workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < case_workers; ++w)
            pool.emplace_back([&, w]() {
                for (std::size_t i = static_cast<std::size_t>(w); i < jobs.size();
                     i += static_cast<std::size_t>(case_workers))
                    run_one(i);
            });
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

namespace {

struct CaseFile {
    int case_id;
    GroupedParameters theta_star;
    double t_opt_h;
    double t_exp_h;
    double t_total_h;
};

CaseFile read_case_file(const std::string& path)
{
    std::ifstream in(path);
    json j;
    in >> j;
    return {j.at("case_id").get<int>(), params_from(j.at("theta_star")),
            j.at("t_opt_h").get<double>(), j.at("t_exp_h").get<double>(),
            j.at("t_total_h").get<double>()};
}

} // namespace

RmseMatrix run_validate(const ExperimentConfig& cfg)
{
    cfg.validate();
    const ModelContext ctx = cfg.model_context();

    std::vector<CaseInput> cases;
    for (int id : cfg.cases) {
        const std::string path = case_json_path(cfg.output_dir, id);
        require_file(path, "case estimate");
        const CaseFile cf = read_case_file(path);
        cases.push_back({cf.case_id, cf.theta_star});
    }
    std::vector<std::pair<int, TimeSeries>> datasets;
    for (int id : cfg.scenarios) {
        const std::string csv = scenario_csv_path(cfg.output_dir, id);
        require_file(csv, "scenario dataset");
        datasets.emplace_back(id, load_series(csv));
    }
    RmseMatrix m = cross_validate(cases, datasets, ctx, cfg.workers);
    m.write_csv(matrix_csv_path(cfg.output_dir));
    return m;
}

std::vector<CaseMetrics> read_metrics_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("case_id,e_y_v,e_theta,t_total_h", 0) != 0)
        throw std::runtime_error("metrics: '" + path +
                                 "' must start with header case_id,e_y_v,e_theta,t_total_h");
    std::vector<CaseMetrics> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c, d;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c, ',') || !std::getline(row, d))
            throw std::runtime_error("metrics: malformed row '" + line + "'");
        out.push_back({std::stoi(a), std::stod(b), std::stod(c), std::stod(d)});
    }
    return out;
}

void run_analyze(const ExperimentConfig& cfg, const std::optional<std::string>& metrics_csv)
{
    cfg.validate();
    fs::create_directories(cfg.output_dir);

    std::vector<CaseMetrics> metrics;
    bool have_matrix = false;
    RmseMatrix matrix;

    if (metrics_csv) {
        require_file(*metrics_csv, "metrics CSV");
        metrics = read_metrics_csv(*metrics_csv);
    } else {
        const std::string mpath = matrix_csv_path(cfg.output_dir);
        require_file(mpath, "RMSE matrix");
        matrix = RmseMatrix::read_csv(mpath);
        have_matrix = true;

        // e_y is the validation RMSE on the all-profiles scenario (id 1).
        const auto s1 = std::find(matrix.scenario_ids.begin(), matrix.scenario_ids.end(), 1);
        if (s1 == matrix.scenario_ids.end())
            throw std::runtime_error("analyze: matrix lacks scenario 1, cannot build e_y column");
        const std::size_t col = static_cast<std::size_t>(s1 - matrix.scenario_ids.begin());

        ordered_json cases = ordered_json::array();
        for (std::size_t i = 0; i < matrix.n_cases(); ++i) {
            const int id = matrix.case_ids[i];
            const std::string cpath = case_json_path(cfg.output_dir, id);
            require_file(cpath, "case estimate");
            const CaseFile cf = read_case_file(cpath);
            if (matrix.flagged[i][col])
                throw std::runtime_error("analyze: case " + std::to_string(id) +
                                         " has a flagged scenario-1 entry");
            const ParamErrorReport per = param_errors(cf.theta_star, cfg.ground_truth);
            metrics.push_back({id, matrix.values[i][col], per.delta_dist, cf.t_total_h});

            ordered_json delta = ordered_json::object();
            for (std::size_t d = 0; d < GroupedParameters::kDim; ++d)
                delta[GroupedParameters::component_names()[d]] = per.delta_theta_pct[d];
            cases.push_back({{"case_id", id},
                             {"t_opt_h", cf.t_opt_h},
                             {"t_exp_h", cf.t_exp_h},
                             {"t_total_h", cf.t_total_h},
                             {"e_y_v", matrix.values[i][col]},
                             {"theta_star", params_json(cf.theta_star)},
                             {"delta_theta_pct", delta},
                             {"mean_delta_pct", per.mean_delta_pct},
                             {"delta_dist", per.delta_dist}});
        }
        std::ofstream cout_(cases_json_path(cfg.output_dir));
        cout_ << cases.dump(2) << "\n";
    }

    const CostTable table = cost_table(metrics);
    table.write_csv(cost_csv_path(cfg.output_dir));

    ordered_json optima;
    static const char* kOptionNames[7] = {
        "O1: output error",     "O2: parameter error",  "O3: time requirement",
        "O4: output and parameter error", "O5: output error-time", "O6: parameter error-time",
        "O7: balanced"};
    optima["options"] = ordered_json::array();
    for (int o = 0; o < 7; ++o) {
        const int best = select_optimal(table, o);
        double j_min = 0.0;
        CaseMetrics best_m{};
        for (std::size_t i = 0; i < table.metrics.size(); ++i)
            if (table.metrics[i].case_id == best) {
                j_min = table.j_values[i][static_cast<std::size_t>(o)];
                best_m = table.metrics[i];
            }
        optima["options"].push_back({{"option", kOptionNames[o]},
                                     {"min_j", j_min},
                                     {"case_id", best},
                                     {"e_y_v", best_m.e_y},
                                     {"e_theta", best_m.e_theta},
                                     {"t_total_h", best_m.t_total_h},
                                     {"tie_break", "lowest case id"}});
    }
    std::ofstream oout(optima_json_path(cfg.output_dir));
    oout << optima.dump(2) << "\n";

    if (have_matrix) {
        const auto scenarios = enumerate_scenarios(
            {{"C/5", 0.0}, {"C/2", 0.0}, {"1C", 0.0}, {"P", 0.0}, {"DST", 0.0}});
        std::vector<std::vector<std::string>> members;
        for (int id : matrix.scenario_ids) {
            members.push_back(scenarios[static_cast<std::size_t>(id - 1)].members);
        }
        const LevelReport rep = level_reports(matrix, members, 5);
        std::ofstream lout(levels_json_path(cfg.output_dir));
        lout << rep.to_json() << "\n";
    }
}

void run_report(const ExperimentConfig& cfg, std::ostream& os)
{
    const std::string cost = cost_csv_path(cfg.output_dir);
    const std::string optima = optima_json_path(cfg.output_dir);
    require_file(cost, "cost table (run analyze first)");
    require_file(optima, "optima (run analyze first)");

    const std::string cases = cases_json_path(cfg.output_dir);
    if (fs::exists(cases)) {
        std::ifstream cin_(cases);
        json cj;
        cin_ >> cj;
        char buf[64];

        os << "== Per-case time accounting and validation error ==\n";
        os << std::left << std::setw(6) << "case" << std::setw(11) << "T_opt[h]" << std::setw(11)
           << "T_exp[h]" << std::setw(12) << "T_total[h]" << "e_y [V]\n";
        for (const auto& c : cj) {
            os << std::setw(6) << c.at("case_id").get<int>();
            std::snprintf(buf, sizeof buf, "%.2f", c.at("t_opt_h").get<double>());
            os << std::setw(11) << buf;
            std::snprintf(buf, sizeof buf, "%.2f", c.at("t_exp_h").get<double>());
            os << std::setw(11) << buf;
            std::snprintf(buf, sizeof buf, "%.2f", c.at("t_total_h").get<double>());
            os << std::setw(12) << buf;
            std::snprintf(buf, sizeof buf, "%.4f", c.at("e_y_v").get<double>());
            os << buf << "\n";
        }

        os << "\n== Per-case parameter errors [%] and distance ==\n";
        os << std::left << std::setw(6) << "case";
        for (const char* n : GroupedParameters::component_names()) os << std::setw(11) << n;
        os << std::setw(9) << "mean" << "dist\n";
        for (const auto& c : cj) {
            os << std::setw(6) << c.at("case_id").get<int>();
            for (const char* n : GroupedParameters::component_names()) {
                std::snprintf(buf, sizeof buf, "%.2f", c.at("delta_theta_pct").at(n).get<double>());
                os << std::setw(11) << buf;
            }
            std::snprintf(buf, sizeof buf, "%.2f", c.at("mean_delta_pct").get<double>());
            os << std::setw(9) << buf;
            std::snprintf(buf, sizeof buf, "%.2f", c.at("delta_dist").get<double>());
            os << buf << "\n";
        }
        os << "\n";
    }

    os << "== Per-case metrics and weighted costs ==\n";
    os << std::left << std::setw(6) << "case" << std::setw(10) << "e_y [V]" << std::setw(12)
       << "e_theta" << std::setw(12) << "T_total[h]";
    for (int o = 1; o <= 7; ++o) os << std::setw(8) << ("O" + std::to_string(o));
    os << "\n";
    std::ifstream in(cost);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) continue;
        os << std::setw(6) << cells[0];
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", std::stod(cells[1]));
        os << std::setw(10) << buf;
        std::snprintf(buf, sizeof buf, "%.2f", std::stod(cells[2]));
        os << std::setw(12) << buf;
        std::snprintf(buf, sizeof buf, "%.1f", std::stod(cells[3]));
        os << std::setw(12) << buf;
        for (std::size_t o = 4; o < 11; ++o) {
            std::snprintf(buf, sizeof buf, "%.3f", std::stod(cells[o]));
            os << std::setw(8) << buf;
        }
        os << "\n";
    }

    os << "\n== Optimal case per objective ==\n";
    std::ifstream oin(optima);
    json j;
    oin >> j;
    for (const auto& opt : j.at("options")) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", opt.at("min_j").get<double>());
        os << std::setw(34) << std::left << opt.at("option").get<std::string>() << " J=" << buf
           << "  case " << opt.at("case_id").get<int>() << "\n";
    }

    const std::string lv = levels_json_path(cfg.output_dir);
    if (fs::exists(lv)) {
        std::ifstream lin(lv);
        json l;
        lin >> l;
        os << "\n== RMSE matrix scan ==\n";
        const auto& g = l.at("l1_global_min");
        os << "global minimum: case " << g.at("case_id").get<int>() << " on scenario "
           << g.at("scenario_id").get<int>() << " (" << g.at("rmse_v").get<double>() << " V)\n";
        const auto& d = l.at("l2_diagonal_min");
        os << "diagonal minimum: case " << d.at("case_id").get<int>() << " ("
           << d.at("rmse_v").get<double>() << " V)\n";
        int identical = 0;
        for (const auto& diff : l.at("dataset_diffs"))
            if (diff.at("identical").get<bool>()) ++identical;
        os << identical << " of " << l.at("dataset_diffs").size()
           << " scenarios are minimized by their own estimation dataset\n";
    }
}

} // namespace spmfit::campaign
