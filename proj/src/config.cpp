#include "spmfit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spmfit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json params_to_json(const GroupedParameters& p)
{
    ordered_json j;
    const auto vals = p.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d)
        j[GroupedParameters::component_names()[d]] = vals[d];
    return j;
}

GroupedParameters params_from_json(const json& j, const GroupedParameters& base)
{
    auto vals = base.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d) {
        const char* name = GroupedParameters::component_names()[d];
        if (j.contains(name)) vals[d] = j.at(name).get<double>();
    }
    return GroupedParameters::from_array(vals);
}

std::vector<int> default_ids()
{
    std::vector<int> v(31);
    for (int i = 0; i < 31; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return v;
}

} // namespace

void ExperimentConfig::validate() const
{
    ground_truth.validate();
    constants.validate();
    limits.validate();
    solver.validate();
    swarm.validate();
    if (search_space) search_space->validate();
    if (cases.empty() || scenarios.empty())
        throw std::invalid_argument("ExperimentConfig: case/scenario subsets must be non-empty");
    for (int id : cases)
        if (id < 1 || id > 31)
            throw std::invalid_argument("ExperimentConfig: case id " + std::to_string(id) +
                                        " outside 1..31");
    for (int id : scenarios)
        if (id < 1 || id > 31)
            throw std::invalid_argument("ExperimentConfig: scenario id " + std::to_string(id) +
                                        " outside 1..31");
    if (workers < 1) throw std::invalid_argument("ExperimentConfig: workers must be >= 1");
    if (output_dir.empty()) throw std::invalid_argument("ExperimentConfig: output_dir empty");
}

SearchSpace ExperimentConfig::effective_search_space() const
{
    return search_space ? *search_space : SearchSpace::defaults(ground_truth);
}

OcpPair ExperimentConfig::load_ocp() const
{
    OcpCurve neg = ocp_negative_path.empty() ? OcpCurve::default_graphite()
                                             : OcpCurve::load_csv(ocp_negative_path);
    OcpCurve pos = ocp_positive_path.empty() ? OcpCurve::default_nmc()
                                             : OcpCurve::load_csv(ocp_positive_path);
    return {std::move(neg), std::move(pos)};
}

ModelContext ExperimentConfig::model_context() const
{
    return ModelContext{ground_truth, constants, solver, load_ocp()};
}

ExperimentConfig ExperimentConfig::defaults()
{
    ExperimentConfig c;
    c.cases = default_ids();
    c.scenarios = default_ids();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: '" + path + "' is not valid JSON: " + e.what());
    }

    ExperimentConfig c = defaults();
    if (j.contains("ground_truth")) c.ground_truth = params_from_json(j["ground_truth"], c.ground_truth);
    if (j.contains("ocp")) {
        c.ocp_negative_path = j["ocp"].value("negative_csv", c.ocp_negative_path);
        c.ocp_positive_path = j["ocp"].value("positive_csv", c.ocp_positive_path);
    }
    if (j.contains("constants")) {
        const auto& k = j["constants"];
        c.constants.gas_constant = k.value("gas_constant", c.constants.gas_constant);
        c.constants.faraday = k.value("faraday", c.constants.faraday);
        c.constants.temperature = k.value("temperature_k", c.constants.temperature);
    }
    if (j.contains("limits")) {
        const auto& k = j["limits"];
        c.limits.v_max = k.value("v_max", c.limits.v_max);
        c.limits.v_min = k.value("v_min", c.limits.v_min);
        c.limits.cv_cutoff_a = k.value("cv_cutoff_a", c.limits.cv_cutoff_a);
        c.limits.nominal_capacity_ah = k.value("nominal_capacity_ah", c.limits.nominal_capacity_ah);
        c.limits.cv_gain = k.value("cv_gain", c.limits.cv_gain);
        c.limits.cv_rate_limit_a = k.value("cv_rate_limit_a", c.limits.cv_rate_limit_a);
        c.limits.cv_ticks_per_sample = k.value("cv_ticks_per_sample", c.limits.cv_ticks_per_sample);
        c.limits.max_duration_s = k.value("max_duration_s", c.limits.max_duration_s);
    }
    if (j.contains("solver")) {
        const auto& k = j["solver"];
        c.solver.n_radial_shells = k.value("n_radial_shells", c.solver.n_radial_shells);
        c.solver.dt_output_s = k.value("dt_output_s", c.solver.dt_output_s);
        c.solver.stability_safety = k.value("stability_safety", c.solver.stability_safety);
    }
    if (j.contains("swarm")) {
        const auto& k = j["swarm"];
        c.swarm.n_particles = k.value("n_particles", c.swarm.n_particles);
        c.swarm.n_iterations = k.value("n_iterations", c.swarm.n_iterations);
        c.swarm.inertia = k.value("inertia", c.swarm.inertia);
        c.swarm.cognitive = k.value("cognitive", c.swarm.cognitive);
        c.swarm.social = k.value("social", c.swarm.social);
        c.swarm.rng_seed = k.value("rng_seed", c.swarm.rng_seed);
        c.swarm.penalty_fitness = k.value("penalty_fitness", c.swarm.penalty_fitness);
    }
    if (j.contains("search_space")) {
        const auto& k = j["search_space"];
        SearchSpace s = SearchSpace::defaults(c.ground_truth);
        if (k.contains("lower")) s.lower = params_from_json(k["lower"], s.lower);
        if (k.contains("upper")) s.upper = params_from_json(k["upper"], s.upper);
        c.search_space = s;
    }
    if (j.contains("pulse")) {
        const auto& k = j["pulse"];
        c.pulse.pulse_c_rate = k.value("c_rate", c.pulse.pulse_c_rate);
        c.pulse.on_s = k.value("on_s", c.pulse.on_s);
        c.pulse.off_s = k.value("off_s", c.pulse.off_s);
    }
    if (j.contains("dst_steps")) {
        DstSchedule dst;
        for (const auto& s : j["dst_steps"])
            dst.steps.push_back({s.at("c_rate").get<double>(), s.at("duration_s").get<double>()});
        c.dst = std::move(dst);
    }
    if (j.contains("cases")) c.cases = j["cases"].get<std::vector<int>>();
    if (j.contains("scenarios")) c.scenarios = j["scenarios"].get<std::vector<int>>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);

    c.validate();
    return c;
}

std::string ExperimentConfig::to_json() const
{
    ordered_json j;
    j["ground_truth"] = params_to_json(ground_truth);
    j["ocp"] = {{"negative_csv", ocp_negative_path}, {"positive_csv", ocp_positive_path}};
    j["constants"] = {{"gas_constant", constants.gas_constant},
                      {"faraday", constants.faraday},
                      {"temperature_k", constants.temperature}};
    j["limits"] = {{"v_max", limits.v_max},
                   {"v_min", limits.v_min},
                   {"cv_cutoff_a", limits.cv_cutoff_a},
                   {"nominal_capacity_ah", limits.nominal_capacity_ah},
                   {"cv_gain", limits.cv_gain},
                   {"cv_rate_limit_a", limits.cv_rate_limit_a},
                   {"cv_ticks_per_sample", limits.cv_ticks_per_sample},
                   {"max_duration_s", limits.max_duration_s}};
    j["solver"] = {{"n_radial_shells", solver.n_radial_shells},
                   {"dt_output_s", solver.dt_output_s},
                   {"stability_safety", solver.stability_safety}};
    j["swarm"] = {{"n_particles", swarm.n_particles},
                  {"n_iterations", swarm.n_iterations},
                  {"inertia", swarm.inertia},
                  {"cognitive", swarm.cognitive},
                  {"social", swarm.social},
                  {"rng_seed", swarm.rng_seed},
                  {"penalty_fitness", swarm.penalty_fitness}};
    const SearchSpace s = effective_search_space();
    j["search_space"] = {{"lower", params_to_json(s.lower)}, {"upper", params_to_json(s.upper)}};
    j["pulse"] = {{"c_rate", pulse.pulse_c_rate}, {"on_s", pulse.on_s}, {"off_s", pulse.off_s}};
    j["dst_steps"] = ordered_json::array();
    for (const auto& st : dst.steps)
        j["dst_steps"].push_back({{"c_rate", st.c_rate}, {"duration_s", st.duration_s}});
    j["cases"] = cases;
    j["scenarios"] = scenarios;
    j["output_dir"] = output_dir;
    j["workers"] = workers;
    return j.dump(2);
}

void ExperimentConfig::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
    out << to_json() << "\n";
}

std::vector<int> parse_id_list(const std::string& spec)
{
    std::vector<int> out;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const auto dash = tok.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoi(tok));
        } else {
            const int a = std::stoi(tok.substr(0, dash));
            const int b = std::stoi(tok.substr(dash + 1));
            if (b < a) throw std::invalid_argument("parse_id_list: bad range '" + tok + "'");
            for (int i = a; i <= b; ++i) out.push_back(i);
        }
    }
    if (out.empty()) throw std::invalid_argument("parse_id_list: empty list '" + spec + "'");
    return out;
}

} // namespace spmfit
