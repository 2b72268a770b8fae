#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spmfit/ocp.hpp"
#include "spmfit/parameters.hpp"
#include "spmfit/protocols.hpp"
#include "spmfit/pso.hpp"

namespace spmfit {

/// Everything a campaign needs, loadable from one JSON file. Command-line
/// flags override individual fields after loading.
struct ExperimentConfig {
    GroupedParameters ground_truth;
    std::string ocp_negative_path;  // empty = built-in graphite table
    std::string ocp_positive_path;  // empty = built-in layered-oxide table
    PhysicalConstants constants;
    CyclerLimits limits;
    SolverConfig solver;
    SwarmConfig swarm;
    std::optional<SearchSpace> search_space;  // default: ground truth x[0.2,5]
    PulseCycle pulse;
    DstSchedule dst = default_dst_schedule();
    std::vector<int> cases;      // default 1..31
    std::vector<int> scenarios;  // default 1..31
    std::string output_dir = "out";
    int workers = 1;

    void validate() const;

    SearchSpace effective_search_space() const;
    OcpPair load_ocp() const;
    ModelContext model_context() const;

    static ExperimentConfig defaults();
    static ExperimentConfig load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_json() const;
};

std::vector<int> parse_id_list(const std::string& spec);  // "1,4,7-9" -> {1,4,7,8,9}

} // namespace spmfit
