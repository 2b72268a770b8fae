#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spmfit/parameters.hpp"
#include "spmfit/spm_model.hpp"
#include "spmfit/time_series.hpp"

namespace spmfit {

/// Root-mean-square voltage error between two aligned series.
double rmse(const TimeSeries& measured, const TimeSeries& model);
double rmse_of_residuals(const std::vector<double>& residuals);

/// Checks the composition identities for a partition of residuals:
/// the combined RMSE lies between the component RMSEs, and combining a
/// component with the rest raises its RMSE exactly when the rest is worse.
struct CompositionVerdict {
    bool combined_within_bounds;
    bool ordering_consistent;
    double combined_rmse;
    double min_component_rmse;
    double max_component_rmse;

    bool holds() const { return combined_within_bounds && ordering_consistent; }
};
CompositionVerdict rmse_composition_check(const std::vector<std::vector<double>>& components);

/// Case x Scenario cross-validation grid. Entries where the simulation was
/// infeasible are flagged and excluded from min/max scans.
struct RmseMatrix {
    std::vector<int> case_ids;
    std::vector<int> scenario_ids;
    std::vector<std::vector<double>> values;  // [case][scenario], volts
    std::vector<std::vector<bool>> flagged;

    std::size_t n_cases() const { return case_ids.size(); }
    std::size_t n_scenarios() const { return scenario_ids.size(); }

    void write_csv(const std::string& path) const;
    static RmseMatrix read_csv(const std::string& path);
};

struct CaseInput {
    int case_id;
    GroupedParameters theta_star;
};

/// Entry (i,j) = RMSE of case i's parameters replayed on scenario j's profile
/// against that scenario's recorded voltage.
RmseMatrix cross_validate(const std::vector<CaseInput>& cases,
                          const std::vector<std::pair<int, TimeSeries>>& scenario_datasets,
                          const ModelContext& ctx, int n_workers = 1);

/// Componentwise percentage errors plus the Euclidean distance of the raw
/// parameter vectors.
struct ParamErrorReport {
    std::array<double, GroupedParameters::kDim> delta_theta_pct;
    double mean_delta_pct;
    double delta_dist;
};
ParamErrorReport param_errors(const GroupedParameters& theta_star,
                              const GroupedParameters& theta_true);

/// Min-max scaling to [0,1]. Throws on fewer than two values or a constant
/// column (degenerate normalization).
std::vector<double> normalize_column(const std::vector<double>& values);

struct CostWeights {
    double alpha;
    double beta;
    double gamma;

    void validate() const;  // weights in [0,1], summing to 1
};

/// The seven preset weightings O1..O7.
const std::array<CostWeights, 7>& cost_options();

struct CaseMetrics {
    int case_id;
    double e_y;      // validation RMSE on the all-profiles scenario, volts
    double e_theta;  // Euclidean parameter distance
    double t_total_h;
};

struct CostTable {
    std::vector<CaseMetrics> metrics;
    std::vector<std::array<double, 7>> j_values;  // per case, O1..O7

    void write_csv(const std::string& path) const;
};

/// J = alpha eb_y + beta eb_theta + gamma Tb for every option, where eb/Tb are
/// the min-max normalized columns.
CostTable cost_table(const std::vector<CaseMetrics>& metrics);

/// Case id minimizing J for the given option (0-based index into O1..O7);
/// ties break toward the lower case id.
int select_optimal(const CostTable& table, int option_index);

/// Structured scan of the RMSE matrix: global minimum, diagonal minimum,
/// per-column extremes and rankings, and the dataset diff between each
/// scenario's member set and its column-minimizing case's member set.
struct LevelReport {
    struct Entry {
        int case_id;
        int scenario_id;
        double value;
    };
    struct DatasetDiff {
        int scenario_id;
        int min_case_id;
        std::vector<std::string> added;
        std::vector<std::string> excluded;
        std::vector<std::pair<std::string, std::string>> swapped;  // removed -> added
        bool identical;
    };

    Entry global_min;                         // L1
    Entry diagonal_min;                       // L2
    std::vector<Entry> column_min;            // L3, one per scenario
    std::vector<std::vector<Entry>> column_smallest;  // L4, up to k per scenario
    std::vector<Entry> column_max;            // L5
    std::vector<DatasetDiff> dataset_diffs;

    std::string to_json() const;
};

/// `scenario_members[j]` lists scenario j's member designations (same order
/// as the matrix columns). k bounds the per-column ranking length.
LevelReport level_reports(const RmseMatrix& matrix,
                          const std::vector<std::vector<std::string>>& scenario_members,
                          int k = 5);

} // namespace spmfit
