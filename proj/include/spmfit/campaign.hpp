#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spmfit/config.hpp"
#include "spmfit/evaluation.hpp"

namespace spmfit::campaign {

/// Output file layout inside the configured output directory.
std::string base_csv_path(const std::string& out_dir, const std::string& designation);
std::string scenario_csv_path(const std::string& out_dir, int id);
std::string case_json_path(const std::string& out_dir, int id);
std::string manifest_path(const std::string& out_dir);
std::string matrix_csv_path(const std::string& out_dir);
std::string cases_json_path(const std::string& out_dir);
std::string cost_csv_path(const std::string& out_dir);
std::string optima_json_path(const std::string& out_dir);
std::string levels_json_path(const std::string& out_dir);

/// FNV-1a 64-bit over a file's bytes, hex-encoded. Used for the manifest's
/// determinism checksums.
std::string file_checksum(const std::string& path);

/// Simulates the five base protocols and the 31 composite datasets, writes
/// the CSVs, sidecars and a manifest with durations, equivalent C-rates and
/// checksums.
void run_synth(const ExperimentConfig& cfg);

struct CaseOutcome {
    int case_id;
    double training_rmse_v;
    double t_opt_h;
    double t_exp_h;
};

/// PSO estimation for the requested cases (dataset = that scenario's series).
/// Each case gets a deterministic seed derived from the configured one.
std::vector<CaseOutcome> run_estimate(const ExperimentConfig& cfg, const std::vector<int>& case_ids);

/// Cross-validates every estimated case over every configured scenario.
RmseMatrix run_validate(const ExperimentConfig& cfg);

/// Builds the cost table and optima. With `metrics_csv` set the metrics come
/// straight from that file (columns case_id,e_y_v,e_theta,t_total_h);
/// otherwise they are assembled from the campaign artifacts on disk, and the
/// level report is emitted alongside.
void run_analyze(const ExperimentConfig& cfg, const std::optional<std::string>& metrics_csv);

/// Human-readable summary of whatever artifacts exist in the output dir.
void run_report(const ExperimentConfig& cfg, std::ostream& os);

std::vector<CaseMetrics> read_metrics_csv(const std::string& path);

} // namespace spmfit::campaign
