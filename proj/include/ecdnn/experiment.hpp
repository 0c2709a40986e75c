#pragma once

// Sweep orchestration and result files.
//
// An experiment directory holds, at the top level, the experiment echo
// (config.json), VERSION, the pooled sync_metrics.csv / curves.csv /
// histogram.csv, summary.json, table.txt and SVG charts; each run also gets
// its own subdirectory <run_id>/ with config.json, VERSION,
// sync_metrics.csv, curves.csv, histogram.csv and summary.json.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecdnn/config.hpp"
#include "ecdnn/metrics.hpp"

namespace ecdnn {

/// Version stamp (git describe at build time).
std::string version_string();

/// One TrainConfig per sweep combination, in a fixed order. S-DNN ignores
/// K and tau and E-DNN ignores tau, so those are emitted once per seed
/// (S-DNN) or per (K, seed) (E-DNN).
std::vector<TrainConfig> expand_sweep(const ExperimentSpec& spec);

/// Runs every configuration; up to `threads` runs execute concurrently.
/// Output order matches `configs`.
std::vector<RunRecord> run_all(const std::vector<TrainConfig>& configs, const Dataset& data, std::size_t threads = 1);

struct TableRow {
    std::string method;  ///< "<strategy>_G" / "<strategy>_L"
    std::size_t K = 0;
    std::string tau;     ///< chosen tau, "-" when not applicable
    double error = 0.0;  ///< mean final test error over seeds
    double speed = 0.0;  ///< mean normalized speed over seeds (MA-DNN_G = 1)
    std::size_t seeds = 0;
};

/// For each (strategy, K) the tau with the lowest mean final global error
/// across seeds.
std::map<std::pair<Strategy, std::size_t>, std::size_t> best_tau(const std::vector<RunRecord>& records);

/// Table-1-shaped rows: error and speed per method, each method at its best
/// tau. Speed is relative to MA-DNN_G of the same K and seed; rows get speed 0
/// when no MA-DNN run exists.
std::vector<TableRow> build_table(const std::vector<RunRecord>& records);

std::string format_table(const std::vector<TableRow>& rows);

struct HistogramOptions {
    double bin_width = 0.01;
};

/// Diff histograms per run, per (strategy, K, tau) config and pooled per strategy.
std::vector<HistogramEntry> build_histograms(const std::vector<RunRecord>& records, const HistogramOptions& options = {});

nlohmann::json build_summary(const std::vector<RunRecord>& records, const std::vector<TableRow>& table);

/// Writes every file listed above into `dir` (created if needed).
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                              const std::vector<RunRecord>& records);

struct ExperimentResult {
    std::vector<RunRecord> records;
    std::vector<TableRow> table;
    std::filesystem::path output_dir;
};

/// Loads the dataset, runs the sweep (or, with `single_run`, just spec.train)
/// and writes all outputs.
ExperimentResult run_experiment(const ExperimentSpec& spec, bool single_run = false, std::size_t threads = 1);

/// Rebuilds histogram.csv, table.txt and the charts of an experiment
/// directory from its stored CSV files and summary.json.
std::vector<TableRow> regenerate_report(const std::filesystem::path& dir);

}  // namespace ecdnn
