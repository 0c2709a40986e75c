#pragma once

// Evaluation quantities for parallel training runs: local-vs-global and
// local-vs-compressed differences, normalized speed, Diff histograms, and
// the on-disk metric files.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecdnn/nn.hpp"
#include "ecdnn/train_config.hpp"

namespace ecdnn {

/// Measurements taken at one synchronization barrier. Local quantities are
/// measured before aggregation; compressed ones only exist for EC-DNN.
struct SyncRecord {
    std::size_t t = 0;
    std::vector<double> error_local;
    std::vector<double> loss_local;
    double error_global = 0.0;
    double loss_global = 0.0;
    std::vector<double> error_compressed;
    std::vector<double> loss_compressed;
    double sim_time = 0.0;
    double host_seconds = 0.0;
};

/// One point of the error-vs-time curve. `error_local` is the test error of
/// the local model with the smallest training loss.
struct CurvePoint {
    std::size_t t = 0;
    double sim_time = 0.0;
    double error_global = 0.0;
    double error_local = 0.0;
};

struct FinalRecord {
    double error_global = 0.0;
    double loss_global = 0.0;
    double error_local = 0.0;
    double loss_local = 0.0;
    std::size_t chosen_worker = 0;
    std::vector<double> local_errors;
    std::vector<double> local_train_losses;
};

struct RunRecord {
    std::string run_id;
    TrainConfig config;
    /// Mini-batch training loss per worker per local iteration.
    std::vector<std::vector<double>> train_loss;
    std::vector<SyncRecord> syncs;
    std::vector<CurvePoint> curve;
    FinalRecord final;
    std::vector<DenseNet> final_models;
    double sim_time = 0.0;
    double host_seconds = 0.0;
    std::size_t compression_steps = 0;  ///< per synchronization
    std::size_t relabel_passes = 0;     ///< member evaluations over a relabel subset, per worker
    std::size_t peak_models = 0;        ///< max over workers of live model buffers during syncs
    std::size_t peak_sums = 0;          ///< max over workers of live running output sums

    Strategy strategy() const { return config.strategy; }
};

/// mean(local_errors) - global_error; positive means the global model improves.
double diff_lg(std::span<const double> local_errors, double global_error);

/// (1/K) sum_k (local_k - compressed_k).
double diff_lc(std::span<const double> local_errors, std::span<const double> compressed_errors);

enum class FinalKind { global, local };

/// First simulated time at which the curve's error is <= target, if any.
std::optional<double> time_to_reach(std::span<const CurvePoint> curve, double target, FinalKind kind);

struct SpeedRow {
    std::string method;  ///< e.g. "EC-DNN_G"
    std::string run_id;
    double error = 0.0;
    double speed = 0.0;
    std::size_t tau = 0;
};

/// Speed of each record's _G and _L model relative to the reference's global
/// model: (reference time to reach its own final error) / (method time to
/// reach it); 0 when the method never reaches it.
std::vector<SpeedRow> normalized_speed(std::span<const RunRecord> records, const RunRecord& reference);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

struct Histogram {
    double bin_width = 0.0;
    std::vector<HistogramBin> bins;
    std::size_t total = 0;
    double negative_fraction = 0.0;
};

/// Bins [j*w, (j+1)*w) covering the value range. Throws InvalidInput on an
/// empty input or non-positive width.
Histogram distribution(std::span<const double> values, double bin_width);

/// Per-sync Diff series of one run.
std::vector<double> diff_lg_errors(const RunRecord& record);
std::vector<double> diff_lg_losses(const RunRecord& record);
std::vector<double> diff_lc_errors(const RunRecord& record);

// --- files -----------------------------------------------------------------

inline constexpr const char* kSyncMetricsHeader =
    "run_id,t,worker,error_local,error_global,error_compressed,loss_local,loss_global";

void write_sync_metrics_csv(const std::filesystem::path& path, std::span<const RunRecord> records);

/// Rows of a sync_metrics.csv file.
struct SyncRow {
    std::string run_id;
    std::size_t t = 0;
    std::size_t worker = 0;
    double error_local = 0.0;
    double error_global = 0.0;
    std::optional<double> error_compressed;
    double loss_local = 0.0;
    double loss_global = 0.0;
};
std::vector<SyncRow> read_sync_metrics_csv(const std::filesystem::path& path);

void write_curves_csv(const std::filesystem::path& path, std::span<const RunRecord> records);

struct CurveRow {
    std::string run_id;
    std::string strategy;
    CurvePoint point;
};
std::vector<CurveRow> read_curves_csv(const std::filesystem::path& path);

struct HistogramEntry {
    std::string scope;     ///< run id, "config:<strategy>/K<k>/tau<t>" or "pooled:<strategy>"
    std::string quantity;  ///< diff_lg_error, diff_lg_loss or diff_lc_error
    Histogram histogram;
};
void write_histogram_csv(const std::filesystem::path& path, std::span<const HistogramEntry> entries);

nlohmann::json run_summary_json(const RunRecord& record);
nlohmann::json config_to_json(const TrainConfig& config);

/// Structural check of a summary.json document; returns the problems found.
std::vector<std::string> validate_summary(const nlohmann::json& summary);

}  // namespace ecdnn
