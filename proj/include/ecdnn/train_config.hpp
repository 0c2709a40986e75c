#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ecdnn/compression.hpp"

namespace ecdnn {

enum class Strategy { sdnn, ednn, madnn, ecdnn };

/// "S-DNN", "E-DNN", "MA-DNN", "EC-DNN".
std::string to_string(Strategy s);
/// Accepts the names above, case-insensitively, with or without the dash.
Strategy strategy_from_string(const std::string& name);

/// tau value meaning "never synchronize".
inline constexpr std::size_t kNeverSync = std::numeric_limits<std::size_t>::max();

enum class PartitionMode { disjoint, replicated };
enum class InitMode { automatic, shared, per_worker };
enum class BetaProgress { rounds, steps };
enum class WorkerStreams { distinct, identical };

std::string to_string(PartitionMode m);
std::string to_string(InitMode m);
std::string to_string(BetaProgress m);
std::string to_string(WorkerStreams m);
PartitionMode partition_mode_from_string(const std::string& s);
InitMode init_mode_from_string(const std::string& s);
BetaProgress beta_progress_from_string(const std::string& s);
WorkerStreams worker_streams_from_string(const std::string& s);

/// Simulated-time constants, in units of one local mini-batch SGD step.
struct CostModel {
    double step = 1.0;           ///< one mini-batch SGD step (local or compression)
    double comm_ma = 10.0;       ///< one parameter-averaging synchronization
    double comm_ec = 10.0;       ///< one ensemble synchronization
    double forward = 0.01;       ///< forward pass of one example (relabeling)

    bool operator==(const CostModel&) const = default;
};

struct TrainConfig {
    Strategy strategy = Strategy::ecdnn;
    std::vector<std::size_t> hidden = {32, 32};
    std::size_t workers = 4;
    std::size_t tau = 100;
    std::size_t total_iterations = 2000;
    std::size_t batch_size = 32;
    double alpha = 0.6;
    BetaSchedule beta_schedule = default_beta_schedule();
    BetaProgress beta_progress = BetaProgress::rounds;
    /// Compression iterations per synchronization; unset means
    /// derive_p(total_iterations, p_fraction).
    std::optional<std::size_t> compression_steps;
    double p_fraction = 0.10;
    double mu = 0.7;
    double learning_rate = 0.05;
    double momentum = 0.9;
    double l2 = 1e-4;
    std::uint64_t seed = 1;
    PartitionMode partition = PartitionMode::disjoint;
    InitMode init = InitMode::automatic;
    WorkerStreams worker_streams = WorkerStreams::distinct;
    /// Curve evaluation period in iterations; 0 means total_iterations / 20.
    std::size_t eval_every = 0;
    CostModel cost;
    bool parallel_workers = false;

    bool operator==(const TrainConfig&) const = default;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    std::size_t effective_workers() const { return strategy == Strategy::sdnn ? 1 : workers; }
    std::size_t effective_compression_steps() const;
    std::size_t effective_eval_every() const;
    bool synchronizes() const;
};

/// ceil(fraction * total_minibatches). Throws ConfigError on fraction outside (0, 1].
std::size_t derive_p(std::size_t total_minibatches, double fraction);

}  // namespace ecdnn
