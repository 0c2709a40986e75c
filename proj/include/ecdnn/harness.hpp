#pragma once

// Deterministic synchronous simulation of K workers training local models
// with communication every tau iterations. Workers run either one after
// another or on their own threads between barriers; both produce identical
// records because every worker owns fixed random streams derived from
// (seed, worker) and cross-worker reads only happen at barriers.

#include <optional>
#include <span>
#include <vector>

#include "ecdnn/data.hpp"
#include "ecdnn/metrics.hpp"
#include "ecdnn/train_config.hpp"

namespace ecdnn {

/// Seeded shuffle followed by a contiguous split; shard sizes differ by at
/// most one (the first n mod K shards get the extra example).
/// Throws InvalidInput when K is zero or exceeds the example count.
std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, std::size_t workers, std::uint64_t seed);
std::vector<LabeledBatch> partition(const LabeledBatch& data, std::size_t workers, std::uint64_t seed);

struct RunOptions {
    /// Per-worker starting models (size K); overrides the configured init.
    std::vector<DenseNet> initial_models;
    std::string run_id;
};

/// Dispatches on cfg.strategy.
RunRecord run_strategy(const TrainConfig& cfg, const Dataset& data, const RunOptions& options = {});

RunRecord run_sdnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options = {});
RunRecord run_ednn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options = {});
RunRecord run_madnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options = {});
RunRecord run_ecdnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options = {});

std::string default_run_id(const TrainConfig& cfg);

}  // namespace ecdnn
