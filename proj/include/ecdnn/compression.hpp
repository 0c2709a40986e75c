#pragma once

// Distillation-based compression of an ensemble back to one local-sized
// model: relabel a seeded fraction of the local data with the ensemble's
// averaged outputs, then run SGD on the accelerated compression loss
// starting from the worker's current parameters.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ecdnn/memory_probe.hpp"
#include "ecdnn/nn.hpp"

namespace ecdnn {

struct BetaStep {
    double threshold = 0.0;  ///< progress in [0, 1] from which `beta` applies
    double beta = 0.0;

    bool operator==(const BetaStep&) const = default;
};

/// Piecewise-constant beta: the entry with the largest threshold <= progress.
/// Thresholds must be strictly increasing and the first one must be 0.
using BetaSchedule = std::vector<BetaStep>;

BetaSchedule default_beta_schedule();
void validate_beta_schedule(const BetaSchedule& schedule);
double beta_at(const BetaSchedule& schedule, double progress);

struct RelabelPlan {
    double mu = 0.7;
    std::uint64_t seed = 0;
    BetaSchedule beta_schedule = default_beta_schedule();

    /// Throws ConfigError on mu outside (0, 1] or an invalid schedule.
    void validate() const;

    /// ceil(mu * m); throws ConfigError when that is zero.
    std::size_t subset_size(std::size_t m) const;

    /// Sorted example indices; a pure function of (seed, m, mu).
    std::vector<std::size_t> select(std::size_t m) const;
};

/// Averaged member outputs for every input. Members are evaluated one at a
/// time in the given order into a single running sum.
std::vector<Vector> make_pseudo_labels(std::span<const DenseNet> members,
                                       std::span<const Vector> inputs,
                                       MemoryProbe* probe = nullptr);

struct CompressOptions {
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 0;
    /// When set, beta is fixed at beta_at(schedule, *round_progress) for the
    /// whole call; otherwise step i uses beta_at(schedule, i / p).
    std::optional<double> round_progress;
    MemoryProbe* probe = nullptr;
};

struct CompressResult {
    ParameterVector params;
    LabeledBatch relabeled;  ///< the relabeled subset (x, y, ybar)
    std::size_t steps = 0;
};

/// Runs `p` SGD steps on the accelerated compression loss over the relabeled
/// subset, starting from `local`. `opt` is the worker's optimizer state and is
/// updated in place. With p == 0 the returned parameters equal `local`.
CompressResult compress(const ParameterVector& local, std::span<const DenseNet> members,
                        const LabeledBatch& local_data, const RelabelPlan& plan, std::size_t p,
                        OptState& opt, const CompressOptions& options = {});

/// Debug dump of (x, y, ybar) triples as CSV: label, f0.., ybar0..
void write_relabeled_csv(const std::filesystem::path& path, const LabeledBatch& relabeled);

}  // namespace ecdnn
