#include "ecdnn/train_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ecdnn/error.hpp"

namespace ecdnn {

namespace {

std::string normalized(std::string s) {
    std::string out;
    for (char c : s)
        if (c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::sdnn:
            return "S-DNN";
        case Strategy::ednn:
            return "E-DNN";
        case Strategy::madnn:
            return "MA-DNN";
        case Strategy::ecdnn:
            return "EC-DNN";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
    const std::string n = normalized(name);
    if (n == "sdnn") return Strategy::sdnn;
    if (n == "ednn") return Strategy::ednn;
    if (n == "madnn") return Strategy::madnn;
    if (n == "ecdnn") return Strategy::ecdnn;
    throw ConfigError("strategy", "unknown strategy '" + name + "'");
}

std::string to_string(PartitionMode m) { return m == PartitionMode::disjoint ? "disjoint" : "replicated"; }

std::string to_string(InitMode m) {
    switch (m) {
        case InitMode::automatic:
            return "auto";
        case InitMode::shared:
            return "shared";
        case InitMode::per_worker:
            return "per-worker";
    }
    return "unknown";
}

std::string to_string(BetaProgress m) { return m == BetaProgress::rounds ? "rounds" : "steps"; }
std::string to_string(WorkerStreams m) { return m == WorkerStreams::distinct ? "distinct" : "identical"; }

PartitionMode partition_mode_from_string(const std::string& s) {
    if (s == "disjoint") return PartitionMode::disjoint;
    if (s == "replicated") return PartitionMode::replicated;
    throw ConfigError("partition", "expected 'disjoint' or 'replicated'");
}

InitMode init_mode_from_string(const std::string& s) {
    if (s == "auto") return InitMode::automatic;
    if (s == "shared") return InitMode::shared;
    if (s == "per-worker") return InitMode::per_worker;
    throw ConfigError("init", "expected 'auto', 'shared' or 'per-worker'");
}

BetaProgress beta_progress_from_string(const std::string& s) {
    if (s == "rounds") return BetaProgress::rounds;
    if (s == "steps") return BetaProgress::steps;
    throw ConfigError("beta_progress", "expected 'rounds' or 'steps'");
}

WorkerStreams worker_streams_from_string(const std::string& s) {
    if (s == "distinct") return WorkerStreams::distinct;
    if (s == "identical") return WorkerStreams::identical;
    throw ConfigError("worker_streams", "expected 'distinct' or 'identical'");
}

std::size_t derive_p(std::size_t total_minibatches, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("p_fraction", "must lie in (0, 1]");
    const double raw = fraction * static_cast<double>(total_minibatches);
    return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

void TrainConfig::validate() const {
    if (hidden.empty() == false && std::find(hidden.begin(), hidden.end(), 0u) != hidden.end())
        throw ConfigError("model.hidden", "layer sizes must be positive");
    if (workers == 0) throw ConfigError("train.workers", "must be at least 1");
    if (tau == 0) throw ConfigError("train.tau", "must be at least 1");
    if (batch_size == 0) throw ConfigError("train.batch_size", "must be at least 1");
    if (!(alpha >= 0.0)) throw ConfigError("train.alpha", "must be non-negative");
    try {
        validate_beta_schedule(beta_schedule);
    } catch (const ConfigError& e) {
        throw ConfigError("train.beta_schedule", e.what());
    }
    if (!(p_fraction > 0.0 && p_fraction <= 1.0)) throw ConfigError("train.p_fraction", "must lie in (0, 1]");
    if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("train.mu", "must lie in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate", "must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum", "must lie in [0, 1)");
    if (!(l2 >= 0.0)) throw ConfigError("train.l2", "must be non-negative");
    for (double c : {cost.step, cost.comm_ma, cost.comm_ec, cost.forward})
        if (!(c >= 0.0)) throw ConfigError("train.cost", "cost constants must be non-negative");
}

std::size_t TrainConfig::effective_compression_steps() const {
    return compression_steps.value_or(derive_p(total_iterations, p_fraction));
}

std::size_t TrainConfig::effective_eval_every() const {
    if (eval_every > 0) return eval_every;
    return std::max<std::size_t>(1, total_iterations / 20);
}

bool TrainConfig::synchronizes() const {
    return (strategy == Strategy::madnn || strategy == Strategy::ecdnn) && tau != kNeverSync &&
           tau <= total_iterations;
}

}  // namespace ecdnn
