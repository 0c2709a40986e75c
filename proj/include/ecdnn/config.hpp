#pragma once

// Experiment specification files. JSON with a fixed key set; unknown keys
// are rejected with the dotted path of the offending key, missing keys take
// their defaults.
//
// {
//   "dataset": {"source": "synthetic", "generator": "spirals", "n": 3000, "d": 2,
//               "classes": 3, "noise": 0.05, "seed": 1},
//   "model":   {"hidden": [32, 32]},
//   "train":   {...TrainConfig fields...},
//   "sweep":   {"strategies": ["EC-DNN", ...], "tau": [...], "workers": [...], "seeds": [...]},
//   "output_dir": "runs/default"
// }
//
// CSV datasets use {"source": "csv", "train": path, "test": path | null, "split_seed": s}
// and IDX datasets {"source": "idx", "train_images", "train_labels",
// "test_images", "test_labels" (both may be null), "split_seed"}. Without a
// test file the training file is split 80/20 with `split_seed`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecdnn/data.hpp"
#include "ecdnn/train_config.hpp"

namespace ecdnn {

enum class DatasetSource { synthetic, csv, idx };

struct DatasetSpec {
    DatasetSource source = DatasetSource::synthetic;
    SyntheticSpec synthetic;
    std::string train_path;
    std::optional<std::string> test_path;
    std::string train_images;
    std::string train_labels;
    std::optional<std::string> test_images;
    std::optional<std::string> test_labels;
    std::uint64_t split_seed = 1;

    bool operator==(const DatasetSpec&) const = default;
};

struct SweepSpec {
    std::vector<Strategy> strategies = {Strategy::sdnn, Strategy::ednn, Strategy::madnn, Strategy::ecdnn};
    std::vector<std::size_t> taus = {10, 50, 200};
    std::vector<std::size_t> workers = {4};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    bool operator==(const SweepSpec&) const = default;
};

struct ExperimentSpec {
    DatasetSpec dataset;
    TrainConfig train;
    SweepSpec sweep;
    std::string output_dir = "runs/default";

    bool operator==(const ExperimentSpec&) const = default;

    /// Throws ConfigError (with field path) on invalid values.
    void validate() const;
};

ExperimentSpec parse_experiment(const nlohmann::json& doc);
ExperimentSpec parse_experiment_text(const std::string& text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

nlohmann::json experiment_to_json(const ExperimentSpec& spec);
std::string print_experiment(const ExperimentSpec& spec);

/// TrainConfig <-> the "train" object (the model's hidden sizes live under "model").
TrainConfig train_config_from_json(const nlohmann::json& train, const std::string& path = "train");

Dataset load_dataset(const DatasetSpec& spec);

/// Output directory with ECDNN_OUTPUT_ROOT prepended when set and the
/// directory is relative.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

}  // namespace ecdnn
