#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecdnn/experiment.hpp"

using namespace ecdnn;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

ExperimentSpec toy_spec(const std::filesystem::path& out) {
    ExperimentSpec spec;
    spec.dataset.synthetic = {SyntheticKind::gaussians, 240, 2, 2, 1.5, 1};
    spec.train.hidden = {6};
    spec.train.total_iterations = 60;
    spec.sweep.taus = {20, 60};
    spec.sweep.workers = {2};
    spec.sweep.seeds = {1, 2};
    spec.output_dir = out.string();
    return spec;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sweep expansion") {
    const auto configs = expand_sweep(toy_spec("unused"));
    // Per seed: S-DNN once, E-DNN once per K, MA/EC once per (K, tau).
    CHECK(configs.size() == 2 * (1 + 1 + 2 + 2));
    CHECK(configs[0].strategy == Strategy::sdnn);
    CHECK(configs[0].workers == 1);
}

TEST_CASE("K = 1 with a single terminal sync: S-DNN, E-DNN and MA-DNN rows agree") {
    ExperimentSpec spec = toy_spec(scratch("ecdnn_degenerate"));
    spec.sweep.workers = {1};
    spec.sweep.taus = {spec.train.total_iterations};
    spec.sweep.seeds = {3};
    const auto result = run_experiment(spec);
    double s = -1, e = -1, m = -1;
    for (const auto& row : result.table) {
        if (row.method == "S-DNN") s = row.error;
        if (row.method == "E-DNN_G") e = row.error;
        if (row.method == "MA-DNN_G") m = row.error;
    }
    CHECK(s >= 0);
    CHECK(s == e);
    CHECK(s == m);
    std::filesystem::remove_all(spec.output_dir);
}

TEST_CASE("output layout, summary schema and report regeneration") {
    const auto dir = scratch("ecdnn_outputs");
    const ExperimentSpec spec = toy_spec(dir);
    const auto result = run_experiment(spec, false, 2);
    for (const char* f : {"config.json", "VERSION", "sync_metrics.csv", "curves.csv", "histogram.csv", "summary.json",
                          "table.txt", "error_vs_time_K2.svg"})
        CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
    for (const auto& r : result.records) {
        for (const char* f : {"config.json", "VERSION", "sync_metrics.csv", "curves.csv", "histogram.csv", "summary.json"})
            CHECK_MESSAGE(std::filesystem::exists(dir / r.run_id / f), r.run_id << "/" << f);
        CHECK(load_experiment(dir / r.run_id / "config.json").train == r.config);
    }
    CHECK(load_experiment(dir / "config.json") == spec);

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(validate_summary(summary).empty());
    CHECK(summary.at("runs").size() == result.records.size());

    const std::string table = slurp(dir / "table.txt");
    const std::string histograms = slurp(dir / "histogram.csv");
    std::filesystem::remove(dir / "table.txt");
    std::filesystem::remove(dir / "histogram.csv");
    regenerate_report(dir);
    CHECK(slurp(dir / "table.txt") == table);
    CHECK(slurp(dir / "histogram.csv") == histograms);

    nlohmann::json broken = summary;
    broken.erase("version");
    CHECK_FALSE(validate_summary(broken).empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("default benchmark fits the time budget") {
    // One seed at a tenth of the iterations, extrapolated to five seeds at
    // full length. Budget: ten minutes.
    ExperimentSpec spec;
    spec.train.total_iterations /= 10;
    spec.sweep.seeds = {1};
    const Dataset data = load_dataset(spec.dataset);
    const auto start = std::chrono::steady_clock::now();
    run_all(expand_sweep(spec), data);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double projected = seconds * 10 * 5;
    MESSAGE("projected full benchmark: " << projected << " s");
    CHECK(projected < 600);
}
