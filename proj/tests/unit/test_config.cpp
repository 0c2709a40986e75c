#include <doctest.h>

#include <cstdlib>

#include "ecdnn/config.hpp"
#include "ecdnn/error.hpp"

using namespace ecdnn;

TEST_CASE("derive_p") {
    CHECK(derive_p(2000, 0.10) == 200);
    CHECK(derive_p(1, 1.0) == 1);
    CHECK(derive_p(1234, 0.05) == 62);
    CHECK_THROWS_AS(derive_p(10, 0.0), ConfigError);
    CHECK_THROWS_AS(derive_p(10, 1.5), ConfigError);
}

TEST_CASE("defaults") {
    const TrainConfig cfg;
    CHECK(cfg.alpha == 0.6);
    CHECK(cfg.mu == 0.7);
    CHECK(cfg.beta_schedule == BetaSchedule{{0.0, 0.4}, {0.2, 0.6}});
    CHECK(cfg.effective_compression_steps() == 200);
    TrainConfig explicit_p = cfg;
    explicit_p.compression_steps = 17;
    CHECK(explicit_p.effective_compression_steps() == 17);
}

TEST_CASE("config round trip") {
    ExperimentSpec spec;
    spec.dataset.synthetic.kind = SyntheticKind::xor_rings;
    spec.dataset.synthetic.noise = 0.125;
    spec.train.hidden = {7, 5};
    spec.train.tau = kNeverSync;
    spec.train.compression_steps = 3;
    spec.train.cost.forward = 0.3;
    spec.train.beta_schedule = {{0.0, 0.1}, {0.5, 0.9}};
    spec.sweep.taus = {1, kNeverSync};
    spec.sweep.seeds = {9};
    spec.output_dir = "elsewhere";
    CHECK(parse_experiment_text(print_experiment(spec)) == spec);
    CHECK(parse_experiment_text(print_experiment(ExperimentSpec{})) == ExperimentSpec{});

    ExperimentSpec csv;
    csv.dataset.source = DatasetSource::csv;
    csv.dataset.train_path = "a.csv";
    csv.dataset.test_path = "b.csv";
    CHECK(parse_experiment_text(print_experiment(csv)) == csv);
}

TEST_CASE("missing keys take defaults") {
    const ExperimentSpec spec = parse_experiment_text(R"({"train": {"tau": 50}})");
    CHECK(spec.train.tau == 50);
    CHECK(spec.train.workers == 4);
    CHECK(spec.sweep == SweepSpec{});
}

TEST_CASE("config errors carry the field path") {
    auto field_of = [](const std::string& text) {
        try {
            parse_experiment_text(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(R"({"trian": {}})") == "trian");
    CHECK(field_of(R"({"train": {"alpah": 1}})") == "train.alpah");
    CHECK(field_of(R"({"train": {"alpha": -1}})") == "train.alpha");
    CHECK(field_of(R"({"train": {"workers": "four"}})") == "train.workers");
    CHECK(field_of(R"({"sweep": {"tau": []}})") == "sweep.tau");
    CHECK(field_of(R"({"dataset": {"generator": "moons"}})") == "dataset.generator");
    CHECK(field_of(R"({"model": {"hidden": [0]}})") == "model.hidden");
    CHECK_THROWS_AS(parse_experiment_text("{not json"), ConfigError);
}

TEST_CASE("output root from the environment") {
    ::setenv("ECDNN_OUTPUT_ROOT", "/tmp/root", 1);
    CHECK(resolve_output_dir("runs/x") == std::filesystem::path("/tmp/root/runs/x"));
    CHECK(resolve_output_dir("/abs") == std::filesystem::path("/abs"));
    ::unsetenv("ECDNN_OUTPUT_ROOT");
    CHECK(resolve_output_dir("runs/x") == std::filesystem::path("runs/x"));
}
