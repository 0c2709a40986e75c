#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecdnn/error.hpp"
#include "ecdnn/harness.hpp"
#include "ecdnn/metrics.hpp"

using namespace ecdnn;

namespace {

RunRecord curve_record(Strategy s, std::vector<std::pair<double, double>> points, double final_error) {
    RunRecord r;
    r.config.strategy = s;
    r.run_id = to_string(s);
    for (auto [time, err] : points) r.curve.push_back({0, time, err, err});
    r.final.error_global = r.final.error_local = final_error;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("diff_lg") {
    CHECK(diff_lg(std::vector<double>{0.2, 0.3}, 0.15) == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(diff_lg(std::vector<double>{0.2, 0.4}, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
    // Positive means the global model beats the locals.
    CHECK(diff_lg(std::vector<double>{0.3, 0.3}, 0.1) > 0);
    CHECK_THROWS_AS(diff_lg(std::vector<double>{}, 0.1), InvalidInput);
}

TEST_CASE("diff_lc") {
    CHECK(diff_lc(std::vector<double>{0.4, 0.2}, std::vector<double>{0.4, 0.2}) == 0.0);
    CHECK(diff_lc(std::vector<double>{0.4, 0.2}, std::vector<double>{0.3, 0.1}) == doctest::Approx(0.10).epsilon(1e-12));
    CHECK_THROWS_AS(diff_lc(std::vector<double>{0.4}, std::vector<double>{0.3, 0.1}), InvalidInput);
}

TEST_CASE("normalized_speed") {
    const RunRecord ref = curve_record(Strategy::madnn, {{0, 0.5}, {50, 0.3}, {100, 0.1}}, 0.1);
    const RunRecord fast = curve_record(Strategy::ecdnn, {{0, 0.5}, {50, 0.1}, {100, 0.05}}, 0.05);
    const RunRecord never = curve_record(Strategy::ednn, {{0, 0.5}, {100, 0.2}}, 0.2);
    const std::vector<RunRecord> all{ref, fast, never};
    const auto rows = normalized_speed(all, ref);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].method == "MA-DNN_G");
    CHECK(rows[0].speed == 1.0);
    CHECK(rows[2].method == "EC-DNN_G");
    CHECK(rows[2].speed == doctest::Approx(2.0));
    CHECK(rows[4].speed == 0.0);
}

TEST_CASE("distribution") {
    const auto one = distribution(std::vector<double>{0.034}, 0.01);
    REQUIRE(one.bins.size() == 1);
    CHECK(one.bins[0].count == 1);
    CHECK(one.negative_fraction == 0.0);
    const auto two = distribution(std::vector<double>{-0.1, 0.1}, 0.1);
    CHECK(two.negative_fraction == 0.5);
    CHECK(two.total == 2);
    CHECK_THROWS_AS(distribution(std::vector<double>{}, 0.1), InvalidInput);
    CHECK_THROWS_AS(distribution(std::vector<double>{1.0}, 0.0), InvalidInput);
}

TEST_CASE("loss-level ensemble Diff is never negative on a toy EC-DNN sweep") {
    const Dataset data = generate_synthetic({SyntheticKind::gaussians, 300, 2, 3, 1.5, 4});
    std::vector<double> pooled;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        TrainConfig cfg;
        cfg.hidden = {8};
        cfg.tau = 25;
        cfg.total_iterations = 200;
        cfg.seed = seed;
        const RunRecord r = run_ecdnn(cfg, data);
        const auto d = diff_lg_losses(r);
        pooled.insert(pooled.end(), d.begin(), d.end());
    }
    const auto h = distribution(pooled, 0.01);
    MESSAGE("error-level fraction is reported only; loss-level negative fraction " << h.negative_fraction);
    CHECK(h.negative_fraction == 0.0);
}

TEST_CASE("metric files round-trip") {
    const Dataset data = generate_synthetic({SyntheticKind::gaussians, 200, 2, 2, 1.0, 2});
    TrainConfig cfg;
    cfg.hidden = {6};
    cfg.tau = 20;
    cfg.total_iterations = 60;
    const std::vector<RunRecord> runs{run_ecdnn(cfg, data)};
    const auto dir = std::filesystem::temp_directory_path() / "ecdnn_metrics_test";
    std::filesystem::create_directories(dir);
    write_sync_metrics_csv(dir / "sync.csv", runs);
    write_curves_csv(dir / "curves.csv", runs);
    const auto rows = read_sync_metrics_csv(dir / "sync.csv");
    REQUIRE(rows.size() == 3 * cfg.workers);
    CHECK(rows[0].error_global == runs[0].syncs[0].error_global);
    CHECK(rows[1].error_local == runs[0].syncs[0].error_local[1]);
    CHECK(rows[0].error_compressed.value() == runs[0].syncs[0].error_compressed[0]);
    const auto curve = read_curves_csv(dir / "curves.csv");
    REQUIRE(curve.size() == runs[0].curve.size());
    CHECK(curve.back().point.error_global == runs[0].curve.back().error_global);
    CHECK(slurp(dir / "sync.csv").rfind(kSyncMetricsHeader, 0) == 0);
    std::filesystem::remove_all(dir);
}
