#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Outcome {
    int status = 0;
    std::string out;
};

Outcome run(const std::string& args) {
    const std::string cmd = std::string(ECDNN_CLI_PATH) + " " + args + " 2>&1";
    Outcome o;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) o.out += buf;
    const int raw = ::pclose(pipe);
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return o;
}

std::filesystem::path write_config(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST_CASE("cli run succeeds and writes outputs") {
    const auto out = std::filesystem::temp_directory_path() / "ecdnn_cli_run";
    std::filesystem::remove_all(out);
    const auto cfg = write_config("ecdnn_cli_ok.json", R"({
        "dataset": {"generator": "gaussians", "n": 200, "noise": 1.0},
        "model": {"hidden": [6]},
        "train": {"total_iterations": 40, "tau": 20, "workers": 2}
    })");
    const Outcome o = run("run -c " + cfg.string() + " -o " + out.string());
    CHECK_MESSAGE(o.status == 0, o.out);
    CHECK(o.out.find("EC-DNN_G") != std::string::npos);
    CHECK(std::filesystem::exists(out / "summary.json"));
    CHECK(std::filesystem::exists(out / "EC-DNN_K2_tau20_seed1" / "sync_metrics.csv"));
    const Outcome r = run("report " + out.string());
    CHECK_MESSAGE(r.status == 0, r.out);
    std::filesystem::remove_all(out);
}

TEST_CASE("cli errors are machine readable") {
    const auto cfg = write_config("ecdnn_cli_bad.json", R"({"train": {"alpah": 0.5}})");
    const Outcome o = run("run -c " + cfg.string());
    CHECK(o.status != 0);
    const auto err = nlohmann::json::parse(o.out).at("error");
    CHECK(err.at("kind") == "config_error");
    CHECK(err.at("field") == "train.alpah");

    const Outcome missing = run("sweep -c /nonexistent/config.json");
    CHECK(missing.status != 0);
    CHECK(nlohmann::json::parse(missing.out).at("error").at("kind") == "io_error");

    const Outcome usage = run("");
    CHECK(usage.status != 0);
    CHECK(nlohmann::json::parse(usage.out).contains("error"));
}

TEST_CASE("cli fixtures regenerates the stored instance") {
    const auto out = std::filesystem::temp_directory_path() / "ecdnn_cli_fixture";
    const Outcome o = run("fixtures -o " + out.string());
    CHECK_MESSAGE(o.status == 0, o.out);
    for (const char* f : {"member_a.json", "member_b.json", "train.csv", "test.csv"}) {
        std::ifstream a(out / f), b(std::filesystem::path(ECDNN_FIXTURE_DIR) / f);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK_MESSAGE(sa.str() == sb.str(), f);
    }
    std::filesystem::remove_all(out);
}
