#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecdnn/aggregation.hpp"
#include "ecdnn/config.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/experiment.hpp"
#include "ecdnn/fixtures.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& field = "") {
    nlohmann::json err = {{"kind", kind}, {"message", message}};
    if (!field.empty()) err["field"] = field;
    std::cerr << nlohmann::json{{"error", err}}.dump() << "\n";
    return 1;
}

ecdnn::ExperimentSpec spec_from(const std::string& path) {
    return path.empty() ? ecdnn::ExperimentSpec{} : ecdnn::load_experiment(path);
}

void print_result(const ecdnn::ExperimentResult& result) {
    std::cout << ecdnn::format_table(result.table);
    std::cout << "outputs: " << result.output_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel DNN training strategies on a simulated cluster"};
    app.set_version_flag("--version", ecdnn::version_string());
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::size_t threads = 1;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "experiment JSON file (defaults when omitted)");
        cmd->add_option("-o,--output", output_dir, "override output_dir");
        cmd->add_option("-j,--threads", threads, "runs executed concurrently")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "train the single configuration under \"train\"");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "run every strategy/tau/K/seed combination of \"sweep\"");
    add_common(sweep);
    bool print_config = false;
    sweep->add_flag("--print-config", print_config, "print the resolved experiment and exit");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "rebuild histogram.csv, table.txt and charts from stored results");
    report->add_option("dir", report_dir, "experiment output directory")->required();

    std::string fixture_dir = "tests/fixtures/mirror_basin";
    std::uint64_t fixture_seed = 7;
    auto* fixtures = app.add_subcommand("fixtures", "rebuild the mirror-basin model averaging counterexample");
    fixtures->add_option("-o,--output", fixture_dir, "destination directory");
    fixtures->add_option("--seed", fixture_seed, "training seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what());
        return 2;
    }

    try {
        if (*run || *sweep) {
            auto spec = spec_from(config_path);
            if (!output_dir.empty()) spec.output_dir = output_dir;
            if (*sweep && print_config) {
                std::cout << ecdnn::print_experiment(spec);
                return 0;
            }
            print_result(ecdnn::run_experiment(spec, run->parsed(), threads));
        } else if (*report) {
            std::cout << ecdnn::format_table(ecdnn::regenerate_report(report_dir));
        } else if (*fixtures) {
            const auto basin = ecdnn::build_mirror_basin(fixture_seed);
            ecdnn::save_mirror_basin(fixture_dir, basin);
            const std::vector<ecdnn::ParameterVector> members{basin.member_a.params(), basin.member_b.params()};
            const auto probe = ecdnn::ma_nonconvex_probe(members, basin.train);
            std::cout << "averaged model loss " << probe.averaged_model_loss << ", mean member loss "
                      << probe.mean_member_loss << "\n";
            std::cout << "written to " << fixture_dir << "\n";
        }
    } catch (const ecdnn::ConfigError& e) {
        return fail(e.kind(), e.what(), e.field());
    } catch (const ecdnn::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
