#include "ecdnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "ecdnn/charts.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/harness.hpp"

#ifndef ECDNN_VERSION
#define ECDNN_VERSION "unknown"
#endif

namespace ecdnn {

using nlohmann::json;

std::string version_string() { return ECDNN_VERSION; }

std::vector<TrainConfig> expand_sweep(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<TrainConfig> out;
    for (auto seed : spec.sweep.seeds) {
        for (auto strategy : spec.sweep.strategies) {
            TrainConfig base = spec.train;
            base.strategy = strategy;
            base.seed = seed;
            if (strategy == Strategy::sdnn) {
                base.workers = 1;
                out.push_back(base);
                continue;
            }
            for (auto k : spec.sweep.workers) {
                TrainConfig cfg = base;
                cfg.workers = k;
                if (strategy == Strategy::ednn) {
                    out.push_back(cfg);
                    continue;
                }
                for (auto tau : spec.sweep.taus) {
                    cfg.tau = tau;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

std::vector<RunRecord> run_all(const std::vector<TrainConfig>& configs, const Dataset& data, std::size_t threads) {
    std::vector<RunRecord> records(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                records[i] = run_strategy(configs[i], data);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, configs.size()));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return records;
}

namespace {

bool uses_tau(Strategy s) { return s == Strategy::madnn || s == Strategy::ecdnn; }

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string tau_text(std::size_t tau) { return tau == kNeverSync ? "inf" : std::to_string(tau); }

}  // namespace

std::map<std::pair<Strategy, std::size_t>, std::size_t> best_tau(const std::vector<RunRecord>& records) {
    std::map<std::pair<Strategy, std::size_t>, std::map<std::size_t, std::vector<double>>> errors;
    for (const auto& r : records)
        if (uses_tau(r.strategy()))
            errors[{r.strategy(), r.config.effective_workers()}][r.config.tau].push_back(r.final.error_global);
    std::map<std::pair<Strategy, std::size_t>, std::size_t> best;
    for (const auto& [key, by_tau] : errors) {
        double best_err = 2.0;
        for (const auto& [tau, errs] : by_tau) {
            const double e = mean_of(errs);
            if (e < best_err) {
                best_err = e;
                best[key] = tau;
            }
        }
    }
    return best;
}

std::vector<TableRow> build_table(const std::vector<RunRecord>& records) {
    const auto taus = best_tau(records);
    auto selected = [&](const RunRecord& r) {
        if (!uses_tau(r.strategy())) return true;
        const auto it = taus.find({r.strategy(), r.config.effective_workers()});
        return it != taus.end() && it->second == r.config.tau;
    };

    // MA-DNN_G reference per (K, seed).
    std::map<std::pair<std::size_t, std::uint64_t>, const RunRecord*> reference;
    for (const auto& r : records)
        if (r.strategy() == Strategy::madnn && selected(r))
            reference[{r.config.effective_workers(), r.config.seed}] = &r;
    std::size_t smallest_ma_k = 0;
    if (!reference.empty()) smallest_ma_k = reference.begin()->first.first;

    std::map<std::pair<Strategy, std::size_t>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records)
        if (selected(r)) groups[{r.strategy(), r.config.effective_workers()}].push_back(&r);

    std::vector<TableRow> rows;
    for (const auto& [key, runs] : groups) {
        const auto [strategy, K] = key;
        for (const auto kind : {FinalKind::global, FinalKind::local}) {
            if (strategy == Strategy::sdnn && kind == FinalKind::local) continue;
            TableRow row;
            row.method = to_string(strategy) + (strategy == Strategy::sdnn ? "" : kind == FinalKind::global ? "_G" : "_L");
            row.K = K;
            row.tau = uses_tau(strategy) ? tau_text(runs.front()->config.tau) : "-";
            row.seeds = runs.size();
            std::vector<double> errs;
            std::vector<double> speeds;
            for (const RunRecord* r : runs) {
                errs.push_back(kind == FinalKind::global ? r->final.error_global : r->final.error_local);
                const std::size_t ref_k = strategy == Strategy::sdnn ? smallest_ma_k : K;
                const auto ref = reference.find({ref_k, r->config.seed});
                if (ref == reference.end()) continue;
                const auto speed_rows = normalized_speed(std::span<const RunRecord>(r, 1), *ref->second);
                speeds.push_back(speed_rows[kind == FinalKind::global ? 0 : 1].speed);
            }
            row.error = mean_of(errs);
            row.speed = mean_of(speeds);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string format_table(const std::vector<TableRow>& rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %4s %8s %10s %8s %6s\n", "method", "K", "tau", "error(%)", "speed", "seeds");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-12s %4zu %8s %10.2f %8.2f %6zu\n", r.method.c_str(), r.K, r.tau.c_str(),
                      100.0 * r.error, r.speed, r.seeds);
        out << line;
    }
    return out.str();
}

std::vector<HistogramEntry> build_histograms(const std::vector<RunRecord>& records, const HistogramOptions& options) {
    std::vector<HistogramEntry> out;
    std::map<std::string, std::vector<double>> config_lg_err, config_lg_loss, config_lc;
    std::map<std::string, std::vector<double>> pooled_lg_err, pooled_lg_loss, pooled_lc;
    std::vector<std::string> config_order, pooled_order;
    auto add = [&](const std::string& scope, const std::string& quantity, const std::vector<double>& values) {
        if (!values.empty()) out.push_back({scope, quantity, distribution(values, options.bin_width)});
    };
    for (const auto& r : records) {
        if (r.syncs.empty()) continue;
        const auto lg = diff_lg_errors(r);
        const auto lgl = diff_lg_losses(r);
        const auto lc = diff_lc_errors(r);
        add(r.run_id, "diff_lg_error", lg);
        add(r.run_id, "diff_lg_loss", lgl);
        add(r.run_id, "diff_lc_error", lc);
        const std::string config = "config:" + to_string(r.strategy()) + "/K" +
                                   std::to_string(r.config.effective_workers()) + "/tau" + tau_text(r.config.tau);
        const std::string pooled = "pooled:" + to_string(r.strategy());
        if (!config_lg_err.count(config)) config_order.push_back(config);
        if (!pooled_lg_err.count(pooled)) pooled_order.push_back(pooled);
        for (auto* m : {&config_lg_err, &pooled_lg_err}) {
            auto& v = (*m)[m == &config_lg_err ? config : pooled];
            v.insert(v.end(), lg.begin(), lg.end());
        }
        for (auto* m : {&config_lg_loss, &pooled_lg_loss}) {
            auto& v = (*m)[m == &config_lg_loss ? config : pooled];
            v.insert(v.end(), lgl.begin(), lgl.end());
        }
        for (auto* m : {&config_lc, &pooled_lc}) {
            auto& v = (*m)[m == &config_lc ? config : pooled];
            v.insert(v.end(), lc.begin(), lc.end());
        }
    }
    for (const auto& c : config_order) {
        add(c, "diff_lg_error", config_lg_err[c]);
        add(c, "diff_lg_loss", config_lg_loss[c]);
        add(c, "diff_lc_error", config_lc[c]);
    }
    for (const auto& p : pooled_order) {
        add(p, "diff_lg_error", pooled_lg_err[p]);
        add(p, "diff_lg_loss", pooled_lg_loss[p]);
        add(p, "diff_lc_error", pooled_lc[p]);
    }
    return out;
}

json build_summary(const std::vector<RunRecord>& records, const std::vector<TableRow>& table) {
    std::set<std::uint64_t> seeds;
    json runs = json::array();
    for (const auto& r : records) {
        seeds.insert(r.config.seed);
        runs.push_back(run_summary_json(r));
    }
    json rows = json::array();
    for (const auto& t : table)
        rows.push_back({{"method", t.method}, {"K", t.K}, {"tau", t.tau}, {"error", t.error}, {"speed", t.speed},
                        {"seeds", t.seeds}});
    return {{"version", version_string()},
            {"seeds", std::vector<std::uint64_t>(seeds.begin(), seeds.end())},
            {"runs", runs},
            {"table", rows}};
}

namespace {

void write_charts(const std::filesystem::path& dir, const std::vector<RunRecord>& records,
                  const std::vector<HistogramEntry>& histograms) {
    const auto taus = best_tau(records);
    std::map<std::size_t, std::vector<Series>> by_k;
    std::set<std::size_t> ks;
    for (const auto& r : records)
        if (r.strategy() != Strategy::sdnn) ks.insert(r.config.effective_workers());
    if (records.empty()) return;
    const std::uint64_t first_seed = records.front().config.seed;
    for (const auto& r : records) {
        if (r.config.seed != first_seed) continue;
        if (uses_tau(r.strategy())) {
            const auto it = taus.find({r.strategy(), r.config.effective_workers()});
            if (it == taus.end() || it->second != r.config.tau) continue;
        }
        const std::string suffix = r.strategy() == Strategy::sdnn ? "" : "_G";
        Series s{to_string(r.strategy()) + suffix, {}};
        for (const auto& p : r.curve) s.points.emplace_back(p.sim_time, p.error_global);
        if (r.strategy() == Strategy::sdnn) {
            for (auto k : ks) by_k[k].push_back(s);
        } else {
            by_k[r.config.effective_workers()].push_back(std::move(s));
        }
    }
    for (const auto& [k, series] : by_k)
        write_text_file(dir / ("error_vs_time_K" + std::to_string(k) + ".svg"),
                        line_chart_svg("Test error of the final-model candidate, K=" + std::to_string(k) + ", seed " +
                                           std::to_string(first_seed),
                                       "simulated time (SGD steps)", "test error", series));
    for (const auto& h : histograms) {
        if (h.scope.rfind("pooled:", 0) != 0) continue;
        const std::string strategy = h.scope.substr(7);
        write_text_file(dir / (h.quantity + "_" + strategy + ".svg"),
                        histogram_svg(h.quantity + " over all synchronizations, " + strategy, h.histogram));
    }
}

ExperimentSpec echo_for_run(const ExperimentSpec& spec, const TrainConfig& cfg) {
    ExperimentSpec echo = spec;
    echo.train = cfg;
    echo.sweep.strategies = {cfg.strategy};
    echo.sweep.taus = {cfg.tau};
    echo.sweep.workers = {cfg.workers};
    echo.sweep.seeds = {cfg.seed};
    return echo;
}

void write_run_dir(const std::filesystem::path& dir, const ExperimentSpec& spec, const RunRecord& r) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "config.json", print_experiment(echo_for_run(spec, r.config)));
    write_text_file(dir / "VERSION", version_string() + "\n");
    const std::span<const RunRecord> one(&r, 1);
    write_sync_metrics_csv(dir / "sync_metrics.csv", one);
    write_curves_csv(dir / "curves.csv", one);
    const std::vector<RunRecord> single{r};
    write_histogram_csv(dir / "histogram.csv", build_histograms(single));
    write_text_file(dir / "summary.json", build_summary(single, build_table(single)).dump(2) + "\n");
}

}  // namespace

void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                              const std::vector<RunRecord>& records) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "config.json", print_experiment(spec));
    write_text_file(dir / "VERSION", version_string() + "\n");
    write_sync_metrics_csv(dir / "sync_metrics.csv", records);
    write_curves_csv(dir / "curves.csv", records);
    const auto histograms = build_histograms(records);
    write_histogram_csv(dir / "histogram.csv", histograms);
    const auto table = build_table(records);
    write_text_file(dir / "summary.json", build_summary(records, table).dump(2) + "\n");
    write_text_file(dir / "table.txt", format_table(table));
    write_charts(dir, records, histograms);
    for (const auto& r : records) write_run_dir(dir / r.run_id, spec, r);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, bool single_run, std::size_t threads) {
    spec.validate();
    const Dataset data = load_dataset(spec.dataset);
    const std::vector<TrainConfig> configs = single_run ? std::vector<TrainConfig>{spec.train} : expand_sweep(spec);
    ExperimentResult result;
    result.records = run_all(configs, data, threads);
    result.table = build_table(result.records);
    result.output_dir = resolve_output_dir(spec.output_dir);
    write_experiment_outputs(result.output_dir, spec, result.records);
    return result;
}

std::vector<TableRow> regenerate_report(const std::filesystem::path& dir) {
    std::ifstream in(dir / "summary.json");
    if (!in) throw IoError("cannot open " + (dir / "summary.json").string());
    json summary;
    try {
        summary = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("malformed summary.json: ") + e.what());
    }
    if (const auto problems = validate_summary(summary); !problems.empty())
        throw InvalidInput("summary.json: " + problems.front());

    std::vector<RunRecord> records;
    std::map<std::string, std::size_t> index;
    for (const auto& run : summary.at("runs")) {
        RunRecord r;
        r.run_id = run.at("run_id").get<std::string>();
        r.config.strategy = strategy_from_string(run.at("strategy").get<std::string>());
        r.config.workers = run.at("K").get<std::size_t>();
        r.config.tau = run.at("tau").is_string() ? kNeverSync : run.at("tau").get<std::size_t>();
        r.config.seed = run.at("seed").get<std::uint64_t>();
        r.final.error_global = run.at("final").at("error_global").get<double>();
        r.final.error_local = run.at("final").at("error_local").get<double>();
        r.sim_time = run.at("sim_time").get<double>();
        index[r.run_id] = records.size();
        records.push_back(std::move(r));
    }
    for (const auto& row : read_curves_csv(dir / "curves.csv")) {
        const auto it = index.find(row.run_id);
        if (it == index.end()) throw InvalidInput("curves.csv: unknown run " + row.run_id);
        records[it->second].curve.push_back(row.point);
    }
    for (const auto& row : read_sync_metrics_csv(dir / "sync_metrics.csv")) {
        const auto it = index.find(row.run_id);
        if (it == index.end()) throw InvalidInput("sync_metrics.csv: unknown run " + row.run_id);
        auto& syncs = records[it->second].syncs;
        if (syncs.empty() || syncs.back().t != row.t) {
            syncs.emplace_back();
            syncs.back().t = row.t;
            syncs.back().error_global = row.error_global;
            syncs.back().loss_global = row.loss_global;
        }
        auto& s = syncs.back();
        s.error_local.push_back(row.error_local);
        s.loss_local.push_back(row.loss_local);
        if (row.error_compressed) s.error_compressed.push_back(*row.error_compressed);
    }
    const auto histograms = build_histograms(records);
    write_histogram_csv(dir / "histogram.csv", histograms);
    const auto table = build_table(records);
    write_text_file(dir / "table.txt", format_table(table));
    write_charts(dir, records, histograms);
    return table;
}

}  // namespace ecdnn
