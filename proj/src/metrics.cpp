#include "ecdnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ecdnn/error.hpp"
#include "ecdnn/format.hpp"

namespace ecdnn {

using nlohmann::json;

double diff_lg(std::span<const double> local_errors, double global_error) {
    if (local_errors.empty()) throw InvalidInput("diff_lg needs at least one local error");
    const double mean = std::accumulate(local_errors.begin(), local_errors.end(), 0.0) /
                        static_cast<double>(local_errors.size());
    return mean - global_error;
}

double diff_lc(std::span<const double> local_errors, std::span<const double> compressed_errors) {
    if (local_errors.size() != compressed_errors.size())
        throw InvalidInput("diff_lc needs one compressed error per local error");
    if (local_errors.empty()) throw InvalidInput("diff_lc needs at least one local error");
    double sum = 0.0;
    for (std::size_t k = 0; k < local_errors.size(); ++k) sum += local_errors[k] - compressed_errors[k];
    return sum / static_cast<double>(local_errors.size());
}

std::optional<double> time_to_reach(std::span<const CurvePoint> curve, double target, FinalKind kind) {
    for (const auto& p : curve) {
        const double e = kind == FinalKind::global ? p.error_global : p.error_local;
        if (e <= target) return p.sim_time;
    }
    return std::nullopt;
}

std::vector<SpeedRow> normalized_speed(std::span<const RunRecord> records, const RunRecord& reference) {
    const double target = reference.final.error_global;
    const auto ref_time = time_to_reach(reference.curve, target, FinalKind::global);
    std::vector<SpeedRow> rows;
    for (const auto& r : records) {
        for (const auto kind : {FinalKind::global, FinalKind::local}) {
            SpeedRow row;
            row.method = to_string(r.strategy()) + (kind == FinalKind::global ? "_G" : "_L");
            row.run_id = r.run_id;
            row.error = kind == FinalKind::global ? r.final.error_global : r.final.error_local;
            row.tau = r.config.tau;
            const auto t = time_to_reach(r.curve, target, kind);
            if (t && ref_time) row.speed = *t == *ref_time ? 1.0 : *ref_time / std::max(*t, 1e-300);
            rows.push_back(row);
        }
    }
    return rows;
}

Histogram distribution(std::span<const double> values, double bin_width) {
    if (values.empty()) throw InvalidInput("distribution of an empty set");
    if (!(bin_width > 0.0)) throw InvalidInput("bin width must be positive");
    std::map<long long, std::size_t> counts;
    std::size_t negative = 0;
    for (double v : values) {
        counts[static_cast<long long>(std::floor(v / bin_width))]++;
        if (v < 0.0) ++negative;
    }
    Histogram h;
    h.bin_width = bin_width;
    h.total = values.size();
    h.negative_fraction = static_cast<double>(negative) / static_cast<double>(values.size());
    const long long lo = counts.begin()->first;
    const long long hi = counts.rbegin()->first;
    for (long long j = lo; j <= hi; ++j) {
        const auto it = counts.find(j);
        h.bins.push_back({static_cast<double>(j) * bin_width, static_cast<double>(j + 1) * bin_width,
                          it == counts.end() ? 0 : it->second});
    }
    return h;
}

std::vector<double> diff_lg_errors(const RunRecord& record) {
    std::vector<double> out;
    for (const auto& s : record.syncs) out.push_back(diff_lg(s.error_local, s.error_global));
    return out;
}

std::vector<double> diff_lg_losses(const RunRecord& record) {
    std::vector<double> out;
    for (const auto& s : record.syncs) out.push_back(diff_lg(s.loss_local, s.loss_global));
    return out;
}

std::vector<double> diff_lc_errors(const RunRecord& record) {
    std::vector<double> out;
    for (const auto& s : record.syncs)
        if (!s.error_compressed.empty()) out.push_back(diff_lc(s.error_local, s.error_compressed));
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path, const std::string& header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw InvalidInput(path.string() + ": unexpected header");
    const std::size_t columns = split_csv(header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != columns) throw InvalidInput(path.string() + ": ragged row");
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::logic_error&) {
        throw InvalidInput("malformed number '" + s + "'");
    }
}

constexpr const char* kCurvesHeader = "run_id,strategy,t,sim_time,error_global,error_local";
constexpr const char* kHistogramHeader = "scope,quantity,bin_lo,bin_hi,count,negative_fraction";

}  // namespace

void write_sync_metrics_csv(const std::filesystem::path& path, std::span<const RunRecord> records) {
    auto out = open_out(path);
    out << kSyncMetricsHeader << '\n';
    for (const auto& r : records)
        for (const auto& s : r.syncs)
            for (std::size_t k = 0; k < s.error_local.size(); ++k) {
                out << r.run_id << ',' << s.t << ',' << k << ',' << format_double(s.error_local[k]) << ','
                    << format_double(s.error_global) << ',';
                if (!s.error_compressed.empty()) out << format_double(s.error_compressed[k]);
                out << ',' << format_double(s.loss_local[k]) << ',' << format_double(s.loss_global) << '\n';
            }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SyncRow> read_sync_metrics_csv(const std::filesystem::path& path) {
    std::vector<SyncRow> rows;
    for (const auto& c : read_table(path, kSyncMetricsHeader)) {
        SyncRow r;
        r.run_id = c[0];
        r.t = static_cast<std::size_t>(std::stoull(c[1]));
        r.worker = static_cast<std::size_t>(std::stoull(c[2]));
        r.error_local = parse_double(c[3]);
        r.error_global = parse_double(c[4]);
        if (!c[5].empty()) r.error_compressed = parse_double(c[5]);
        r.loss_local = parse_double(c[6]);
        r.loss_global = parse_double(c[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_curves_csv(const std::filesystem::path& path, std::span<const RunRecord> records) {
    auto out = open_out(path);
    out << kCurvesHeader << '\n';
    for (const auto& r : records)
        for (const auto& p : r.curve)
            out << r.run_id << ',' << to_string(r.strategy()) << ',' << p.t << ',' << format_double(p.sim_time) << ','
                << format_double(p.error_global) << ',' << format_double(p.error_local) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<CurveRow> read_curves_csv(const std::filesystem::path& path) {
    std::vector<CurveRow> rows;
    for (const auto& c : read_table(path, kCurvesHeader)) {
        CurveRow r;
        r.run_id = c[0];
        r.strategy = c[1];
        r.point.t = static_cast<std::size_t>(std::stoull(c[2]));
        r.point.sim_time = parse_double(c[3]);
        r.point.error_global = parse_double(c[4]);
        r.point.error_local = parse_double(c[5]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_histogram_csv(const std::filesystem::path& path, std::span<const HistogramEntry> entries) {
    auto out = open_out(path);
    out << kHistogramHeader << '\n';
    for (const auto& e : entries)
        for (const auto& b : e.histogram.bins)
            out << e.scope << ',' << e.quantity << ',' << format_double(b.lo) << ',' << format_double(b.hi) << ','
                << b.count << ',' << format_double(e.histogram.negative_fraction) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

json config_to_json(const TrainConfig& c) {
    json beta = json::array();
    for (const auto& s : c.beta_schedule) beta.push_back({s.threshold, s.beta});
    json j = {
        {"strategy", to_string(c.strategy)},
        {"workers", c.workers},
        {"tau", c.tau == kNeverSync ? json("inf") : json(c.tau)},
        {"total_iterations", c.total_iterations},
        {"batch_size", c.batch_size},
        {"alpha", c.alpha},
        {"beta_schedule", beta},
        {"beta_progress", to_string(c.beta_progress)},
        {"compression_steps", c.compression_steps ? json(*c.compression_steps) : json(nullptr)},
        {"p_fraction", c.p_fraction},
        {"mu", c.mu},
        {"learning_rate", c.learning_rate},
        {"momentum", c.momentum},
        {"l2", c.l2},
        {"seed", c.seed},
        {"partition", to_string(c.partition)},
        {"init", to_string(c.init)},
        {"worker_streams", to_string(c.worker_streams)},
        {"eval_every", c.eval_every},
        {"cost",
         {{"step", c.cost.step}, {"comm_ma", c.cost.comm_ma}, {"comm_ec", c.cost.comm_ec}, {"forward", c.cost.forward}}},
        {"parallel_workers", c.parallel_workers},
    };
    return j;
}

json run_summary_json(const RunRecord& r) {
    const auto lg = diff_lg_errors(r);
    const auto lc = diff_lc_errors(r);
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? json(nullptr) : json(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    };
    return {
        {"run_id", r.run_id},
        {"strategy", to_string(r.strategy())},
        {"K", r.config.effective_workers()},
        {"tau", r.config.tau == kNeverSync ? json("inf") : json(r.config.tau)},
        {"seed", r.config.seed},
        {"final",
         {{"error_global", r.final.error_global},
          {"error_local", r.final.error_local},
          {"loss_global", r.final.loss_global},
          {"loss_local", r.final.loss_local},
          {"chosen_worker", r.final.chosen_worker},
          {"local_errors", r.final.local_errors}}},
        {"syncs", r.syncs.size()},
        {"compression_steps", r.compression_steps},
        {"relabel_passes", r.relabel_passes},
        {"peak_models", r.peak_models},
        {"peak_sums", r.peak_sums},
        {"sim_time", r.sim_time},
        {"host_seconds", r.host_seconds},
        {"mean_diff_lg", mean(lg)},
        {"mean_diff_lc", mean(lc)},
        {"config", config_to_json(r.config)},
    };
}

std::vector<std::string> validate_summary(const json& summary) {
    std::vector<std::string> problems;
    auto need = [&](const json& obj, const std::string& key, json::value_t type, const std::string& where) {
        if (!obj.is_object() || !obj.contains(key)) {
            problems.push_back(where + key + ": missing");
            return false;
        }
        const auto& v = obj.at(key);
        const bool ok = type == json::value_t::number_float ? v.is_number()
                        : type == json::value_t::number_unsigned ? v.is_number_unsigned()
                                                                 : v.type() == type;
        if (!ok) problems.push_back(where + key + ": wrong type");
        return ok;
    };
    using vt = json::value_t;
    need(summary, "version", vt::string, "");
    need(summary, "seeds", vt::array, "");
    if (need(summary, "runs", vt::array, "")) {
        std::size_t i = 0;
        for (const auto& run : summary.at("runs")) {
            const std::string where = "runs[" + std::to_string(i++) + "].";
            need(run, "run_id", vt::string, where);
            need(run, "strategy", vt::string, where);
            need(run, "K", vt::number_unsigned, where);
            if (!run.contains("tau") || !(run.at("tau").is_number_unsigned() || run.at("tau") == "inf"))
                problems.push_back(where + "tau: missing or wrong type");
            need(run, "seed", vt::number_unsigned, where);
            need(run, "sim_time", vt::number_float, where);
            if (need(run, "final", vt::object, where)) {
                for (const char* key : {"error_global", "error_local"}) {
                    if (need(run.at("final"), key, vt::number_float, where + "final.")) {
                        const double e = run.at("final").at(key).get<double>();
                        if (e < 0.0 || e > 1.0) problems.push_back(where + "final." + key + ": outside [0, 1]");
                    }
                }
            }
        }
    }
    if (need(summary, "table", vt::array, "")) {
        std::size_t i = 0;
        for (const auto& row : summary.at("table")) {
            const std::string where = "table[" + std::to_string(i++) + "].";
            need(row, "method", vt::string, where);
            need(row, "K", vt::number_unsigned, where);
            need(row, "error", vt::number_float, where);
            need(row, "speed", vt::number_float, where);
        }
    }
    return problems;
}

}  // namespace ecdnn
