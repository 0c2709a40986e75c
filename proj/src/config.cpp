#include "ecdnn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ecdnn/error.hpp"
#include "ecdnn/metrics.hpp"

namespace ecdnn {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking which keys were consumed so that anything
// left over can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, std::size_t& out) {
        if (const json* v = find(key)) out = as_size(*v, field(key));
    }
    void read(const std::string& key, std::uint64_t& out, int /*tag*/) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void read(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(field(key), "expected a number");
            out = v->get<double>();
        }
    }
    void read(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void read(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(field(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void read(const std::string& key, std::optional<std::string>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
            } else {
                if (!v->is_string()) throw ConfigError(field(key), "expected a string or null");
                out = v->get<std::string>();
            }
        }
    }
    template <typename T, typename Parse>
    void read_enum(const std::string& key, T& out, Parse parse) {
        std::string s;
        if (find(key) == nullptr) return;
        read(key, s);
        try {
            out = parse(s);
        } catch (const ConfigError& e) {
            throw ConfigError(field(key), e.what());
        }
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }

    static std::size_t as_size(const json& v, const std::string& where) {
        if (!v.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
        return v.get<std::size_t>();
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::size_t parse_tau(const json& v, const std::string& where) {
    if (v.is_string() && v.get<std::string>() == "inf") return kNeverSync;
    return ObjectReader::as_size(v, where);
}

json tau_json(std::size_t tau) { return tau == kNeverSync ? json("inf") : json(tau); }

std::string source_name(DatasetSource s) {
    switch (s) {
        case DatasetSource::synthetic:
            return "synthetic";
        case DatasetSource::csv:
            return "csv";
        case DatasetSource::idx:
            return "idx";
    }
    return "unknown";
}

DatasetSpec parse_dataset(const json& doc) {
    ObjectReader r(doc, "dataset");
    DatasetSpec spec;
    std::string source = "synthetic";
    r.read("source", source);
    if (source == "synthetic") {
        spec.source = DatasetSource::synthetic;
        r.read_enum("generator", spec.synthetic.kind, synthetic_kind_from_string);
        r.read("n", spec.synthetic.n);
        r.read("d", spec.synthetic.d);
        r.read("classes", spec.synthetic.classes);
        r.read("noise", spec.synthetic.noise);
        r.read("seed", spec.synthetic.seed, 0);
    } else if (source == "csv") {
        spec.source = DatasetSource::csv;
        r.read("train", spec.train_path);
        r.read("test", spec.test_path);
        r.read("split_seed", spec.split_seed, 0);
    } else if (source == "idx") {
        spec.source = DatasetSource::idx;
        r.read("train_images", spec.train_images);
        r.read("train_labels", spec.train_labels);
        r.read("test_images", spec.test_images);
        r.read("test_labels", spec.test_labels);
        r.read("split_seed", spec.split_seed, 0);
    } else {
        throw ConfigError("dataset.source", "expected 'synthetic', 'csv' or 'idx'");
    }
    r.finish();
    return spec;
}

json dataset_to_json(const DatasetSpec& d) {
    switch (d.source) {
        case DatasetSource::synthetic:
            return {{"source", "synthetic"},
                    {"generator", to_string(d.synthetic.kind)},
                    {"n", d.synthetic.n},
                    {"d", d.synthetic.d},
                    {"classes", d.synthetic.classes},
                    {"noise", d.synthetic.noise},
                    {"seed", d.synthetic.seed}};
        case DatasetSource::csv:
            return {{"source", "csv"},
                    {"train", d.train_path},
                    {"test", d.test_path ? json(*d.test_path) : json(nullptr)},
                    {"split_seed", d.split_seed}};
        case DatasetSource::idx:
            return {{"source", "idx"},
                    {"train_images", d.train_images},
                    {"train_labels", d.train_labels},
                    {"test_images", d.test_images ? json(*d.test_images) : json(nullptr)},
                    {"test_labels", d.test_labels ? json(*d.test_labels) : json(nullptr)},
                    {"split_seed", d.split_seed}};
    }
    return {};
}

template <typename T, typename Parse>
std::vector<T> parse_list(const json& v, const std::string& where, Parse parse) {
    if (!v.is_array()) throw ConfigError(where, "expected a list");
    std::vector<T> out;
    std::size_t i = 0;
    for (const auto& item : v) out.push_back(parse(item, where + "[" + std::to_string(i++) + "]"));
    return out;
}

}  // namespace

TrainConfig train_config_from_json(const json& doc, const std::string& path) {
    ObjectReader r(doc, path);
    TrainConfig c;
    r.read_enum("strategy", c.strategy, strategy_from_string);
    r.read("workers", c.workers);
    if (const json* v = r.find("tau")) c.tau = parse_tau(*v, r.field("tau"));
    r.read("total_iterations", c.total_iterations);
    r.read("batch_size", c.batch_size);
    r.read("alpha", c.alpha);
    if (const json* v = r.find("beta_schedule")) {
        c.beta_schedule = parse_list<BetaStep>(*v, r.field("beta_schedule"), [](const json& item, const std::string& w) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
                throw ConfigError(w, "expected [threshold, beta]");
            return BetaStep{item[0].get<double>(), item[1].get<double>()};
        });
    }
    r.read_enum("beta_progress", c.beta_progress, beta_progress_from_string);
    if (const json* v = r.find("compression_steps")) {
        if (v->is_null()) c.compression_steps.reset();
        else c.compression_steps = ObjectReader::as_size(*v, r.field("compression_steps"));
    }
    r.read("p_fraction", c.p_fraction);
    r.read("mu", c.mu);
    r.read("learning_rate", c.learning_rate);
    r.read("momentum", c.momentum);
    r.read("l2", c.l2);
    r.read("seed", c.seed, 0);
    r.read_enum("partition", c.partition, partition_mode_from_string);
    r.read_enum("init", c.init, init_mode_from_string);
    r.read_enum("worker_streams", c.worker_streams, worker_streams_from_string);
    r.read("eval_every", c.eval_every);
    if (const json* v = r.find("cost")) {
        ObjectReader cr(*v, r.field("cost"));
        cr.read("step", c.cost.step);
        cr.read("comm_ma", c.cost.comm_ma);
        cr.read("comm_ec", c.cost.comm_ec);
        cr.read("forward", c.cost.forward);
        cr.finish();
    }
    r.read("parallel_workers", c.parallel_workers);
    r.finish();
    return c;
}

void ExperimentSpec::validate() const {
    train.validate();
    if (sweep.strategies.empty()) throw ConfigError("sweep.strategies", "must not be empty");
    if (sweep.taus.empty()) throw ConfigError("sweep.tau", "must not be empty");
    if (sweep.workers.empty()) throw ConfigError("sweep.workers", "must not be empty");
    if (sweep.seeds.empty()) throw ConfigError("sweep.seeds", "must not be empty");
    for (auto t : sweep.taus)
        if (t == 0) throw ConfigError("sweep.tau", "values must be at least 1");
    for (auto k : sweep.workers)
        if (k == 0) throw ConfigError("sweep.workers", "values must be at least 1");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (dataset.source == DatasetSource::csv && dataset.train_path.empty())
        throw ConfigError("dataset.train", "path required");
    if (dataset.source == DatasetSource::idx) {
        if (dataset.train_images.empty()) throw ConfigError("dataset.train_images", "path required");
        if (dataset.train_labels.empty()) throw ConfigError("dataset.train_labels", "path required");
        if (dataset.test_images.has_value() != dataset.test_labels.has_value())
            throw ConfigError("dataset.test_images", "test images and labels must be given together");
    }
}

ExperimentSpec parse_experiment(const json& doc) {
    ObjectReader r(doc, "");
    ExperimentSpec spec;
    if (const json* v = r.find("dataset")) spec.dataset = parse_dataset(*v);
    if (const json* v = r.find("model")) {
        ObjectReader mr(*v, "model");
        if (const json* h = mr.find("hidden"))
            spec.train.hidden = parse_list<std::size_t>(*h, "model.hidden", ObjectReader::as_size);
        mr.finish();
    }
    if (const json* v = r.find("train")) {
        const auto hidden = spec.train.hidden;
        spec.train = train_config_from_json(*v, "train");
        spec.train.hidden = hidden;
    }
    if (const json* v = r.find("sweep")) {
        ObjectReader sr(*v, "sweep");
        if (const json* s = sr.find("strategies"))
            spec.sweep.strategies = parse_list<Strategy>(*s, "sweep.strategies", [](const json& item, const std::string& w) {
                if (!item.is_string()) throw ConfigError(w, "expected a strategy name");
                try {
                    return strategy_from_string(item.get<std::string>());
                } catch (const ConfigError& e) {
                    throw ConfigError(w, e.what());
                }
            });
        if (const json* s = sr.find("tau")) spec.sweep.taus = parse_list<std::size_t>(*s, "sweep.tau", parse_tau);
        if (const json* s = sr.find("workers"))
            spec.sweep.workers = parse_list<std::size_t>(*s, "sweep.workers", ObjectReader::as_size);
        if (const json* s = sr.find("seeds"))
            spec.sweep.seeds = parse_list<std::uint64_t>(*s, "sweep.seeds", [](const json& item, const std::string& w) {
                if (!item.is_number_unsigned()) throw ConfigError(w, "expected a non-negative integer");
                return item.get<std::uint64_t>();
            });
        sr.finish();
    }
    r.read("output_dir", spec.output_dir);
    r.finish();
    spec.validate();
    return spec;
}

ExperimentSpec parse_experiment_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_experiment(doc);
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_text(ss.str());
}

json experiment_to_json(const ExperimentSpec& spec) {
    json train = config_to_json(spec.train);
    json strategies = json::array();
    for (auto s : spec.sweep.strategies) strategies.push_back(to_string(s));
    json taus = json::array();
    for (auto t : spec.sweep.taus) taus.push_back(tau_json(t));
    return {{"dataset", dataset_to_json(spec.dataset)},
            {"model", {{"hidden", spec.train.hidden}}},
            {"train", train},
            {"sweep",
             {{"strategies", strategies}, {"tau", taus}, {"workers", spec.sweep.workers}, {"seeds", spec.sweep.seeds}}},
            {"output_dir", spec.output_dir}};
}

std::string print_experiment(const ExperimentSpec& spec) { return experiment_to_json(spec).dump(2) + "\n"; }

Dataset load_dataset(const DatasetSpec& spec) {
    switch (spec.source) {
        case DatasetSource::synthetic:
            return generate_synthetic(spec.synthetic);
        case DatasetSource::csv: {
            LabeledBatch train = read_csv(spec.train_path);
            if (spec.test_path) return make_dataset(std::move(train), read_csv(*spec.test_path));
            auto [tr, te] = split_train_test(train, spec.split_seed);
            return make_dataset(std::move(tr), std::move(te));
        }
        case DatasetSource::idx: {
            LabeledBatch train{read_idx_images(spec.train_images), read_idx_labels(spec.train_labels), std::nullopt};
            if (train.inputs.size() != train.labels.size())
                throw InvalidInput("IDX image and label counts differ");
            if (spec.test_images) {
                LabeledBatch test{read_idx_images(*spec.test_images), read_idx_labels(*spec.test_labels), std::nullopt};
                if (test.inputs.size() != test.labels.size())
                    throw InvalidInput("IDX test image and label counts differ");
                return make_dataset(std::move(train), std::move(test));
            }
            auto [tr, te] = split_train_test(train, spec.split_seed);
            return make_dataset(std::move(tr), std::move(te));
        }
    }
    throw ConfigError("dataset.source", "unsupported source " + source_name(spec.source));
}

std::filesystem::path resolve_output_dir(const std::string& output_dir) {
    std::filesystem::path dir(output_dir);
    if (dir.is_relative()) {
        if (const char* root = std::getenv("ECDNN_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
    }
    return dir;
}

}  // namespace ecdnn
