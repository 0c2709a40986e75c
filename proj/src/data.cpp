#include "ecdnn/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ecdnn/error.hpp"
#include "ecdnn/format.hpp"
#include "ecdnn/rng.hpp"

namespace ecdnn {

namespace {
constexpr std::uint64_t kStreamSplit = 0x5151;
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::gaussians:
            return "gaussians";
        case SyntheticKind::spirals:
            return "spirals";
        case SyntheticKind::xor_rings:
            return "xor-rings";
    }
    return "unknown";
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
    if (name == "gaussians") return SyntheticKind::gaussians;
    if (name == "spirals") return SyntheticKind::spirals;
    if (name == "xor-rings") return SyntheticKind::xor_rings;
    throw ConfigError("dataset.generator", "unknown generator '" + name + "'");
}

std::pair<LabeledBatch, LabeledBatch> split_train_test(const LabeledBatch& all, std::uint64_t seed) {
    const std::size_t n = all.size();
    if (n < 2) throw ConfigError("dataset.n", "need at least two examples to split");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed({seed, kStreamSplit}));
    rng.shuffle(std::span<std::size_t>(order));
    const std::size_t n_train = std::max<std::size_t>(1, (4 * n) / 5);
    std::pair<LabeledBatch, LabeledBatch> out;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledBatch& dst = i < n_train ? out.first : out.second;
        dst.inputs.push_back(all.inputs[order[i]]);
        dst.labels.push_back(all.labels[order[i]]);
    }
    return out;
}

Dataset make_dataset(LabeledBatch train, LabeledBatch test, std::optional<std::size_t> num_classes) {
    if (train.size() == 0) throw InvalidInput("training set is empty");
    if (test.size() == 0) throw InvalidInput("test set is empty");
    Dataset ds;
    ds.input_dim = train.inputs.front().size();
    std::size_t max_label = 0;
    for (const auto* part : {&train, &test})
        for (auto y : part->labels) max_label = std::max(max_label, y);
    ds.num_classes = num_classes.value_or(max_label + 1);
    train.validate(ds.input_dim, ds.num_classes);
    test.validate(ds.input_dim, ds.num_classes);
    ds.train = std::move(train);
    ds.test = std::move(test);
    return ds;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes < 2) throw ConfigError("dataset.classes", "need at least two classes");
    if (spec.n < spec.classes) throw ConfigError("dataset.n", "must be at least the number of classes");
    if (spec.d == 0) throw ConfigError("dataset.d", "must be positive");
    if (!(spec.noise >= 0.0)) throw ConfigError("dataset.noise", "must be non-negative");
    if (spec.kind != SyntheticKind::gaussians && spec.d != 2)
        throw ConfigError("dataset.d", to_string(spec.kind) + " is two-dimensional");

    Rng rng(spec.seed);
    const double C = static_cast<double>(spec.classes);
    LabeledBatch all;
    all.inputs.reserve(spec.n);
    all.labels.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Vector x(spec.d, 0.0);
        std::size_t label = i % spec.classes;
        switch (spec.kind) {
            case SyntheticKind::gaussians: {
                const double c = static_cast<double>(label);
                if (spec.d == 1) {
                    x[0] = 4.0 * c;
                } else {
                    const double angle = 2.0 * std::numbers::pi * c / C;
                    x[0] = 4.0 * std::cos(angle);
                    x[1] = 4.0 * std::sin(angle);
                }
                for (auto& v : x) v += spec.noise * rng.normal();
                break;
            }
            case SyntheticKind::spirals: {
                const double r = rng.uniform();
                const double angle = 2.0 * std::numbers::pi * static_cast<double>(label) / C + 4.0 * r;
                x[0] = r * std::cos(angle) + spec.noise * rng.normal();
                x[1] = r * std::sin(angle) + spec.noise * rng.normal();
                break;
            }
            case SyntheticKind::xor_rings: {
                x[0] = rng.uniform(-1.0, 1.0);
                x[1] = rng.uniform(-1.0, 1.0);
                const auto ring = static_cast<std::size_t>(std::floor(2.0 * std::hypot(x[0], x[1])));
                const std::size_t parity = (x[0] > 0.0) != (x[1] > 0.0) ? 1 : 0;
                label = (ring + parity) % spec.classes;
                x[0] += spec.noise * rng.normal();
                x[1] += spec.noise * rng.normal();
                break;
            }
        }
        all.inputs.push_back(std::move(x));
        all.labels.push_back(label);
    }
    auto [train, test] = split_train_test(all, spec.seed);
    return make_dataset(std::move(train), std::move(test), spec.classes);
}

LabeledBatch read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput(path.string() + ": missing header");
    std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (line.rfind("label", 0) != 0) throw InvalidInput(path.string() + ": header must start with 'label'");
    LabeledBatch out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != columns)
            throw InvalidInput(path.string() + ":" + std::to_string(row) + ": expected " +
                               std::to_string(columns) + " columns");
        try {
            std::size_t pos = 0;
            const long label = std::stol(cells[0], &pos);
            if (label < 0 || pos != cells[0].size()) throw std::invalid_argument("label");
            Vector x;
            for (std::size_t j = 1; j < cells.size(); ++j) x.push_back(std::stod(cells[j]));
            out.labels.push_back(static_cast<std::size_t>(label));
            out.inputs.push_back(std::move(x));
        } catch (const std::logic_error&) {
            throw InvalidInput(path.string() + ":" + std::to_string(row) + ": malformed number");
        }
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const LabeledBatch& data) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t d = data.inputs.empty() ? 0 : data.inputs.front().size();
    out << "label";
    for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        for (double v : data.inputs[i]) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct IdxFile {
    std::vector<std::uint32_t> dims;
    std::vector<unsigned char> payload;
};

IdxFile read_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<unsigned char, 4> magic{};
    if (!in.read(reinterpret_cast<char*>(magic.data()), 4)) throw InvalidInput(path.string() + ": truncated header");
    if (magic[0] != 0 || magic[1] != 0) throw InvalidInput(path.string() + ": bad IDX magic");
    if (magic[2] != 0x08) throw InvalidInput(path.string() + ": only unsigned-byte IDX payloads are supported");
    IdxFile file;
    std::size_t count = 1;
    for (int i = 0; i < magic[3]; ++i) {
        std::array<unsigned char, 4> b{};
        if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw InvalidInput(path.string() + ": truncated header");
        const std::uint32_t dim = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
                                  (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
        file.dims.push_back(dim);
        count *= dim;
    }
    file.payload.resize(count);
    if (!in.read(reinterpret_cast<char*>(file.payload.data()), static_cast<std::streamsize>(count)))
        throw InvalidInput(path.string() + ": truncated payload");
    return file;
}

}  // namespace

std::vector<Vector> read_idx_images(const std::filesystem::path& path) {
    const IdxFile file = read_idx(path);
    if (file.dims.size() < 2) throw InvalidInput(path.string() + ": image file needs at least two dimensions");
    const std::size_t n = file.dims[0];
    const std::size_t per = n == 0 ? 0 : file.payload.size() / n;
    std::vector<Vector> images(n, Vector(per));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < per; ++j) images[i][j] = file.payload[i * per + j] / 255.0;
    return images;
}

std::vector<std::size_t> read_idx_labels(const std::filesystem::path& path) {
    const IdxFile file = read_idx(path);
    if (file.dims.size() != 1) throw InvalidInput(path.string() + ": label file must be one-dimensional");
    return {file.payload.begin(), file.payload.end()};
}

}  // namespace ecdnn
