#include "ecdnn/snapshot.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecdnn/error.hpp"

namespace ecdnn {

using nlohmann::json;

std::string encode_f64(double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    char buf[17];
    static constexpr char digits[] = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[i] = digits[(bits >> (60 - 4 * i)) & 0xF];
    buf[16] = '\0';
    return buf;
}

double decode_f64(const std::string& hex) {
    std::uint64_t bits = 0;
    const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), bits, 16);
    if (hex.size() != 16 || ec != std::errc{} || ptr != hex.data() + hex.size())
        throw InvalidInput("malformed f64 bit pattern '" + hex + "'");
    return std::bit_cast<double>(bits);
}

std::string snapshot_to_string(const DenseNet& net) {
    const Layout& layout = net.layout();
    json doc;
    doc["format"] = "ecdnn-snapshot";
    doc["version"] = kSnapshotVersion;
    doc["layer_sizes"] = layout.layer_sizes();
    json acts = json::array();
    for (auto a : layout.activations()) acts.push_back(to_string(a));
    doc["activations"] = acts;
    json values = json::array();
    for (double v : net.params().values()) values.push_back(encode_f64(v));
    doc["values"] = values;
    return doc.dump(1);
}

DenseNet snapshot_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
        if (doc.at("format").get<std::string>() != "ecdnn-snapshot")
            throw InvalidInput("not a parameter snapshot");
        if (doc.at("version").get<int>() != kSnapshotVersion)
            throw InvalidInput("unsupported snapshot version");
        std::vector<Activation> acts;
        for (const auto& a : doc.at("activations")) acts.push_back(activation_from_string(a.get<std::string>()));
        Layout layout(doc.at("layer_sizes").get<std::vector<std::size_t>>(), std::move(acts));
        Vector values;
        for (const auto& v : doc.at("values")) values.push_back(decode_f64(v.get<std::string>()));
        return DenseNet(ParameterVector(std::move(layout), std::move(values)));
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed snapshot: ") + e.what());
    }
}

void save_snapshot(const std::filesystem::path& path, const DenseNet& net) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << snapshot_to_string(net) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

DenseNet load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return snapshot_from_string(ss.str());
}

}  // namespace ecdnn
