#pragma once

// Parameter snapshots: JSON documents
//   {"format": "ecdnn-snapshot", "version": 1,
//    "layer_sizes": [...], "activations": ["relu", ...],
//    "values": ["3ff0000000000000", ...]}
// Each value is the 16-hex-digit IEEE-754 bit pattern of the f64, so a
// save/load round trip is bit-exact.

#include <filesystem>
#include <string>

#include "ecdnn/nn.hpp"

namespace ecdnn {

inline constexpr int kSnapshotVersion = 1;

std::string encode_f64(double value);
double decode_f64(const std::string& hex);

std::string snapshot_to_string(const DenseNet& net);
DenseNet snapshot_from_string(const std::string& text);

void save_snapshot(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_snapshot(const std::filesystem::path& path);

}  // namespace ecdnn
