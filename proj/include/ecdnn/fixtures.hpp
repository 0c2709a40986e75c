#pragma once

// Mirror-basin instance: a 1-H-2 ReLU net fitted to |x| > 1 on data that is
// symmetric under x -> -x, and its mirror image (first-layer weights
// negated). Both members have identical loss; their parameter average maps
// every input to the same hidden activations and so predicts a constant.

#include <filesystem>

#include "ecdnn/nn.hpp"

namespace ecdnn {

struct MirrorBasin {
    DenseNet member_a;
    DenseNet member_b;
    LabeledBatch train;
    LabeledBatch test;
};

inline constexpr std::size_t kMirrorHidden = 8;

/// Negates the first-layer weights, leaving biases and later layers alone.
DenseNet mirror_first_layer(const DenseNet& net);

MirrorBasin build_mirror_basin(std::uint64_t seed = 7);

/// Writes member_a.json, member_b.json, train.csv and test.csv.
void save_mirror_basin(const std::filesystem::path& dir, const MirrorBasin& basin);
MirrorBasin load_mirror_basin(const std::filesystem::path& dir);

}  // namespace ecdnn
