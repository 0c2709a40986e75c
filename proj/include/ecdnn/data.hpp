#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ecdnn/nn.hpp"

namespace ecdnn {

struct Dataset {
    LabeledBatch train;
    LabeledBatch test;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
};

enum class SyntheticKind { gaussians, spirals, xor_rings };

std::string to_string(SyntheticKind kind);
SyntheticKind synthetic_kind_from_string(const std::string& name);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::spirals;
    std::size_t n = 3000;
    std::size_t d = 2;
    std::size_t classes = 3;
    double noise = 0.05;
    std::uint64_t seed = 1;

    bool operator==(const SyntheticSpec&) const = default;
};

/// Deterministic labeled dataset, split 80/20 into train/test by a seeded
/// shuffle.
///  - gaussians: class c centred at radius 4, angle 2*pi*c/C in the first two
///    coordinates (at 4c for d = 1); isotropic noise with std `noise`.
///  - spirals (d = 2): C interleaved arms, radius r ~ U(0, 1), angle
///    2*pi*c/C + 4r; coordinate noise with std `noise`. Class of example i
///    is i mod C, so class counts differ by at most one.
///  - xor_rings (d = 2): x ~ U([-1, 1]^2); label (ring + quadrant parity)
///    mod C where ring = floor(2|x|); coordinate noise added after labeling.
/// Throws ConfigError on n < C, C < 2 or shape restrictions above.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Seeded 80/20 split of `all` (test gets n - floor(4n/5) examples).
std::pair<LabeledBatch, LabeledBatch> split_train_test(const LabeledBatch& all, std::uint64_t seed);

/// CSV with header `label,f0,...,f{d-1}`; one example per row.
LabeledBatch read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const LabeledBatch& data);

/// IDX files (big-endian magic 0x00 0x00 type ndims, then ndims u32 sizes).
/// Only unsigned-byte payloads (type 0x08) are accepted. Images are flattened
/// and scaled to [0, 1].
std::vector<Vector> read_idx_images(const std::filesystem::path& path);
std::vector<std::size_t> read_idx_labels(const std::filesystem::path& path);

/// Builds a Dataset from labeled examples; `num_classes` defaults to
/// max label + 1. Throws InvalidInput on ragged inputs.
Dataset make_dataset(LabeledBatch train, LabeledBatch test, std::optional<std::size_t> num_classes = {});

}  // namespace ecdnn
