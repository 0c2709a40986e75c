#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecdnn/nn.hpp"
#include "ecdnn/rng.hpp"

namespace ecdnn {

/// Seeded mini-batch ordering: a fresh shuffle of [0, n) each epoch,
/// consumed in consecutive slices. The last slice of an epoch may be short.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

    std::span<const std::size_t> next();
    std::size_t epoch() const { return epoch_; }

private:
    void reshuffle();

    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t batch_size_;
    std::size_t cursor_ = 0;
    std::size_t epoch_ = 0;
};

/// Copies the selected examples (and their soft targets, if any).
LabeledBatch gather(const LabeledBatch& source, std::span<const std::size_t> indices);

/// One SGD step on the batch-mean of the selected loss. Returns the mean
/// loss at the pre-step parameters.
double train_step(DenseNet& net, const LabeledBatch& batch, const LossSpec& loss, OptState& opt);

/// Fraction of misclassified examples (argmax, first index wins ties).
double error_rate(const DenseNet& net, const LabeledBatch& data);

/// Mean plain cross entropy.
double mean_loss(const DenseNet& net, const LabeledBatch& data);

std::size_t argmax(std::span<const double> v);

}  // namespace ecdnn
