#include "ecdnn/training.hpp"

#include <algorithm>
#include <numeric>

#include "ecdnn/error.hpp"

namespace ecdnn {

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : rng_(seed), order_(n), batch_size_(batch_size) {
    if (n == 0) throw InvalidInput("cannot sample batches from an empty set");
    if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
}

void BatchSampler::reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(std::span<std::size_t>(order_));
    cursor_ = 0;
}

std::span<const std::size_t> BatchSampler::next() {
    if (cursor_ >= order_.size()) {
        reshuffle();
        ++epoch_;
    }
    const std::size_t take = std::min(batch_size_, order_.size() - cursor_);
    std::span<const std::size_t> out(order_.data() + cursor_, take);
    cursor_ += take;
    return out;
}

LabeledBatch gather(const LabeledBatch& source, std::span<const std::size_t> indices) {
    LabeledBatch out;
    out.inputs.reserve(indices.size());
    out.labels.reserve(indices.size());
    if (source.soft_targets) out.soft_targets.emplace().reserve(indices.size());
    for (auto i : indices) {
        if (i >= source.size()) throw InvalidInput("example index out of range");
        out.inputs.push_back(source.inputs[i]);
        out.labels.push_back(source.labels[i]);
        if (source.soft_targets) out.soft_targets->push_back((*source.soft_targets)[i]);
    }
    return out;
}

double train_step(DenseNet& net, const LabeledBatch& batch, const LossSpec& loss, OptState& opt) {
    if (batch.size() == 0) throw InvalidInput("empty mini-batch");
    auto [value, grad] = loss_and_gradient(net, batch, loss);
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad.scale(inv);
    sgd_step(net.params(), grad, opt);
    return value * inv;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double error_rate(const DenseNet& net, const LabeledBatch& data) {
    if (data.size() == 0) throw InvalidInput("cannot compute the error of an empty set");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (argmax(net.forward(data.inputs[i])) != data.labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

double mean_loss(const DenseNet& net, const LabeledBatch& data) {
    if (data.size() == 0) throw InvalidInput("cannot compute the loss of an empty set");
    return evaluate_loss(net, data, PlainLoss{}) / static_cast<double>(data.size());
}

}  // namespace ecdnn
