#pragma once

// Dense feed-forward classifiers with exact backpropagation, the three
// training losses (plain cross entropy, diversity regularized, accelerated
// compression) and SGD with momentum.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ecdnn {

using Vector = std::vector<double>;

/// Lower clamp applied to probabilities before taking logarithms.
inline constexpr double kLogClamp = 1e-12;

enum class Activation { relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Position layout of a flat parameter vector. Affine layer l maps
/// layer_sizes[l] -> layer_sizes[l+1]; its weights are stored row-major
/// ([n_out][n_in]) followed by its n_out biases.
class Layout {
public:
    Layout() = default;
    /// Hidden layers default to ReLU. Throws InvalidInput on fewer than two
    /// sizes or a zero size.
    explicit Layout(std::vector<std::size_t> layer_sizes);
    Layout(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    const std::vector<Activation>& activations() const { return activations_; }

    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    std::size_t num_affine() const { return sizes_.size() - 1; }
    std::size_t parameter_count() const { return offsets_.back(); }

    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
    }

    bool operator==(const Layout& other) const {
        return sizes_ == other.sizes_ && activations_ == other.activations_;
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<Activation> activations_;
    std::vector<std::size_t> offsets_{0};
};

/// Flat ordered parameters bound to a layout. Copies share the (immutable)
/// layout descriptor.
class ParameterVector {
public:
    ParameterVector() = default;
    explicit ParameterVector(Layout layout);
    ParameterVector(Layout layout, Vector values);
    ParameterVector(std::shared_ptr<const Layout> layout, Vector values);

    const Layout& layout() const { return *layout_; }
    const std::shared_ptr<const Layout>& shared_layout() const { return layout_; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool same_layout(const ParameterVector& other) const {
        return layout_ == other.layout_ || *layout_ == *other.layout_;
    }

    /// Throws LayoutMismatch unless `other` has an identical layout.
    void require_same_layout(const ParameterVector& other) const;

    ParameterVector zeros_like() const { return {layout_, Vector(values_.size(), 0.0)}; }

    void scale(double factor);

    bool operator==(const ParameterVector& other) const {
        return same_layout(other) && values_ == other.values_;
    }

private:
    std::shared_ptr<const Layout> layout_;
    Vector values_;
};

class DenseNet {
public:
    DenseNet() = default;
    explicit DenseNet(ParameterVector params) : params_(std::move(params)) {}

    /// All-zero parameters.
    static DenseNet zeros(const Layout& layout);

    /// Weights uniform in [-s, s] with s = sqrt(6 / (n_in + n_out)); biases zero.
    static DenseNet initialize(const Layout& layout, std::uint64_t seed);

    const Layout& layout() const { return params_.layout(); }
    std::size_t input_dim() const { return layout().input_dim(); }
    std::size_t num_classes() const { return layout().output_dim(); }

    const ParameterVector& params() const { return params_; }
    ParameterVector& params() { return params_; }

    /// Class probabilities (softmax of the final affine layer).
    Vector forward(std::span<const double> x) const;

    bool operator==(const DenseNet& other) const { return params_ == other.params_; }

private:
    ParameterVector params_;
};

/// Inputs with hard labels and, optionally, one soft target per example.
/// The soft targets carry the ensemble pseudo-labels during compression and
/// the compressed-model averages during diversity regularized training.
struct LabeledBatch {
    std::vector<Vector> inputs;
    std::vector<std::size_t> labels;
    std::optional<std::vector<Vector>> soft_targets;

    std::size_t size() const { return inputs.size(); }

    /// Throws InvalidInput on count mismatches, out-of-range labels, wrong
    /// input dimension, or soft targets that are not probability vectors.
    void validate(std::size_t input_dim, std::size_t num_classes) const;
};

double loss_ce(std::span<const double> pred, std::size_t label);
double loss_ce(std::span<const double> pred, std::span<const double> target);

/// Negative squared Euclidean distance; never positive.
double loss_sim(std::span<const double> pred, std::span<const double> zbar);

/// Sum over the batch of CE(f(x), y) + alpha * loss_sim(f(x), zbar), with
/// zbar read from `batch.soft_targets`. With alpha == 0 soft targets are
/// ignored. Throws ConfigError if alpha > 0 and soft targets are absent.
double local_loss(const DenseNet& net, const LabeledBatch& batch, double alpha);

/// Sum over the batch of CE(f(x), y) + beta * CE(f(x), ybar) with ybar read
/// from `batch.soft_targets`. Throws ConfigError if soft targets are absent.
double compression_loss(const DenseNet& net, const LabeledBatch& batch, double beta);

struct PlainLoss {};
struct DiversityLoss {
    double alpha = 0.0;
};
struct CompressionLoss {
    double beta = 0.0;
};
using LossSpec = std::variant<PlainLoss, DiversityLoss, CompressionLoss>;

double evaluate_loss(const DenseNet& net, const LabeledBatch& batch, const LossSpec& loss);

struct LossAndGradient {
    double loss = 0.0;
    ParameterVector gradient;
};

/// Exact gradient (summed over the batch) of the selected loss.
ParameterVector backward(const DenseNet& net, const LabeledBatch& batch, const LossSpec& loss);

/// Same as backward() but also returns the loss from the same forward pass.
LossAndGradient loss_and_gradient(const DenseNet& net, const LabeledBatch& batch,
                                  const LossSpec& loss);

struct OptState {
    double learning_rate = 0.05;
    double momentum = 0.9;
    double l2 = 1e-4;
    ParameterVector velocity;

    /// Zero velocity shaped like `params`. Throws ConfigError on a
    /// non-positive learning rate, momentum outside [0, 1) or negative l2.
    static OptState for_params(const ParameterVector& params, double learning_rate,
                               double momentum, double l2);
};

/// velocity <- momentum * velocity + grad + l2 * params;
/// params   <- params - learning_rate * velocity.
void sgd_step(ParameterVector& params, const ParameterVector& grad, OptState& opt);

}  // namespace ecdnn
