#include "ecdnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecdnn/error.hpp"
#include "ecdnn/rng.hpp"

namespace ecdnn {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu:
            return "relu";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    throw InvalidInput("unknown activation '" + name + "'");
}

Layout::Layout(std::vector<std::size_t> layer_sizes)
    : Layout(layer_sizes, std::vector<Activation>(layer_sizes.size() > 2 ? layer_sizes.size() - 2 : 0,
                                                  Activation::relu)) {}

Layout::Layout(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations)
    : sizes_(std::move(layer_sizes)), activations_(std::move(activations)) {
    if (sizes_.size() < 2) throw InvalidInput("a network needs at least an input and an output layer");
    if (std::find(sizes_.begin(), sizes_.end(), 0u) != sizes_.end())
        throw InvalidInput("layer sizes must be positive");
    if (activations_.size() != sizes_.size() - 2)
        throw InvalidInput("expected one activation per hidden layer");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
        offsets_.push_back(offsets_.back() + (sizes_[l] + 1) * sizes_[l + 1]);
}

ParameterVector::ParameterVector(Layout layout)
    : layout_(std::make_shared<const Layout>(std::move(layout))),
      values_(layout_->parameter_count(), 0.0) {}

ParameterVector::ParameterVector(Layout layout, Vector values)
    : ParameterVector(std::make_shared<const Layout>(std::move(layout)), std::move(values)) {}

ParameterVector::ParameterVector(std::shared_ptr<const Layout> layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
    if (values_.size() != layout_->parameter_count())
        throw LayoutMismatch("parameter count " + std::to_string(values_.size()) +
                             " does not match layout (" + std::to_string(layout_->parameter_count()) +
                             ")");
}

void ParameterVector::require_same_layout(const ParameterVector& other) const {
    if (!same_layout(other)) throw LayoutMismatch("parameter vectors have different layouts");
}

void ParameterVector::scale(double factor) {
    for (auto& v : values_) v *= factor;
}

DenseNet DenseNet::zeros(const Layout& layout) { return DenseNet(ParameterVector(layout)); }

DenseNet DenseNet::initialize(const Layout& layout, std::uint64_t seed) {
    ParameterVector params(layout);
    Rng rng(seed);
    const auto& sizes = layout.layer_sizes();
    for (std::size_t l = 0; l < layout.num_affine(); ++l) {
        const double s = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        const std::size_t begin = layout.weight_offset(l);
        const std::size_t end = layout.bias_offset(l);
        for (std::size_t i = begin; i < end; ++i) params[i] = rng.uniform(-s, s);
    }
    return DenseNet(std::move(params));
}

namespace {

void softmax_inplace(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

// Activations of one example: acts[0] is the input, acts[l] the output of
// affine layer l-1 (post-ReLU for hidden layers, post-softmax at the end).
struct ForwardTrace {
    std::vector<Vector> acts;
};

void forward_trace(const ParameterVector& params, std::span<const double> x, ForwardTrace& trace) {
    const Layout& layout = params.layout();
    const auto& sizes = layout.layer_sizes();
    if (x.size() != sizes.front())
        throw InvalidInput("input has dimension " + std::to_string(x.size()) + ", network expects " +
                           std::to_string(sizes.front()));
    const std::size_t layers = layout.num_affine();
    trace.acts.resize(layers + 1);
    trace.acts[0].assign(x.begin(), x.end());
    const auto w = params.values();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t n_in = sizes[l];
        const std::size_t n_out = sizes[l + 1];
        const double* weights = w.data() + layout.weight_offset(l);
        const double* bias = w.data() + layout.bias_offset(l);
        const Vector& in = trace.acts[l];
        Vector& out = trace.acts[l + 1];
        out.resize(n_out);
        for (std::size_t o = 0; o < n_out; ++o) {
            double acc = bias[o];
            const double* row = weights + o * n_in;
            for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
            out[o] = acc;
        }
        if (l + 1 < layers) {
            for (auto& v : out) v = v > 0.0 ? v : 0.0;
        } else {
            softmax_inplace(out);
        }
    }
}

// Accumulates into `delta` the derivative w.r.t. the logits of
// weight * CE(p, target). The clamp makes the loss flat where p < kLogClamp.
void add_ce_logit_grad(std::span<const double> p, std::span<const double> target, double weight,
                       std::span<double> delta) {
    double active_mass = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c)
        if (p[c] >= kLogClamp) active_mass += target[c];
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double own = p[c] >= kLogClamp ? target[c] : 0.0;
        delta[c] += weight * (p[c] * active_mass - own);
    }
}

void add_ce_logit_grad(std::span<const double> p, std::size_t label, double weight,
                       std::span<double> delta) {
    const bool active = p[label] >= kLogClamp;
    if (!active) return;
    for (std::size_t c = 0; c < p.size(); ++c) delta[c] += weight * p[c];
    delta[label] -= weight;
}

// weight * loss_sim(p, z) = -weight * ||p - z||^2, pushed through the softmax Jacobian.
void add_sim_logit_grad(std::span<const double> p, std::span<const double> z, double weight,
                        std::span<double> delta) {
    double dot = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) dot += p[c] * (-2.0 * weight * (p[c] - z[c]));
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double g = -2.0 * weight * (p[c] - z[c]);
        delta[c] += p[c] * (g - dot);
    }
}

const std::vector<Vector>& require_soft_targets(const LabeledBatch& batch, const char* what) {
    if (!batch.soft_targets) throw InvalidInput(std::string(what) + " requires soft targets");
    if (batch.soft_targets->size() != batch.size())
        throw InvalidInput("soft target count does not match input count");
    return *batch.soft_targets;
}

// Loss of one example given its output probabilities.
double example_loss(std::span<const double> p, const LabeledBatch& batch, std::size_t i,
                    const LossSpec& loss) {
    double value = loss_ce(p, batch.labels[i]);
    if (const auto* div = std::get_if<DiversityLoss>(&loss); div && div->alpha != 0.0)
        value += div->alpha * loss_sim(p, (*batch.soft_targets)[i]);
    if (const auto* comp = std::get_if<CompressionLoss>(&loss); comp && comp->beta != 0.0)
        value += comp->beta * loss_ce(p, (*batch.soft_targets)[i]);
    return value;
}

void check_loss_inputs(const LabeledBatch& batch, const LossSpec& loss) {
    if (batch.labels.size() != batch.inputs.size())
        throw InvalidInput("label count does not match input count");
    if (const auto* div = std::get_if<DiversityLoss>(&loss)) {
        if (div->alpha < 0.0) throw ConfigError("alpha", "must be non-negative");
        if (div->alpha > 0.0) require_soft_targets(batch, "diversity regularized loss with alpha > 0");
    }
    if (const auto* comp = std::get_if<CompressionLoss>(&loss)) {
        if (comp->beta < 0.0) throw ConfigError("beta", "must be non-negative");
        require_soft_targets(batch, "compression loss");
    }
}

}  // namespace

Vector DenseNet::forward(std::span<const double> x) const {
    ForwardTrace trace;
    forward_trace(params_, x, trace);
    return std::move(trace.acts.back());
}

void LabeledBatch::validate(std::size_t input_dim, std::size_t num_classes) const {
    if (labels.size() != inputs.size()) throw InvalidInput("label count does not match input count");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].size() != input_dim) throw InvalidInput("input " + std::to_string(i) + " has wrong dimension");
        if (labels[i] >= num_classes) throw InvalidInput("label " + std::to_string(i) + " out of range");
    }
    if (!soft_targets) return;
    if (soft_targets->size() != inputs.size())
        throw InvalidInput("soft target count does not match input count");
    for (const auto& t : *soft_targets) {
        if (t.size() != num_classes) throw InvalidInput("soft target has wrong length");
        double sum = 0.0;
        for (double v : t) {
            if (!(v >= 0.0)) throw InvalidInput("soft target has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("soft target does not sum to one");
    }
}

double loss_ce(std::span<const double> pred, std::size_t label) {
    if (label >= pred.size()) throw InvalidInput("label out of range");
    return -std::log(std::max(pred[label], kLogClamp));
}

double loss_ce(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) throw InvalidInput("prediction and target lengths differ");
    double sum = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) sum -= target[c] * std::log(std::max(pred[c], kLogClamp));
    return sum;
}

double loss_sim(std::span<const double> pred, std::span<const double> zbar) {
    if (pred.size() != zbar.size()) throw InvalidInput("prediction and zbar lengths differ");
    double sq = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
        const double d = pred[c] - zbar[c];
        sq += d * d;
    }
    return -sq;
}

double evaluate_loss(const DenseNet& net, const LabeledBatch& batch, const LossSpec& loss) {
    check_loss_inputs(batch, loss);
    ForwardTrace trace;
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        forward_trace(net.params(), batch.inputs[i], trace);
        total += example_loss(trace.acts.back(), batch, i, loss);
    }
    return total;
}

double local_loss(const DenseNet& net, const LabeledBatch& batch, double alpha) {
    return evaluate_loss(net, batch, DiversityLoss{alpha});
}

double compression_loss(const DenseNet& net, const LabeledBatch& batch, double beta) {
    return evaluate_loss(net, batch, CompressionLoss{beta});
}

LossAndGradient loss_and_gradient(const DenseNet& net, const LabeledBatch& batch, const LossSpec& loss) {
    check_loss_inputs(batch, loss);
    const ParameterVector& params = net.params();
    const Layout& layout = params.layout();
    const auto& sizes = layout.layer_sizes();
    const std::size_t layers = layout.num_affine();
    const auto w = params.values();

    LossAndGradient out{0.0, params.zeros_like()};
    auto g = out.gradient.values();

    ForwardTrace trace;
    Vector delta;
    Vector prev_delta;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        forward_trace(params, batch.inputs[i], trace);
        const Vector& p = trace.acts.back();
        out.loss += example_loss(p, batch, i, loss);

        delta.assign(p.size(), 0.0);
        add_ce_logit_grad(p, batch.labels[i], 1.0, delta);
        if (const auto* div = std::get_if<DiversityLoss>(&loss); div && div->alpha != 0.0)
            add_sim_logit_grad(p, (*batch.soft_targets)[i], div->alpha, delta);
        if (const auto* comp = std::get_if<CompressionLoss>(&loss); comp && comp->beta != 0.0)
            add_ce_logit_grad(p, (*batch.soft_targets)[i], comp->beta, delta);

        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t n_in = sizes[l];
            const std::size_t n_out = sizes[l + 1];
            const Vector& in = trace.acts[l];
            double* gw = g.data() + layout.weight_offset(l);
            double* gb = g.data() + layout.bias_offset(l);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = delta[o];
                gb[o] += d;
                if (d == 0.0) continue;
                double* row = gw + o * n_in;
                for (std::size_t k = 0; k < n_in; ++k) row[k] += d * in[k];
            }
            if (l == 0) break;
            const double* weights = w.data() + layout.weight_offset(l);
            prev_delta.assign(n_in, 0.0);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = weights + o * n_in;
                for (std::size_t k = 0; k < n_in; ++k) prev_delta[k] += row[k] * d;
            }
            // ReLU derivative; in[k] is the post-activation of layer l-1.
            for (std::size_t k = 0; k < n_in; ++k)
                if (!(in[k] > 0.0)) prev_delta[k] = 0.0;
            std::swap(delta, prev_delta);
        }
    }
    return out;
}

ParameterVector backward(const DenseNet& net, const LabeledBatch& batch, const LossSpec& loss) {
    return loss_and_gradient(net, batch, loss).gradient;
}

OptState OptState::for_params(const ParameterVector& params, double learning_rate, double momentum,
                              double l2) {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum", "must lie in [0, 1)");
    if (!(l2 >= 0.0)) throw ConfigError("l2", "must be non-negative");
    return OptState{learning_rate, momentum, l2, params.zeros_like()};
}

void sgd_step(ParameterVector& params, const ParameterVector& grad, OptState& opt) {
    params.require_same_layout(grad);
    params.require_same_layout(opt.velocity);
    auto p = params.values();
    auto g = grad.values();
    auto v = opt.velocity.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = opt.momentum * v[i] + g[i] + opt.l2 * p[i];
        p[i] -= opt.learning_rate * v[i];
    }
}

}  // namespace ecdnn
