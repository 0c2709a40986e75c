#pragma once

// Random nets/batches and independent reference computations shared by the
// unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecdnn/nn.hpp"
#include "ecdnn/rng.hpp"

namespace testing_support {

using ecdnn::DenseNet;
using ecdnn::LabeledBatch;
using ecdnn::Layout;
using ecdnn::Rng;
using ecdnn::Vector;

inline DenseNet random_net(const Layout& layout, Rng& rng, double scale = 1.0) {
    DenseNet net = DenseNet::zeros(layout);
    for (auto& v : net.params().values()) v = rng.uniform(-scale, scale);
    return net;
}

inline Vector random_probs(std::size_t c, Rng& rng) {
    Vector p(c);
    double sum = 0.0;
    for (auto& v : p) sum += v = rng.uniform(0.05, 1.0);
    for (auto& v : p) v /= sum;
    return p;
}

inline LabeledBatch random_batch(std::size_t n, std::size_t d, std::size_t c, Rng& rng, bool soft = false) {
    LabeledBatch b;
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(d);
        for (auto& v : x) v = rng.uniform(-1.5, 1.5);
        b.inputs.push_back(x);
        b.labels.push_back(rng.below(c));
    }
    if (soft) {
        b.soft_targets.emplace();
        for (std::size_t i = 0; i < n; ++i) b.soft_targets->push_back(random_probs(c, rng));
    }
    return b;
}

// Layer-by-layer evaluation with explicit weight matrices.
inline Vector reference_forward(const DenseNet& net, const Vector& x) {
    const auto& sizes = net.layout().layer_sizes();
    const auto p = net.params().values();
    std::size_t pos = 0;
    Vector a = x;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t n_in = sizes[l], n_out = sizes[l + 1];
        std::vector<std::vector<double>> W(n_out, std::vector<double>(n_in));
        for (std::size_t o = 0; o < n_out; ++o)
            for (std::size_t i = 0; i < n_in; ++i) W[o][i] = p[pos++];
        Vector z(n_out);
        for (std::size_t o = 0; o < n_out; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < n_in; ++i) s += W[o][i] * a[i];
            z[o] = s;
        }
        for (std::size_t o = 0; o < n_out; ++o) z[o] += p[pos++];
        if (l + 2 < sizes.size())
            for (auto& v : z) v = std::max(0.0, v);
        a = z;
    }
    const double m = *std::max_element(a.begin(), a.end());
    double sum = 0.0;
    for (auto& v : a) sum += v = std::exp(v - m);
    for (auto& v : a) v /= sum;
    return a;
}

inline double reference_ce(const Vector& pred, const Vector& target) {
    double s = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) s -= target[c] * std::log(std::max(pred[c], 1e-12));
    return s;
}

inline Vector one_hot(std::size_t label, std::size_t c) {
    Vector t(c, 0.0);
    t[label] = 1.0;
    return t;
}

}  // namespace testing_support
