#include "ecdnn/compression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ecdnn/error.hpp"
#include "ecdnn/format.hpp"
#include "ecdnn/rng.hpp"
#include "ecdnn/training.hpp"

namespace ecdnn {

BetaSchedule default_beta_schedule() { return {{0.0, 0.4}, {0.2, 0.6}}; }

void validate_beta_schedule(const BetaSchedule& schedule) {
    if (schedule.empty()) throw ConfigError("beta_schedule", "must not be empty");
    if (schedule.front().threshold != 0.0)
        throw ConfigError("beta_schedule", "first threshold must be 0");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule[i];
        if (!(s.threshold >= 0.0 && s.threshold <= 1.0))
            throw ConfigError("beta_schedule", "thresholds must lie in [0, 1]");
        if (!(s.beta >= 0.0)) throw ConfigError("beta_schedule", "beta values must be non-negative");
        if (i > 0 && !(s.threshold > schedule[i - 1].threshold))
            throw ConfigError("beta_schedule", "thresholds must be strictly increasing");
    }
}

double beta_at(const BetaSchedule& schedule, double progress) {
    double beta = schedule.front().beta;
    for (const auto& s : schedule) {
        if (s.threshold <= progress) beta = s.beta;
        else break;
    }
    return beta;
}

void RelabelPlan::validate() const {
    if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("mu", "must lie in (0, 1]");
    validate_beta_schedule(beta_schedule);
}

std::size_t RelabelPlan::subset_size(std::size_t m) const {
    validate();
    // The tolerance keeps e.g. 0.7 * 10 (= 7.000000000000001) from rounding up to 8.
    const double raw = mu * static_cast<double>(m);
    const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    if (n == 0)
        throw ConfigError("mu", "relabeled subset is empty (mu * m_k < 1 for m_k = " + std::to_string(m) + ")");
    return std::min(n, m);
}

std::vector<std::size_t> RelabelPlan::select(std::size_t m) const {
    const std::size_t n = subset_size(m);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(n);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<Vector> make_pseudo_labels(std::span<const DenseNet> members, std::span<const Vector> inputs,
                                       MemoryProbe* probe) {
    if (members.empty()) throw InvalidInput("pseudo-labeling needs at least one member");
    for (const auto& m : members) members.front().params().require_same_layout(m.params());
    const std::size_t classes = members.front().num_classes();

    SumHold sum_hold(probe);
    std::vector<Vector> sums(inputs.size(), Vector(classes, 0.0));
    for (const auto& member : members) {
        ModelHold hold(probe);
        for (std::size_t j = 0; j < inputs.size(); ++j) {
            const Vector out = member.forward(inputs[j]);
            for (std::size_t c = 0; c < classes; ++c) sums[j][c] += out[c];
        }
    }
    const double k = static_cast<double>(members.size());
    for (auto& row : sums)
        for (auto& v : row) v /= k;
    return sums;
}

CompressResult compress(const ParameterVector& local, std::span<const DenseNet> members,
                        const LabeledBatch& local_data, const RelabelPlan& plan, std::size_t p, OptState& opt,
                        const CompressOptions& options) {
    plan.validate();
    if (local_data.size() == 0) throw InvalidInput("cannot compress on an empty local dataset");

    ModelHold own(options.probe);
    CompressResult result{local, {}, 0};

    const auto subset = plan.select(local_data.size());
    result.relabeled = gather(local_data, subset);
    result.relabeled.soft_targets = make_pseudo_labels(members, result.relabeled.inputs, options.probe);
    if (p == 0) return result;

    DenseNet net(std::move(result.params));
    BatchSampler sampler(result.relabeled.size(), options.batch_size, options.shuffle_seed);
    for (std::size_t i = 0; i < p; ++i) {
        const double progress = options.round_progress
                                    ? *options.round_progress
                                    : static_cast<double>(i) / static_cast<double>(p);
        const LabeledBatch batch = gather(result.relabeled, sampler.next());
        train_step(net, batch, CompressionLoss{beta_at(plan.beta_schedule, progress)}, opt);
    }
    result.params = std::move(net.params());
    result.steps = p;
    return result;
}

void write_relabeled_csv(const std::filesystem::path& path, const LabeledBatch& relabeled) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t d = relabeled.inputs.empty() ? 0 : relabeled.inputs.front().size();
    const std::size_t c =
        relabeled.soft_targets && !relabeled.soft_targets->empty() ? relabeled.soft_targets->front().size() : 0;
    out << "label";
    for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
    for (std::size_t j = 0; j < c; ++j) out << ",ybar" << j;
    out << '\n';
    for (std::size_t i = 0; i < relabeled.size(); ++i) {
        out << relabeled.labels[i];
        for (double v : relabeled.inputs[i]) out << ',' << format_double(v);
        if (relabeled.soft_targets)
            for (double v : (*relabeled.soft_targets)[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace ecdnn
