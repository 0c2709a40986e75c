#include "ecdnn/aggregation.hpp"

#include "ecdnn/error.hpp"

namespace ecdnn {

ParameterVector ma_aggregate(std::span<const ParameterVector> params_list) {
    if (params_list.empty()) throw InvalidInput("cannot average an empty set of models");
    ParameterVector out = params_list.front().zeros_like();
    auto acc = out.values();
    for (const auto& p : params_list) {
        out.require_same_layout(p);
        const auto v = p.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    }
    const double k = static_cast<double>(params_list.size());
    for (auto& a : acc) a /= k;
    return out;
}

EnsembleModel::EnsembleModel(std::vector<DenseNet> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidInput("an ensemble needs at least one member");
    for (const auto& m : members_) members_.front().params().require_same_layout(m.params());
}

Vector EnsembleModel::predict(std::span<const double> x) const {
    Vector acc(members_.front().num_classes(), 0.0);
    for (const auto& m : members_) {
        const Vector out = m.forward(x);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += out[c];
    }
    const double k = static_cast<double>(members_.size());
    for (auto& a : acc) a /= k;
    return acc;
}

JensenGap jensen_gap(const EnsembleModel& ens, const LabeledBatch& batch) {
    if (batch.size() == 0) throw InvalidInput("empty batch");
    JensenGap gap;
    const double k = static_cast<double>(ens.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        gap.lhs += loss_ce(ens.predict(batch.inputs[i]), batch.labels[i]);
        double member_sum = 0.0;
        for (const auto& m : ens.members()) member_sum += loss_ce(m.forward(batch.inputs[i]), batch.labels[i]);
        gap.rhs += member_sum / k;
    }
    const double n = static_cast<double>(batch.size());
    gap.lhs /= n;
    gap.rhs /= n;
    return gap;
}

AveragingProbe ma_nonconvex_probe(std::span<const ParameterVector> params_list, const LabeledBatch& batch) {
    if (batch.size() == 0) throw InvalidInput("empty batch");
    const double n = static_cast<double>(batch.size());
    AveragingProbe probe;
    const DenseNet averaged(ma_aggregate(params_list));
    probe.averaged_model_loss = evaluate_loss(averaged, batch, PlainLoss{}) / n;
    for (const auto& p : params_list) probe.mean_member_loss += evaluate_loss(DenseNet(p), batch, PlainLoss{}) / n;
    probe.mean_member_loss /= static_cast<double>(params_list.size());
    return probe;
}

}  // namespace ecdnn
