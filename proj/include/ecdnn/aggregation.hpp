#pragma once

// The two aggregation operators (parameter averaging and output ensembling)
// and numerical probes of how each interacts with a loss that is convex in
// the model output.

#include <span>
#include <vector>

#include "ecdnn/nn.hpp"

namespace ecdnn {

/// Elementwise mean of K >= 1 parameter vectors with identical layouts.
ParameterVector ma_aggregate(std::span<const ParameterVector> params_list);

/// Uniformly weighted ensemble kept as a member list; the equivalent wide
/// network is never built.
class EnsembleModel {
public:
    /// Throws InvalidInput when empty, LayoutMismatch on differing layouts.
    explicit EnsembleModel(std::vector<DenseNet> members);

    std::size_t size() const { return members_.size(); }
    const std::vector<DenseNet>& members() const { return members_; }
    const Layout& layout() const { return members_.front().layout(); }

    /// Mean of the members' probability outputs, summed in member order.
    Vector predict(std::span<const double> x) const;

private:
    std::vector<DenseNet> members_;
};

inline Vector ensemble_predict(const EnsembleModel& ens, std::span<const double> x) {
    return ens.predict(x);
}

struct JensenGap {
    double lhs = 0.0;  ///< mean CE of the ensemble prediction
    double rhs = 0.0;  ///< mean over the batch of the average member CE
};

/// For cross entropy over probability outputs lhs <= rhs always holds.
JensenGap jensen_gap(const EnsembleModel& ens, const LabeledBatch& batch);

struct AveragingProbe {
    double averaged_model_loss = 0.0;
    double mean_member_loss = 0.0;
};

/// Mean CE of the parameter-averaged model vs. the mean of the members' mean
/// CE. No ordering between the two is implied for non-convex networks.
AveragingProbe ma_nonconvex_probe(std::span<const ParameterVector> params_list,
                                  const LabeledBatch& batch);

}  // namespace ecdnn
