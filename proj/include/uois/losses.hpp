#pragma once

// Training losses with analytic gradients with respect to the network's
// post-softmax probabilities and post-normalization direction vectors.

#include "uois/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace uois {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kBackgroundDirectionWeight = 0.1;

template <typename Scalar>
using ProbArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel weights, each class's pixels sharing an equal part of the total
/// so that classes present in `gt` weigh the same. Sums to 1.
template <typename Scalar>
Raster<Scalar> semantic_weights(const SemanticLabels& gt)
{
    std::vector<long> counts(std::size_t(gt.classes()), 0);
    const auto& raw = gt.labels();
    for (Eigen::Index i = 0; i < raw.size(); ++i)
        ++counts[raw.data()[i]];
    const auto present = std::count_if(counts.begin(), counts.end(), [](long n) { return n > 0; });
    Raster<Scalar> w(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.size(); ++i)
        w.data()[i] = Scalar(1) / (Scalar(counts[raw.data()[i]]) * Scalar(present));
    return w;
}

template <typename Scalar>
struct SemanticLossResult {
    Scalar value;
    ProbArray<Scalar> grad;  // same layout as the probabilities
};

/// Weighted cross entropy, sum_i w_i * -log(max(p_i[gt_i], floor)).
template <typename Scalar>
SemanticLossResult<Scalar> semantic_loss(const ProbArray<Scalar>& probs, const SemanticLabels& gt)
{
    if (probs.rows() != gt.grid().size() || probs.cols() != gt.classes())
        throw Error("semantic loss: probabilities are " + std::to_string(probs.rows()) + "x" + std::to_string(probs.cols()) + ", expected " +
                    std::to_string(gt.grid().size()) + "x" + std::to_string(gt.classes()));
    const Raster<Scalar> w = semantic_weights<Scalar>(gt);
    const auto& raw = gt.labels();
    const Scalar floor(kProbabilityFloor);
    SemanticLossResult<Scalar> out{Scalar(0), ProbArray<Scalar>::Zero(probs.rows(), probs.cols())};
    Raster<Scalar> terms(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const int k = raw.data()[i];
        const Scalar p = probs(i, k);
        const Scalar wi = w.data()[i];
        terms.data()[i] = -wi * std::log(std::max(p, floor));
        out.grad(i, k) = p > floor ? -wi / p : Scalar(0);
    }
    out.value = terms.sum();
    return out;
}

template <typename Scalar>
SemanticLossResult<Scalar> semantic_loss(const SemanticProbs<Scalar>& pred, const SemanticLabels& gt)
{
    require_same_grid(pred.grid(), gt.grid(), "semantic loss");
    return semantic_loss(pred.probs(), gt);
}

/// Two-class (background, foreground) cross entropy for the refinement network.
template <typename Scalar>
SemanticLossResult<Scalar> rrn_loss(const ProbArray<Scalar>& probs, const BinaryMask& gt)
{
    return semantic_loss(probs, SemanticLabels(gt.cast<std::uint8_t>(), 2));
}

template <typename Scalar>
struct DirectionLossWeights {
    Raster<Scalar> alpha;  // object pixels; each instance sums to 1
    Raster<Scalar> beta;   // background and table pixels; sums to 1
    Scalar lambda_bt = Scalar(kBackgroundDirectionWeight);
};

template <typename Scalar>
DirectionLossWeights<Scalar> direction_weights(const InstanceLabelMap& gt)
{
    const auto& l = gt.labels();
    std::vector<long> counts(std::size_t(gt.num_instances()), 0);
    long rest = 0;
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        if (l.data()[i] >= kFirstInstanceId)
            ++counts[std::size_t(l.data()[i] - kFirstInstanceId)];
        else
            ++rest;
    }
    DirectionLossWeights<Scalar> out{Raster<Scalar>::Zero(l.rows(), l.cols()), Raster<Scalar>::Zero(l.rows(), l.cols())};
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        if (l.data()[i] >= kFirstInstanceId)
            out.alpha.data()[i] = Scalar(1) / Scalar(counts[std::size_t(l.data()[i] - kFirstInstanceId)]);
        else
            out.beta.data()[i] = Scalar(1) / Scalar(rest);
    }
    return out;
}

template <typename Scalar>
struct DirectionLossResult {
    Scalar value;
    Raster<Scalar> grad_drow;
    Raster<Scalar> grad_dcol;
};

/// Weighted cosine loss. Object pixels are compared with `gt`, background and
/// table pixels with the fixed direction.
template <typename Scalar>
DirectionLossResult<Scalar> direction_loss(const Raster<Scalar>& drow, const Raster<Scalar>& dcol, const DirectionField<Scalar>& gt,
                                           const InstanceLabelMap& gt_instances)
{
    require_same_grid(ImageGrid::of(drow), gt.grid(), "direction loss");
    require_same_grid(ImageGrid::of(dcol), gt.grid(), "direction loss");
    require_same_grid(gt_instances.grid(), gt.grid(), "direction loss");
    const auto weights = direction_weights<Scalar>(gt_instances);
    const BinaryMask object = gt_instances.labels() >= kFirstInstanceId;
    const Scalar half(0.5);
    const Scalar fr(kFixedDirection.x());
    const Scalar fc(kFixedDirection.y());

    const Raster<Scalar> target_r = object.select(gt.drow(), Raster<Scalar>::Constant(drow.rows(), drow.cols(), fr));
    const Raster<Scalar> target_c = object.select(gt.dcol(), Raster<Scalar>::Constant(drow.rows(), drow.cols(), fc));
    const Raster<Scalar> coef = object.select(weights.alpha, weights.lambda_bt * weights.beta) * half;

    DirectionLossResult<Scalar> out;
    out.value = (coef * (Scalar(1) - (drow * target_r + dcol * target_c))).sum();
    out.grad_drow = -coef * target_r;
    out.grad_dcol = -coef * target_c;
    return out;
}

template <typename Scalar>
DirectionLossResult<Scalar> direction_loss(const DirectionField<Scalar>& pred, const DirectionField<Scalar>& gt, const InstanceLabelMap& gt_instances)
{
    return direction_loss(pred.drow(), pred.dcol(), gt, gt_instances);
}

template <typename Scalar>
struct TotalLossResult {
    Scalar value;
    SemanticLossResult<Scalar> semantic;
    DirectionLossResult<Scalar> direction;
};

template <typename Scalar>
TotalLossResult<Scalar> total_loss(const SemanticProbs<Scalar>& semantic, const DirectionField<Scalar>& directions, const InstanceLabelMap& gt,
                                   const DirectionField<Scalar>& gt_directions)
{
    TotalLossResult<Scalar> out{Scalar(0), semantic_loss(semantic, gt.semantic()), direction_loss(directions, gt_directions, gt)};
    out.value = out.semantic.value + out.direction.value;
    return out;
}

}  // namespace uois
