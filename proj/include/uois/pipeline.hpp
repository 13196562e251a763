#pragma once

// End-to-end segmentation: point cloud -> dense predictor -> Hough voting ->
// per-instance mask cleanup, plus the crop seam an external refiner plugs into.

#include "uois/augment.hpp"
#include "uois/core.hpp"
#include "uois/morphology.hpp"
#include "uois/voting.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace uois {

struct DensePrediction {
    SemanticProbs<double> semantic;
    DirectionField<double> directions;
};

/// Where a network would plug in: semantic probabilities and center
/// directions for every pixel of the cloud's grid.
class DensePredictor {
public:
    virtual ~DensePredictor() = default;
    virtual DensePrediction predict(const OrganizedPointCloud<double>& cloud) const = 0;
};

/// Test double built from ground truth. Directions are rotated by
/// N(0, direction_noise_deg) degrees per pixel; each pixel's class is replaced
/// by a uniformly chosen other class with probability label_flip_prob.
class OraclePredictor final : public DensePredictor {
public:
    explicit OraclePredictor(InstanceLabelMap gt, double direction_noise_deg = 0.0, double label_flip_prob = 0.0, std::uint64_t seed = 0);

    DensePrediction predict(const OrganizedPointCloud<double>& cloud) const override;

private:
    InstanceLabelMap gt_;
    double noise_deg_;
    double flip_prob_;
    std::uint64_t seed_;
};

struct SegmentParams {
    VotingParams voting;
    VotingMethod method = VotingMethod::Fast;
    bool use_imp = true;
    ImpParams imp;

    static SegmentParams defaults_for(const ImageGrid& grid)
    {
        return {VotingParams::defaults_for(grid), VotingMethod::Fast, true, ImpParams::defaults_for(grid)};
    }
};

struct Segmentation {
    InstanceLabelMap instances;
    InstanceLabelMap initial;  // straight from voting, before cleanup
};

/// Throws Error naming the broken invariant when the prediction does not
/// fit `grid` or has the wrong class count.
void check_prediction(const DensePrediction& prediction, const ImageGrid& grid);

/// Pixels without depth are never objects. With use_imp, each voted mask is
/// cleaned independently; pixels claimed twice go to the nearer center.
Segmentation segment_prediction(const DensePrediction& prediction, const BinaryMask& valid_depth, const SegmentParams& params);

Segmentation segment(const OrganizedPointCloud<double>& cloud, const DensePredictor& predictor, const SegmentParams& params);

/// One crop per instance, in id order, without ground truth.
std::vector<RefinePair> refine_pairs(const InstanceLabelMap& masks, const RgbImage& rgb, double pad_frac = kDefaultPadFrac);

/// Replaces the objects of `base` with refined crop masks (same order as
/// refine_pairs). Table pixels of `base` survive where no mask lands; overlaps
/// go to the later instance; empty results are dropped.
InstanceLabelMap paste_refined(const std::vector<BinaryMask>& refined, const std::vector<CropBox>& boxes, const InstanceLabelMap& base);

}  // namespace uois
