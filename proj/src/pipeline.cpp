#include "uois/pipeline.hpp"

#include "uois/geometry.hpp"
#include "uois/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace uois {

OraclePredictor::OraclePredictor(InstanceLabelMap gt, double direction_noise_deg, double label_flip_prob, std::uint64_t seed)
    : gt_(std::move(gt)), noise_deg_(direction_noise_deg), flip_prob_(label_flip_prob), seed_(seed)
{
    if (!(noise_deg_ >= 0.0))
        throw Error("oracle predictor: direction noise must be nonnegative");
    if (!(flip_prob_ >= 0.0 && flip_prob_ <= 1.0))
        throw Error("oracle predictor: label flip probability must be in [0, 1]");
}

DensePrediction OraclePredictor::predict(const OrganizedPointCloud<double>& cloud) const
{
    const ImageGrid& grid = gt_.grid();
    require_same_grid(cloud.grid(), grid, "oracle predictor");

    Raster<std::uint8_t> labels = gt_.semantic().labels();
    DirectionField<double> gt_dirs = gt_direction_field(gt_);
    Raster<double> drow = gt_dirs.drow();
    Raster<double> dcol = gt_dirs.dcol();

    Rng rng(seed_);
    if (flip_prob_ > 0.0) {
        for (Eigen::Index i = 0; i < labels.size(); ++i) {
            if (rng.bernoulli(flip_prob_)) {
                const auto other = rng.uniform_int(0, kNumSemanticClasses - 2);
                labels.data()[i] = std::uint8_t(other >= labels.data()[i] ? other + 1 : other);
            }
        }
    }
    if (noise_deg_ > 0.0) {
        for (Eigen::Index i = 0; i < drow.size(); ++i) {
            const double a = rng.normal(0.0, noise_deg_) * std::numbers::pi / 180.0;
            const double r = drow.data()[i];
            const double c = dcol.data()[i];
            drow.data()[i] = std::cos(a) * r - std::sin(a) * c;
            dcol.data()[i] = std::sin(a) * r + std::cos(a) * c;
        }
    }
    return {SemanticProbs<double>::one_hot(SemanticLabels(std::move(labels))), DirectionField<double>(std::move(drow), std::move(dcol))};
}

void check_prediction(const DensePrediction& prediction, const ImageGrid& grid)
{
    if (!(prediction.semantic.grid() == grid))
        throw Error("predictor contract: semantic probabilities do not match the input grid");
    if (!(prediction.directions.grid() == grid))
        throw Error("predictor contract: direction field does not match the input grid");
    if (prediction.semantic.classes() != kNumSemanticClasses)
        throw Error("predictor contract: expected " + std::to_string(kNumSemanticClasses) + " semantic classes, got " +
                    std::to_string(prediction.semantic.classes()));
}

Segmentation segment_prediction(const DensePrediction& prediction, const BinaryMask& valid_depth, const SegmentParams& params)
{
    const ImageGrid grid = ImageGrid::of(valid_depth);
    check_prediction(prediction, grid);

    Raster<std::uint8_t> labels = prediction.semantic.argmax().labels();
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        if (!valid_depth.data()[i] && labels.data()[i] == std::uint8_t(SemanticClass::Object))
            labels.data()[i] = std::uint8_t(SemanticClass::Background);

    VotingResult voted = hough_vote_detailed(SemanticLabels(labels), prediction.directions, params.voting, params.method);
    if (!params.use_imp)
        return {voted.instances, voted.instances};

    // Keep non-object classes, then lay cleaned masks on top. A pixel stays
    // with its voted instance if that mask still covers it; other contested
    // pixels go to the nearest center.
    const auto& voted_labels = voted.instances.labels();
    Raster<std::int32_t> out = voted_labels.min(kTableLabel);
    Raster<double> claim_dist = Raster<double>::Constant(grid.height(), grid.width(), std::numeric_limits<double>::infinity());
    for (const auto& [id, mask] : instance_masks(voted.instances)) {
        const Pixel center = voted.centers[std::size_t(id - kFirstInstanceId)];
        const Eigen::Vector2d cv(center.row, center.col);
        const BinaryMask cleaned = imp_process(mask, cv, params.imp);
        for (int r = 0; r < grid.height(); ++r) {
            for (int c = 0; c < grid.width(); ++c) {
                if (!cleaned(r, c) || !valid_depth(r, c))
                    continue;
                const double d = voted_labels(r, c) == id ? -1.0 : (Eigen::Vector2d(r, c) - cv).squaredNorm();
                if (d < claim_dist(r, c)) {
                    claim_dist(r, c) = d;
                    out(r, c) = id;
                }
            }
        }
    }
    return {InstanceLabelMap::compacted(std::move(out)), voted.instances};
}

Segmentation segment(const OrganizedPointCloud<double>& cloud, const DensePredictor& predictor, const SegmentParams& params)
{
    return segment_prediction(predictor.predict(cloud), cloud.valid(), params);
}

std::vector<RefinePair> refine_pairs(const InstanceLabelMap& masks, const RgbImage& rgb, double pad_frac)
{
    require_same_grid(rgb.grid(), masks.grid(), "refine seam");
    std::vector<RefinePair> pairs;
    for (const auto& [id, mask] : instance_masks(masks))
        pairs.push_back(make_refine_pair(rgb, std::nullopt, mask, pad_frac));
    return pairs;
}

InstanceLabelMap paste_refined(const std::vector<BinaryMask>& refined, const std::vector<CropBox>& boxes, const InstanceLabelMap& base)
{
    const ImageGrid& grid = base.grid();
    if (refined.size() != boxes.size())
        throw Error("paste back: " + std::to_string(refined.size()) + " masks for " + std::to_string(boxes.size()) + " crops");
    Raster<std::int32_t> out = base.labels().min(kTableLabel);
    for (std::size_t k = 0; k < refined.size(); ++k) {
        const BinaryMask pasted = paste_back(refined[k], boxes[k], grid);
        out = pasted.select(std::int32_t(kFirstInstanceId + k), out);
    }
    return InstanceLabelMap::compacted(std::move(out));
}

}  // namespace uois
