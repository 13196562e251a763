#pragma once

// Mask perturbations that turn ground-truth masks into plausible initial
// masks, and the crop/resize that prepares refiner inputs.
//
// Each perturbation is split into sample_*() drawing its parameters and
// apply_*() executing them, so a draw can be inspected and replayed.

#include "uois/core.hpp"
#include "uois/random.hpp"

#include <array>
#include <optional>
#include <vector>

namespace uois {

struct AugmentConfig {
    std::uint64_t rng_seed = 0;
    std::array<double, 2> translate_frac_range{0.0, 0.1};  // of sqrt(area)
    std::array<double, 2> rotate_deg_range{-10.0, 10.0};
    std::array<double, 2> addcut_radius_beta{1.4, 3.0};
    double addcut_radius_scale = 0.4;  // beta draw * scale * sqrt(area)
    std::array<int, 2> morph_iters_range{1, 3};
    std::array<double, 2> morph_kernel_beta{2.0, 5.0};
    double morph_kernel_scale = 0.2;
    double ellipse_count_lambda = 2.0;
    double ellipse_radius_gamma_shape = 2.0;
    double ellipse_radius_gamma_scale = 0.08;  // of sqrt(area)

    // translate/rotate, add/cut, morph, ellipses
    std::array<double, 4> apply_probs{0.5, 0.5, 0.5, 0.5};

    void validate() const;
};

struct RigidPlan {
    double angle_deg = 0.0;
    double drow = 0.0;
    double dcol = 0.0;
};

RigidPlan sample_rigid(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng);

/// Rotation about the mask centroid, then translation; nearest-neighbour
/// inverse mapping, clipped to the grid.
BinaryMask apply_rigid(const BinaryMask& mask, const RigidPlan& plan);

inline BinaryMask translate_rotate(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    return apply_rigid(mask, sample_rigid(mask, cfg, rng));
}

struct AddCutPlan {
    bool add = false;
    Pixel anchor;  // boundary pixel
    double radius = 0.0;
};

AddCutPlan sample_add_cut(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng);

/// Region = mask pixels strictly within `radius` of the anchor. Cut removes
/// it; add unions in its point reflection through the anchor.
BinaryMask apply_add_cut(const BinaryMask& mask, const AddCutPlan& plan);

inline BinaryMask add_cut(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    return apply_add_cut(mask, sample_add_cut(mask, cfg, rng));
}

struct MorphStep {
    bool dilate = false;
    int radius = 1;  // square element
};

std::vector<MorphStep> sample_morph(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng);
BinaryMask apply_morph(const BinaryMask& mask, const std::vector<MorphStep>& steps);

inline BinaryMask morph_perturb(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    return apply_morph(mask, sample_morph(mask, cfg, rng));
}

struct EllipseEdit {
    bool add = false;
    double row = 0.0, col = 0.0;  // center
    double radius_a = 0.0;        // along the rotated row axis
    double radius_b = 0.0;
    double angle_deg = 0.0;
};

std::vector<EllipseEdit> sample_ellipses(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng);

/// Pixels whose center lies inside the (closed) ellipse.
BinaryMask rasterize_ellipse(const ImageGrid& grid, const EllipseEdit& e);
BinaryMask apply_ellipses(const BinaryMask& mask, const std::vector<EllipseEdit>& edits);

inline BinaryMask ellipse_perturb(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    return apply_ellipses(mask, sample_ellipses(mask, cfg, rng));
}

/// Applies each perturbation with its probability, in order. A step that
/// would empty the mask is discarded. Throws on an empty input.
BinaryMask augment_mask(const BinaryMask& gt_mask, const AugmentConfig& cfg, Rng& rng);

inline constexpr int kRefineSize = 224;
inline constexpr double kDefaultPadFrac = 0.25;

/// Continuous source rectangle [row0, row1) x [col0, col1) in pixel-edge
/// coordinates, resampled to size x size.
struct CropBox {
    double row0 = 0, col0 = 0, row1 = 0, col1 = 0;
    int size = kRefineSize;

    double height() const { return row1 - row0; }
    double width() const { return col1 - col0; }

    // Source position (pixel-center coordinates) of crop pixel (i, j), and back.
    Eigen::Vector2d to_source(double i, double j) const
    {
        return {row0 + (i + 0.5) * height() / size - 0.5, col0 + (j + 0.5) * width() / size - 0.5};
    }
    Eigen::Vector2d to_crop(double r, double c) const
    {
        return {(r + 0.5 - row0) * size / height() - 0.5, (c + 0.5 - col0) * size / width() - 0.5};
    }
};

/// Bounding box of `mask` grown by pad_frac of its size on every side,
/// clipped to the grid.
CropBox crop_box(const BinaryMask& mask, double pad_frac, int size = kRefineSize);

RgbImage resample_rgb(const RgbImage& rgb, const CropBox& box);
BinaryMask resample_mask(const BinaryMask& mask, const CropBox& box);

/// Writes a crop-space mask back onto a grid through the inverse map.
BinaryMask paste_back(const BinaryMask& crop, const CropBox& box, const ImageGrid& grid);

struct RefinePair {
    RgbImage rgb_crop;
    BinaryMask mask_crop;
    std::optional<BinaryMask> gt_crop;
    CropBox crop_box;
};

RefinePair make_refine_pair(const RgbImage& rgb, const std::optional<BinaryMask>& gt_mask, const BinaryMask& perturbed_mask,
                            double pad_frac = kDefaultPadFrac, int size = kRefineSize);

}  // namespace uois
