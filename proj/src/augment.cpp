#include "uois/augment.hpp"

#include "uois/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uois {

namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw Error(std::string("augment config: ") + what);
}

void require_nonempty(const BinaryMask& mask, const char* op)
{
    if (!mask.any())
        throw Error(std::string(op) + ": empty mask");
}

double sqrt_area(const BinaryMask& mask) { return std::sqrt(double(mask.count())); }

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void AugmentConfig::validate() const
{
    require(translate_frac_range[0] >= 0 && translate_frac_range[0] <= translate_frac_range[1], "translate_frac_range must be 0 <= lo <= hi");
    require(rotate_deg_range[0] >= -180 && rotate_deg_range[1] <= 180 && rotate_deg_range[0] <= rotate_deg_range[1],
            "rotate_deg_range must lie in [-180, 180] with lo <= hi");
    require(addcut_radius_beta[0] > 0 && addcut_radius_beta[1] > 0, "addcut_radius_beta parameters must be positive");
    require(addcut_radius_scale >= 0, "addcut_radius_scale must be nonnegative");
    require(morph_iters_range[0] >= 0 && morph_iters_range[0] <= morph_iters_range[1], "morph_iters_range must be 0 <= lo <= hi");
    require(morph_kernel_beta[0] > 0 && morph_kernel_beta[1] > 0, "morph_kernel_beta parameters must be positive");
    require(morph_kernel_scale >= 0, "morph_kernel_scale must be nonnegative");
    require(ellipse_count_lambda >= 0, "ellipse_count_lambda must be nonnegative");
    require(ellipse_radius_gamma_shape > 0 && ellipse_radius_gamma_scale > 0, "ellipse_radius_gamma parameters must be positive");
    for (double p : apply_probs)
        require(p >= 0 && p <= 1, "apply_probs must lie in [0, 1]");
}

RigidPlan sample_rigid(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    require_nonempty(mask, "translate_rotate");
    RigidPlan plan;
    plan.angle_deg = rng.uniform(cfg.rotate_deg_range[0], cfg.rotate_deg_range[1]);
    const double magnitude = rng.uniform(cfg.translate_frac_range[0], cfg.translate_frac_range[1]) * sqrt_area(mask);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    plan.drow = magnitude * std::sin(heading);
    plan.dcol = magnitude * std::cos(heading);
    return plan;
}

BinaryMask apply_rigid(const BinaryMask& mask, const RigidPlan& plan)
{
    require_nonempty(mask, "translate_rotate");
    const Eigen::Vector2d center = mask_centroid(mask);
    const double a = deg2rad(plan.angle_deg);
    const double cs = std::cos(a);
    const double sn = std::sin(a);
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    BinaryMask out = BinaryMask::Zero(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            // Inverse map: undo the translation, then rotate by -angle about the centroid.
            const double y = r - plan.drow - center.x();
            const double x = c - plan.dcol - center.y();
            const int sr = round_half_up(cs * y + sn * x + center.x());
            const int sc = round_half_up(-sn * y + cs * x + center.y());
            out(r, c) = sr >= 0 && sr < h && sc >= 0 && sc < w && mask(sr, sc);
        }
    }
    return out;
}

AddCutPlan sample_add_cut(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    require_nonempty(mask, "add_cut");
    AddCutPlan plan;
    plan.add = rng.bernoulli(0.5);
    const BinaryMask boundary = inner_boundary(mask);
    auto pick = rng.uniform_int(0, boundary.count() - 1);
    for (Eigen::Index i = 0; i < boundary.size(); ++i) {
        if (boundary.data()[i] && pick-- == 0) {
            plan.anchor = {int(i / boundary.cols()), int(i % boundary.cols())};
            break;
        }
    }
    plan.radius = rng.beta(cfg.addcut_radius_beta[0], cfg.addcut_radius_beta[1]) * cfg.addcut_radius_scale * sqrt_area(mask);
    return plan;
}

BinaryMask apply_add_cut(const BinaryMask& mask, const AddCutPlan& plan)
{
    require_nonempty(mask, "add_cut");
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    BinaryMask out = mask;
    const int reach = static_cast<int>(std::ceil(plan.radius));
    const double r2 = plan.radius * plan.radius;
    for (int r = std::max(0, plan.anchor.row - reach); r <= std::min(h - 1, plan.anchor.row + reach); ++r) {
        for (int c = std::max(0, plan.anchor.col - reach); c <= std::min(w - 1, plan.anchor.col + reach); ++c) {
            const double dr = r - plan.anchor.row;
            const double dc = c - plan.anchor.col;
            if (!mask(r, c) || dr * dr + dc * dc >= r2)
                continue;
            if (!plan.add) {
                out(r, c) = false;
                continue;
            }
            const int rr = 2 * plan.anchor.row - r;
            const int cc = 2 * plan.anchor.col - c;
            if (rr >= 0 && rr < h && cc >= 0 && cc < w)
                out(rr, cc) = true;
        }
    }
    return out;
}

std::vector<MorphStep> sample_morph(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    require_nonempty(mask, "morph_perturb");
    const auto n = rng.uniform_int(cfg.morph_iters_range[0], cfg.morph_iters_range[1]);
    const double draw = rng.beta(cfg.morph_kernel_beta[0], cfg.morph_kernel_beta[1]);
    const int radius = std::max(1, round_half_up(draw * cfg.morph_kernel_scale * sqrt_area(mask)));
    std::vector<MorphStep> steps(static_cast<std::size_t>(n));
    for (auto& s : steps) {
        s.dilate = rng.bernoulli(0.5);
        s.radius = radius;
    }
    return steps;
}

BinaryMask apply_morph(const BinaryMask& mask, const std::vector<MorphStep>& steps)
{
    BinaryMask out = mask;
    for (const auto& s : steps) {
        const auto se = StructuringElement::square(s.radius);
        out = s.dilate ? dilate(out, se) : erode(out, se);
    }
    return out;
}

std::vector<EllipseEdit> sample_ellipses(const BinaryMask& mask, const AugmentConfig& cfg, Rng& rng)
{
    require_nonempty(mask, "ellipse_perturb");
    const auto k = rng.poisson(cfg.ellipse_count_lambda);
    const BoundingBox box = bounding_box(mask);
    const double pad_r = 0.1 * box.height();
    const double pad_c = 0.1 * box.width();
    const double scale = cfg.ellipse_radius_gamma_scale * sqrt_area(mask);
    std::vector<EllipseEdit> edits(static_cast<std::size_t>(k));
    for (auto& e : edits) {
        e.row = rng.uniform(box.row0 - pad_r, box.row1 + pad_r);
        e.col = rng.uniform(box.col0 - pad_c, box.col1 + pad_c);
        e.radius_a = rng.gamma(cfg.ellipse_radius_gamma_shape, scale);
        e.radius_b = rng.gamma(cfg.ellipse_radius_gamma_shape, scale);
        e.angle_deg = rng.uniform(0.0, 180.0);
        e.add = rng.bernoulli(0.5);
    }
    return edits;
}

BinaryMask rasterize_ellipse(const ImageGrid& grid, const EllipseEdit& e)
{
    BinaryMask out = BinaryMask::Zero(grid.height(), grid.width());
    if (!(e.radius_a > 0) || !(e.radius_b > 0))
        return out;
    const double a = deg2rad(e.angle_deg);
    const double cs = std::cos(a);
    const double sn = std::sin(a);
    const double reach = std::max(e.radius_a, e.radius_b);
    const int r0 = std::max(0, static_cast<int>(std::floor(e.row - reach)));
    const int r1 = std::min(grid.height() - 1, static_cast<int>(std::ceil(e.row + reach)));
    const int c0 = std::max(0, static_cast<int>(std::floor(e.col - reach)));
    const int c1 = std::min(grid.width() - 1, static_cast<int>(std::ceil(e.col + reach)));
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dr = r - e.row;
            const double dc = c - e.col;
            const double u = (cs * dr + sn * dc) / e.radius_a;
            const double v = (-sn * dr + cs * dc) / e.radius_b;
            out(r, c) = u * u + v * v <= 1.0;
        }
    }
    return out;
}

BinaryMask apply_ellipses(const BinaryMask& mask, const std::vector<EllipseEdit>& edits)
{
    const ImageGrid grid = ImageGrid::of(mask);
    BinaryMask out = mask;
    for (const auto& e : edits) {
        const BinaryMask shape = rasterize_ellipse(grid, e);
        out = e.add ? BinaryMask(out || shape) : BinaryMask(out && !shape);
    }
    return out;
}

BinaryMask augment_mask(const BinaryMask& gt_mask, const AugmentConfig& cfg, Rng& rng)
{
    require_nonempty(gt_mask, "augment_mask");
    using Step = BinaryMask (*)(const BinaryMask&, const AugmentConfig&, Rng&);
    const std::array<Step, 4> steps{translate_rotate, add_cut, morph_perturb, ellipse_perturb};
    BinaryMask current = gt_mask;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (!rng.bernoulli(cfg.apply_probs[k]))
            continue;
        BinaryMask next = steps[k](current, cfg, rng);
        if (next.any())
            current = std::move(next);
    }
    return current;
}

CropBox crop_box(const BinaryMask& mask, double pad_frac, int size)
{
    if (!mask.any())
        throw Error("crop box: empty mask");
    if (!(pad_frac >= 0))
        throw Error("crop box: pad_frac must be nonnegative");
    if (size < 1)
        throw Error("crop box: size must be positive");
    const BoundingBox b = bounding_box(mask);
    CropBox box;
    box.size = size;
    box.row0 = std::max(0.0, b.row0 - pad_frac * b.height());
    box.col0 = std::max(0.0, b.col0 - pad_frac * b.width());
    box.row1 = std::min(double(mask.rows()), b.row1 + 1 + pad_frac * b.height());
    box.col1 = std::min(double(mask.cols()), b.col1 + 1 + pad_frac * b.width());
    return box;
}

RgbImage resample_rgb(const RgbImage& rgb, const CropBox& box)
{
    const int h = rgb.grid().height();
    const int w = rgb.grid().width();
    RgbImage out(ImageGrid(box.size, box.size));
    for (int i = 0; i < box.size; ++i) {
        for (int j = 0; j < box.size; ++j) {
            const Eigen::Vector2d s = box.to_source(i, j);
            const double y = std::clamp(s.x(), 0.0, double(h - 1));
            const double x = std::clamp(s.y(), 0.0, double(w - 1));
            const int y0 = std::min(h - 1, static_cast<int>(std::floor(y)));
            const int x0 = std::min(w - 1, static_cast<int>(std::floor(x)));
            const int y1 = std::min(h - 1, y0 + 1);
            const int x1 = std::min(w - 1, x0 + 1);
            const double fy = y - y0;
            const double fx = x - x0;
            for (std::size_t k = 0; k < 3; ++k) {
                const auto& ch = rgb.channels[k];
                const double v = (1 - fy) * ((1 - fx) * ch(y0, x0) + fx * ch(y0, x1)) + fy * ((1 - fx) * ch(y1, x0) + fx * ch(y1, x1));
                out.channels[k](i, j) = static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0, 255));
            }
        }
    }
    return out;
}

BinaryMask resample_mask(const BinaryMask& mask, const CropBox& box)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    BinaryMask out(box.size, box.size);
    for (int i = 0; i < box.size; ++i) {
        for (int j = 0; j < box.size; ++j) {
            const Eigen::Vector2d s = box.to_source(i, j);
            out(i, j) = mask(std::clamp(round_half_up(s.x()), 0, h - 1), std::clamp(round_half_up(s.y()), 0, w - 1));
        }
    }
    return out;
}

BinaryMask paste_back(const BinaryMask& crop, const CropBox& box, const ImageGrid& grid)
{
    if (crop.rows() != box.size || crop.cols() != box.size)
        throw Error("paste back: crop is not " + std::to_string(box.size) + "x" + std::to_string(box.size));
    BinaryMask out = BinaryMask::Zero(grid.height(), grid.width());
    for (int r = 0; r < grid.height(); ++r) {
        if (r + 0.5 < box.row0 || r + 0.5 >= box.row1)
            continue;
        for (int c = 0; c < grid.width(); ++c) {
            if (c + 0.5 < box.col0 || c + 0.5 >= box.col1)
                continue;
            const Eigen::Vector2d q = box.to_crop(r, c);
            out(r, c) = crop(std::clamp(round_half_up(q.x()), 0, box.size - 1), std::clamp(round_half_up(q.y()), 0, box.size - 1));
        }
    }
    return out;
}

RefinePair make_refine_pair(const RgbImage& rgb, const std::optional<BinaryMask>& gt_mask, const BinaryMask& perturbed_mask, double pad_frac,
                            int size)
{
    require_same_grid(rgb.grid(), ImageGrid::of(perturbed_mask), "refine pair");
    if (gt_mask)
        require_same_grid(ImageGrid::of(*gt_mask), ImageGrid::of(perturbed_mask), "refine pair");
    RefinePair pair;
    pair.crop_box = crop_box(perturbed_mask, pad_frac, size);
    pair.rgb_crop = resample_rgb(rgb, pair.crop_box);
    pair.mask_crop = resample_mask(perturbed_mask, pair.crop_box);
    if (gt_mask)
        pair.gt_crop = resample_mask(*gt_mask, pair.crop_box);
    return pair;
}

}  // namespace uois
