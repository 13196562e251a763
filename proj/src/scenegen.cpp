#include "uois/scenegen.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace uois {
namespace {

constexpr double kEps = 1e-9;
constexpr std::uint64_t kRetryStreamStride = std::uint64_t(1) << 40;
constexpr int kMaxLayoutRetries = 1000;

void require_range(const std::array<double, 2>& r, const char* name, double min_lo)
{
    if (!(r[0] <= r[1]) || !(r[0] >= min_lo) || !std::isfinite(r[1]))
        throw Error(std::string("scene config: bad ") + name + " range");
}

std::optional<double> smallest_positive(double a, double b)
{
    if (a > kEps)
        return a;
    if (b > kEps)
        return b;
    return std::nullopt;
}

void keep_nearest(std::optional<double>& best, std::optional<double> t)
{
    if (t && (!best || *t < *best))
        best = t;
}

std::array<std::uint8_t, 3> object_color(int k)
{
    // Golden-ratio hue walk, full saturation.
    const double h = std::fmod(0.13 + k * 0.6180339887498949, 1.0) * 6.0;
    const double v = k % 2 == 0 ? 230.0 : 170.0;
    const double x = v * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double rgb[3];
    switch (int(h)) {
    case 0: rgb[0] = v, rgb[1] = x, rgb[2] = 0; break;
    case 1: rgb[0] = x, rgb[1] = v, rgb[2] = 0; break;
    case 2: rgb[0] = 0, rgb[1] = v, rgb[2] = x; break;
    case 3: rgb[0] = 0, rgb[1] = x, rgb[2] = v; break;
    case 4: rgb[0] = x, rgb[1] = 0, rgb[2] = v; break;
    default: rgb[0] = v, rgb[1] = 0, rgb[2] = x; break;
    }
    return {std::uint8_t(std::lround(rgb[0])), std::uint8_t(std::lround(rgb[1])), std::uint8_t(std::lround(rgb[2]))};
}

constexpr std::array<std::uint8_t, 3> kFloorColor{90, 90, 90};
constexpr std::array<std::uint8_t, 3> kTableColor{150, 112, 72};

Primitive sample_shape(const SceneConfig& cfg, Rng& rng)
{
    Primitive p;
    switch (rng.uniform_int(0, 2)) {
    case 0: {
        p.kind = PrimitiveKind::Box;
        const auto& r = cfg.box_half_size_range;
        p.half_size = {rng.uniform(r[0], r[1]), rng.uniform(r[0], r[1]), rng.uniform(r[0], r[1])};
        p.yaw = rng.uniform(0.0, std::numbers::pi);
        break;
    }
    case 1: {
        p.kind = PrimitiveKind::Sphere;
        const double radius = rng.uniform(cfg.sphere_radius_range[0], cfg.sphere_radius_range[1]);
        p.half_size = Eigen::Vector3d::Constant(radius);
        break;
    }
    default: {
        p.kind = PrimitiveKind::Cylinder;
        const double radius = rng.uniform(cfg.cylinder_radius_range[0], cfg.cylinder_radius_range[1]);
        const double height = rng.uniform(cfg.cylinder_height_range[0], cfg.cylinder_height_range[1]);
        p.half_size = {radius, radius, height / 2};
        break;
    }
    }
    return p;
}

}  // namespace

void SceneConfig::validate() const
{
    if (object_count_range[0] < 0 || object_count_range[0] > object_count_range[1])
        throw Error("scene config: bad object_count range");
    require_range(camera_height_range, "camera_height", 1e-6);
    require_range(camera_distance_range, "camera_distance", 0.0);
    require_range(camera_roll_range, "camera_roll", -180.0);
    if (camera_roll_range[1] > 180.0)
        throw Error("scene config: bad camera_roll range");
    require_range(box_half_size_range, "box_half_size", 1e-6);
    require_range(sphere_radius_range, "sphere_radius", 1e-6);
    require_range(cylinder_radius_range, "cylinder_radius", 1e-6);
    require_range(cylinder_height_range, "cylinder_height", 1e-6);
    if (height < 1 || width < 1)
        throw Error("scene config: resolution must be positive");
    if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0))
        throw Error("scene config: vertical_fov must be in (0, 180)");
    if (!(table_half_extent[0] > 0.0 && table_half_extent[1] > 0.0))
        throw Error("scene config: table extent must be positive");
    if (!(floor_z < 0.0))
        throw Error("scene config: floor must lie below the table");
    if (!(max_depth > 0.0))
        throw Error("scene config: max_depth must be positive");
    if (!(target_spread >= 0.0))
        throw Error("scene config: target_spread must be nonnegative");
    if (!(max_footprint_overlap >= 0.0 && max_footprint_overlap <= 0.5))
        throw Error("scene config: max_footprint_overlap must be in [0, 0.5]");
    if (!(stack_probability >= 0.0 && stack_probability <= 1.0))
        throw Error("scene config: stack_probability must be in [0, 1]");
    if (placement_attempts < 1)
        throw Error("scene config: placement_attempts must be at least 1");
    if (views_per_scene < 1)
        throw Error("scene config: views_per_scene must be at least 1");
}

void NoiseConfig::validate() const
{
    if (!(gamma_shape > 0.0 && gamma_scale > 0.0))
        throw Error("noise config: gamma parameters must be positive");
    const double mean = gamma_shape * gamma_scale;
    if (!(mean >= 0.95 && mean <= 1.05))
        throw Error("noise config: gamma_shape * gamma_scale must be in [0.95, 1.05]");
    if (gp_grid_downsample < 1)
        throw Error("noise config: gp_grid_downsample must be at least 1");
    if (!(gp_sigma >= 0.0))
        throw Error("noise config: gp_sigma must be nonnegative");
}

double Primitive::footprint_radius() const
{
    return kind == PrimitiveKind::Box ? std::hypot(half_size.x(), half_size.y()) : half_size.x();
}

std::optional<double> Primitive::intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const
{
    switch (kind) {
    case PrimitiveKind::Sphere: {
        const double r = half_size.x();
        const Eigen::Vector3d oc = origin - (base + Eigen::Vector3d(0, 0, r));
        const double a = dir.squaredNorm();
        const double b = oc.dot(dir);
        const double c = oc.squaredNorm() - r * r;
        const double disc = b * b - a * c;
        if (disc < 0.0)
            return std::nullopt;
        const double s = std::sqrt(disc);
        return smallest_positive((-b - s) / a, (-b + s) / a);
    }
    case PrimitiveKind::Box: {
        const Eigen::Vector3d center = base + Eigen::Vector3d(0, 0, half_size.z());
        const Eigen::Matrix3d to_local = Eigen::AngleAxisd(-yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        const Eigen::Vector3d o = to_local * (origin - center);
        const Eigen::Vector3d d = to_local * dir;
        double t0 = -std::numeric_limits<double>::infinity();
        double t1 = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
            if (std::abs(d[k]) < 1e-15) {
                if (std::abs(o[k]) > half_size[k])
                    return std::nullopt;
                continue;
            }
            double a = (-half_size[k] - o[k]) / d[k];
            double b = (half_size[k] - o[k]) / d[k];
            if (a > b)
                std::swap(a, b);
            t0 = std::max(t0, a);
            t1 = std::min(t1, b);
        }
        if (t0 > t1)
            return std::nullopt;
        return smallest_positive(t0, t1);
    }
    case PrimitiveKind::Cylinder: {
        const double r = half_size.x();
        const double z0 = base.z();
        const double z1 = top();
        std::optional<double> best;
        const Eigen::Vector2d o(origin.x() - base.x(), origin.y() - base.y());
        const Eigen::Vector2d d(dir.x(), dir.y());
        const double a = d.squaredNorm();
        if (a > 1e-30) {
            const double b = o.dot(d);
            const double c = o.squaredNorm() - r * r;
            const double disc = b * b - a * c;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                for (const double t : {(-b - s) / a, (-b + s) / a}) {
                    const double z = origin.z() + t * dir.z();
                    if (t > kEps && z >= z0 && z <= z1)
                        keep_nearest(best, t);
                }
            }
        }
        if (std::abs(dir.z()) > 1e-15) {
            for (const double zc : {z0, z1}) {
                const double t = (zc - origin.z()) / dir.z();
                if (t > kEps && (o + t * d).squaredNorm() <= r * r)
                    keep_nearest(best, t);
            }
        }
        return best;
    }
    }
    return std::nullopt;
}

CameraPose CameraPose::look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target, double roll_deg)
{
    const Eigen::Vector3d forward = (target - position).normalized();
    Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9)
        right = forward.cross(Eigen::Vector3d::UnitY());
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    CameraPose pose;
    pose.position = position;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    pose.rotation = Eigen::AngleAxisd(roll_deg * std::numbers::pi / 180.0, forward).toRotationMatrix() * pose.rotation;
    return pose;
}

double footprint_overlap(const Primitive& a, const Primitive& b)
{
    const double r1 = a.footprint_radius();
    const double r2 = b.footprint_radius();
    const double d = std::hypot(a.base.x() - b.base.x(), a.base.y() - b.base.y());
    const double small = std::min(r1, r2);
    if (d >= r1 + r2)
        return 0.0;
    if (d <= std::abs(r1 - r2))
        return 1.0;
    const double alpha = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0));
    const double beta = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0));
    const double lens = r1 * r1 * (alpha - std::sin(2 * alpha) / 2) + r2 * r2 * (beta - std::sin(2 * beta) / 2);
    return lens / (std::numbers::pi * small * small);
}

std::optional<std::pair<double, int>> cast_ray(const Scene& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir)
{
    std::optional<std::pair<double, int>> best;
    const auto offer = [&best](std::optional<double> t, int label) {
        if (t && (!best || *t < best->first))
            best = std::pair{*t, label};
    };

    for (std::size_t k = 0; k < scene.objects.size(); ++k)
        offer(scene.objects[k].intersect(origin, dir), kFirstInstanceId + int(k));

    if (std::abs(dir.z()) > 1e-15) {
        const double t = -origin.z() / dir.z();
        const Eigen::Vector3d p = origin + t * dir;
        if (t > kEps && std::abs(p.x()) <= scene.table_half_extent[0] && std::abs(p.y()) <= scene.table_half_extent[1])
            offer(t, kTableLabel);
        const double tf = (scene.floor_z - origin.z()) / dir.z();
        if (tf > kEps)
            offer(tf, kBackgroundLabel);
    }
    return best;
}

RenderedView render(const Scene& scene, const PinholeCamera<double>& camera, const CameraPose& pose)
{
    const ImageGrid& grid = camera.grid();
    Raster<double> depth = Raster<double>::Zero(grid.height(), grid.width());
    BinaryMask valid = BinaryMask::Zero(grid.height(), grid.width());
    Raster<std::int32_t> labels = Raster<std::int32_t>::Zero(grid.height(), grid.width());
    RgbImage rgb(grid);

    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            // Camera ray has z = 1, so the hit parameter is the depth.
            const Eigen::Vector3d dir = pose.rotation * camera.ray(r, c);
            const auto hit = cast_ray(scene, pose.position, dir);
            if (!hit || hit->first > scene.max_depth)
                continue;
            depth(r, c) = hit->first;
            valid(r, c) = true;
            labels(r, c) = hit->second;
            const auto color = hit->second == kBackgroundLabel ? kFloorColor
                               : hit->second == kTableLabel    ? kTableColor
                                                               : object_color(hit->second - kFirstInstanceId);
            for (int ch = 0; ch < 3; ++ch)
                rgb.channels[std::size_t(ch)](r, c) = color[std::size_t(ch)];
        }
    }
    return {std::move(depth), std::move(valid), InstanceLabelMap::compacted(std::move(labels)), std::move(rgb), camera, pose};
}

std::optional<Scene> sample_layout(const SceneConfig& cfg, Rng& rng)
{
    Scene scene;
    scene.table_half_extent = cfg.table_half_extent;
    scene.floor_z = cfg.floor_z;
    scene.max_depth = cfg.max_depth;

    const auto count = rng.uniform_int(cfg.object_count_range[0], cfg.object_count_range[1]);
    std::vector<bool> supports_something;
    for (std::int64_t i = 0; i < count; ++i) {
        Primitive p = sample_shape(cfg, rng);
        const double fr = p.footprint_radius();

        if (rng.bernoulli(cfg.stack_probability)) {
            std::vector<std::size_t> candidates;
            for (std::size_t k = 0; k < scene.objects.size(); ++k) {
                const Primitive& s = scene.objects[k];
                if (s.kind == PrimitiveKind::Box && !supports_something[k] && fr <= std::min(s.half_size.x(), s.half_size.y()))
                    candidates.push_back(k);
            }
            if (!candidates.empty()) {
                const std::size_t k = candidates[std::size_t(rng.uniform_int(0, std::int64_t(candidates.size()) - 1))];
                const Primitive& s = scene.objects[k];
                const Eigen::Vector2d local(rng.uniform(-(s.half_size.x() - fr), s.half_size.x() - fr),
                                            rng.uniform(-(s.half_size.y() - fr), s.half_size.y() - fr));
                const Eigen::Vector2d offset = Eigen::Rotation2Dd(s.yaw) * local;
                p.base = {s.base.x() + offset.x(), s.base.y() + offset.y(), s.top()};
                supports_something[k] = true;
                scene.objects.push_back(p);
                supports_something.push_back(false);
                continue;
            }
        }

        const double hx = cfg.table_half_extent[0] - fr;
        const double hy = cfg.table_half_extent[1] - fr;
        if (hx < 0.0 || hy < 0.0)
            return std::nullopt;
        bool placed = false;
        for (int attempt = 0; attempt < cfg.placement_attempts && !placed; ++attempt) {
            p.base = {rng.uniform(-hx, hx), rng.uniform(-hy, hy), 0.0};
            placed = std::all_of(scene.objects.begin(), scene.objects.end(), [&](const Primitive& q) {
                const double overlap = footprint_overlap(p, q);
                return cfg.max_footprint_overlap > 0.0 ? overlap <= cfg.max_footprint_overlap : overlap == 0.0;
            });
        }
        if (!placed)
            return std::nullopt;
        scene.objects.push_back(p);
        supports_something.push_back(false);
    }
    return scene;
}

CameraPose sample_camera(const SceneConfig& cfg, Rng& rng)
{
    const Eigen::Vector3d target(rng.uniform(-cfg.target_spread, cfg.target_spread), rng.uniform(-cfg.target_spread, cfg.target_spread), 0.0);
    const double height = rng.uniform(cfg.camera_height_range[0], cfg.camera_height_range[1]);
    const double distance = rng.uniform(cfg.camera_distance_range[0], cfg.camera_distance_range[1]);
    const double azimuth = rng.uniform(0.0, 2 * std::numbers::pi);
    const double roll = rng.uniform(cfg.camera_roll_range[0], cfg.camera_roll_range[1]);
    const Eigen::Vector3d position = target + Eigen::Vector3d(distance * std::cos(azimuth), distance * std::sin(azimuth), height);
    return CameraPose::look_at(position, target, roll);
}

std::vector<RenderedView> generate_views(const SceneConfig& cfg, Rng& rng)
{
    cfg.validate();
    std::optional<Scene> scene = sample_layout(cfg, rng);
    for (int retry = 0; !scene; ++retry) {
        if (retry == kMaxLayoutRetries)
            throw Error("scene generation: no layout fits after " + std::to_string(kMaxLayoutRetries) + " retries");
        rng = rng.substream(rng.stream() + kRetryStreamStride);
        scene = sample_layout(cfg, rng);
    }
    const auto camera = PinholeCamera<double>::from_vertical_fov(cfg.grid(), cfg.vertical_fov_deg);
    std::vector<RenderedView> views;
    for (int v = 0; v < cfg.views_per_scene; ++v)
        views.push_back(render(*scene, camera, sample_camera(cfg, rng)));
    return views;
}

RenderedView generate_scene(const SceneConfig& cfg, Rng& rng)
{
    SceneConfig one = cfg;
    one.views_per_scene = 1;
    return std::move(generate_views(one, rng).front());
}

OrganizedPointCloud<double> apply_depth_noise(const OrganizedPointCloud<double>& cloud, const NoiseConfig& ncfg, Rng& rng)
{
    ncfg.validate();
    const ImageGrid& grid = cloud.grid();
    const int ds = ncfg.gp_grid_downsample;
    const double g = rng.gamma(ncfg.gamma_shape, ncfg.gamma_scale);

    const int gh = (grid.height() - 1) / ds + 2;
    const int gw = (grid.width() - 1) / ds + 2;
    std::array<Eigen::MatrixXd, 3> coarse;
    for (auto& ch : coarse) {
        ch.resize(gh, gw);
        for (int i = 0; i < gh; ++i)
            for (int j = 0; j < gw; ++j)
                ch(i, j) = rng.normal(0.0, ncfg.gp_sigma);
    }

    auto xyz = cloud.xyz();
    for (int r = 0; r < grid.height(); ++r) {
        const int i = r / ds;
        const double fr = double(r - i * ds) / ds;
        for (int c = 0; c < grid.width(); ++c) {
            const Eigen::Index idx = grid.index(r, c);
            if (!cloud.valid()(r, c))
                continue;
            const int j = c / ds;
            const double fc = double(c - j * ds) / ds;
            xyz.row(idx) *= g;
            for (int k = 0; k < 3; ++k) {
                const auto& m = coarse[std::size_t(k)];
                xyz(idx, k) += (1 - fr) * ((1 - fc) * m(i, j) + fc * m(i, j + 1)) + fr * ((1 - fc) * m(i + 1, j) + fc * m(i + 1, j + 1));
            }
        }
    }
    return OrganizedPointCloud<double>(grid, std::move(xyz), cloud.valid());
}

}  // namespace uois
