#pragma once

// Procedural tabletop scenes: analytic primitives resting on a rectangular
// table (top surface at z = 0) above an infinite floor, viewed by a pinhole
// camera and rendered with a per-pixel ray cast and z-buffer.
//
// World frame: z up, meters. Camera frame: x right, y down, z forward.

#include "uois/core.hpp"
#include "uois/geometry.hpp"
#include "uois/random.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace uois {

struct SceneConfig {
    std::uint64_t rng_seed = 0;
    std::array<int, 2> object_count_range{5, 25};
    std::array<double, 2> camera_height_range{0.5, 1.2};      // above the table
    std::array<double, 2> camera_distance_range{0.2, 0.8};    // horizontal, to the look-at point
    std::array<double, 2> camera_roll_range{-12.0, 12.0};     // degrees
    double target_spread = 0.15;                              // look-at point within +-spread of the table center
    double vertical_fov_deg = 45.0;
    int height = 480;
    int width = 640;

    std::array<double, 2> table_half_extent{0.6, 0.45};
    double floor_z = -0.75;
    double max_depth = 10.0;  // farther hits are dropped as invalid

    std::array<double, 2> box_half_size_range{0.03, 0.09};
    std::array<double, 2> sphere_radius_range{0.03, 0.07};
    std::array<double, 2> cylinder_radius_range{0.03, 0.06};
    std::array<double, 2> cylinder_height_range{0.06, 0.24};

    double max_footprint_overlap = 0.0;  // fraction of the smaller footprint disc
    double stack_probability = 0.0;      // chance an object is placed on a box top
    int placement_attempts = 200;
    int views_per_scene = 1;

    void validate() const;
    ImageGrid grid() const { return {height, width}; }
};

struct NoiseConfig {
    double gamma_shape = 1000.0;
    double gamma_scale = 0.001;
    int gp_grid_downsample = 8;
    double gp_sigma = 0.005;  // meters

    void validate() const;
};

enum class PrimitiveKind { Box, Sphere, Cylinder };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Box;
    Eigen::Vector3d base{0, 0, 0};  // center of the footprint on its support
    double yaw = 0.0;               // radians, boxes only
    // Box: half extents; sphere: (r, r, r); cylinder: (r, r, height / 2).
    Eigen::Vector3d half_size{0.05, 0.05, 0.05};

    double footprint_radius() const;
    double top() const { return base.z() + 2 * half_size.z(); }

    /// Smallest t > 0 with origin + t * dir on the surface.
    std::optional<double> intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;
};

struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // camera-to-world, columns = camera axes
    Eigen::Vector3d position{0, 0, 1};

    /// Optical axis through `target`, then rolled about it.
    static CameraPose look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target, double roll_deg = 0.0);
};

struct Scene {
    std::vector<Primitive> objects;
    std::array<double, 2> table_half_extent{0.6, 0.45};
    double floor_z = -0.75;
    double max_depth = 10.0;
};

struct RenderedView {
    Raster<double> depth;  // meters along the optical axis, 0 where invalid
    BinaryMask valid;
    InstanceLabelMap instances;
    RgbImage rgb;
    PinholeCamera<double> camera;
    CameraPose pose;

    SemanticLabels semantic() const { return instances.semantic(); }
};

/// Nearest surface along one world ray: (t, label) with label 0 floor,
/// 1 table, 2 + k for object k; nullopt when nothing is hit.
std::optional<std::pair<double, int>> cast_ray(const Scene& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir);

/// Object k carries provisional id 2 + k; ids are compacted over visible objects.
RenderedView render(const Scene& scene, const PinholeCamera<double>& camera, const CameraPose& pose);

/// nullopt when some object exhausts `placement_attempts`.
std::optional<Scene> sample_layout(const SceneConfig& cfg, Rng& rng);
CameraPose sample_camera(const SceneConfig& cfg, Rng& rng);

/// Area of the intersection of two footprint discs over the smaller disc's area.
double footprint_overlap(const Primitive& a, const Primitive& b);

/// Layout then `views_per_scene` cameras, all drawn from `rng`. A layout that
/// exhausts the retry budget restarts on a fresh substream; throws after 1000
/// such restarts.
std::vector<RenderedView> generate_views(const SceneConfig& cfg, Rng& rng);

/// First view of generate_views.
RenderedView generate_scene(const SceneConfig& cfg, Rng& rng);

/// Generator for scene `index` of a dataset built from `cfg.rng_seed`.
inline Rng scene_rng(const SceneConfig& cfg, std::uint64_t index) { return Rng(cfg.rng_seed, index); }

/// Whole points scaled by one gamma draw, then bilinearly upsampled Gaussian
/// grid noise (per XYZ channel) added at valid pixels.
OrganizedPointCloud<double> apply_depth_noise(const OrganizedPointCloud<double>& cloud, const NoiseConfig& ncfg, Rng& rng);

}  // namespace uois
