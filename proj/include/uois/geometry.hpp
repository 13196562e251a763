#pragma once

#include "uois/core.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace uois {

/// Pinhole intrinsics. Pixel (row, col) has image coordinates (x = col,
/// y = row); camera axes are x right, y down, z forward.
template <typename Scalar>
class PinholeCamera {
public:
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    PinholeCamera(Scalar fx, Scalar fy, Scalar cx, Scalar cy, ImageGrid grid) : fx_(fx), fy_(fy), cx_(cx), cy_(cy), grid_(grid)
    {
        if (!(fx > Scalar(0)) || !(fy > Scalar(0)))
            throw Error("pinhole camera: focal lengths must be positive");
    }

    // Square pixels with the principal point at the grid center.
    static PinholeCamera from_vertical_fov(ImageGrid grid, Scalar fov_deg)
    {
        if (!(fov_deg > Scalar(0)) || !(fov_deg < Scalar(180)))
            throw Error("pinhole camera: vertical field of view must be in (0, 180) degrees");
        const Scalar half = fov_deg * std::numbers::pi_v<Scalar> / Scalar(360);
        const Scalar f = Scalar(grid.height()) / Scalar(2) / std::tan(half);
        return PinholeCamera(f, f, Scalar(grid.width()) / Scalar(2), Scalar(grid.height()) / Scalar(2), grid);
    }

    Scalar fx() const { return fx_; }
    Scalar fy() const { return fy_; }
    Scalar cx() const { return cx_; }
    Scalar cy() const { return cy_; }
    const ImageGrid& grid() const { return grid_; }

    // Camera-frame ray through a pixel, scaled so its z component is 1.
    Vec3 ray(Scalar row, Scalar col) const { return {(col - cx_) / fx_, (row - cy_) / fy_, Scalar(1)}; }

    Vec3 unproject(Scalar row, Scalar col, Scalar depth) const { return ray(row, col) * depth; }

    // Returns (row, col, depth).
    Vec3 project(const Vec3& p) const { return {fy_ * p.y() / p.z() + cy_, fx_ * p.x() / p.z() + cx_, p.z()}; }

private:
    Scalar fx_, fy_, cx_, cy_;
    ImageGrid grid_;
};

/// Depth (meters along the optical axis) to an organized point cloud.
template <typename Scalar>
OrganizedPointCloud<Scalar> backproject(const Raster<Scalar>& depth, const BinaryMask& valid, const PinholeCamera<Scalar>& cam)
{
    const ImageGrid grid = ImageGrid::of(depth);
    require_same_grid(grid, cam.grid(), "backproject");
    require_same_grid(grid, ImageGrid::of(valid), "backproject validity");

    typename OrganizedPointCloud<Scalar>::Points xyz = OrganizedPointCloud<Scalar>::Points::Zero(grid.size(), 3);
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            if (valid(r, c))
                xyz.row(grid.index(r, c)) = cam.unproject(Scalar(r), Scalar(c), depth(r, c)).transpose();
        }
    }
    return OrganizedPointCloud<Scalar>(grid, std::move(xyz), valid);
}

/// Depth with validity derived from positivity (z <= 0 or non-finite is missing).
template <typename Scalar>
OrganizedPointCloud<Scalar> backproject(const Raster<Scalar>& depth, const PinholeCamera<Scalar>& cam)
{
    const BinaryMask valid = depth.isFinite() && depth > Scalar(0);
    return backproject(Raster<Scalar>(valid.select(depth, Scalar(0))), valid, cam);
}

/// Ground-truth center directions: each object pixel points at its
/// instance's mean pixel location; everything else (and a pixel sitting
/// exactly on its centroid) carries kFixedDirection.
DirectionField<double> gt_direction_field(const InstanceLabelMap& instances);

}  // namespace uois
