#include "uois/geometry.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace uois {
namespace {

using testing::Rng;

TEST(PinholeCamera, PrincipalPointBackprojectsOnAxis)
{
    const auto cam = PinholeCamera<double>::from_vertical_fov(ImageGrid(480, 640), 45.0);
    Raster<double> depth = Raster<double>::Zero(480, 640);
    depth(240, 320) = 1.0;
    const auto cloud = backproject(depth, cam);
    const Eigen::Vector3d p = cloud.xyz().row(ImageGrid(480, 640).index(240, 320)).transpose();
    EXPECT_NEAR(p.x(), 0.0, 1e-15);
    EXPECT_NEAR(p.y(), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.z(), 1.0);
    EXPECT_EQ(cloud.valid().count(), 1);
}

TEST(PinholeCamera, FortyFiveDegreeFovFocalLength)
{
    const auto cam = PinholeCamera<double>::from_vertical_fov(ImageGrid(480, 640), 45.0);
    // fy = 240 / tan(22.5 deg) = 240 / (sqrt(2) - 1)
    EXPECT_NEAR(cam.fy(), 240.0 / (std::sqrt(2.0) - 1.0), 1e-9);
    EXPECT_NEAR(cam.fy(), 579.41, 5e-3);
    const Eigen::Vector3d top = cam.unproject(0.0, cam.cx(), 1.0);
    EXPECT_NEAR(top.y(), -(std::sqrt(2.0) - 1.0), 1e-12);
    EXPECT_NEAR(top.y(), -0.4142, 1e-4);
}

TEST(PinholeCamera, RejectsBadIntrinsics)
{
    EXPECT_THROW(PinholeCamera<double>(0.0, 1.0, 0, 0, ImageGrid(2, 2)), Error);
    EXPECT_THROW(PinholeCamera<double>::from_vertical_fov(ImageGrid(2, 2), 180.0), Error);
}

TEST(Backproject, ReprojectionRoundTrip)
{
    Rng rng(11);
    const ImageGrid grid(37, 53);
    const PinholeCamera<double> cam(61.5, 58.25, 26.3, 18.1, grid);
    Raster<double> depth(grid.height(), grid.width());
    for (Eigen::Index i = 0; i < depth.size(); ++i)
        depth.data()[i] = testing::uniform_int(rng, 0, 9) == 0 ? 0.0 : testing::uniform_real(rng, 0.2, 5.0);
    const auto cloud = backproject(depth, cam);
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c) {
            const Eigen::Vector3d p = cloud.xyz().row(grid.index(r, c)).transpose();
            if (depth(r, c) == 0.0) {
                EXPECT_FALSE(cloud.valid()(r, c));
                EXPECT_TRUE(p.isZero(0));
                continue;
            }
            const Eigen::Vector3d back = cam.project(p);
            EXPECT_NEAR(back.x(), r, 1e-9);
            EXPECT_NEAR(back.y(), c, 1e-9);
            EXPECT_NEAR(back.z(), depth(r, c), 1e-9);
        }
}

TEST(Backproject, LinearInDepth)
{
    Rng rng(12);
    const ImageGrid grid(9, 14);
    const auto cam = PinholeCamera<double>::from_vertical_fov(grid, 60.0);
    Raster<double> depth(grid.height(), grid.width());
    for (Eigen::Index i = 0; i < depth.size(); ++i)
        depth.data()[i] = testing::uniform_real(rng, 0.1, 3.0);
    const double s = 2.75;
    const auto a = backproject(depth, cam);
    const auto b = backproject(Raster<double>(depth * s), cam);
    EXPECT_TRUE(b.xyz().isApprox(a.xyz() * s, 1e-14));
}

TEST(Backproject, GridMismatchThrows)
{
    const auto cam = PinholeCamera<double>::from_vertical_fov(ImageGrid(4, 4), 45.0);
    EXPECT_THROW(backproject(Raster<double>(Raster<double>::Ones(4, 5)), cam), Error);
}

TEST(GtDirectionField, ThreeFourFive)
{
    // Instance whose centroid is (3, 4): pixels (0,0) and (6,8).
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(10, 10);
    l(0, 0) = 2;
    l(6, 8) = 2;
    const auto dirs = gt_direction_field(InstanceLabelMap(l));
    EXPECT_NEAR(dirs.drow()(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(dirs.dcol()(0, 0), 0.8, 1e-15);
    EXPECT_NEAR(dirs.drow()(6, 8), -0.6, 1e-15);
    EXPECT_NEAR(dirs.dcol()(6, 8), -0.8, 1e-15);
}

TEST(GtDirectionField, BackgroundOnlyIsFixedDirection)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(5, 7);
    l.row(3).setConstant(kTableLabel);
    const auto dirs = gt_direction_field(InstanceLabelMap(l));
    EXPECT_TRUE((dirs.drow() == kFixedDirection.x()).all());
    EXPECT_TRUE((dirs.dcol() == kFixedDirection.y()).all());
}

TEST(GtDirectionField, CentroidPixelGetsFixedDirection)
{
    Raster<std::int32_t> l = Raster<std::int32_t>::Zero(5, 5);
    l.block(1, 1, 3, 3).setConstant(2);
    const auto dirs = gt_direction_field(InstanceLabelMap(l));
    EXPECT_EQ(dirs(2, 2), kFixedDirection);
}

TEST(GtDirectionField, VectorsReconstructCentroids)
{
    Rng rng(21);
    const auto map = testing::random_scene(rng, 48, 64, 3, 4.0, 14.0);
    const auto dirs = gt_direction_field(map);
    for (const auto& [id, mask] : instance_masks(map)) {
        const Eigen::Vector2d centroid = mask_centroid(mask);
        for (int r = 0; r < mask.rows(); ++r)
            for (int c = 0; c < mask.cols(); ++c) {
                if (!mask(r, c))
                    continue;
                const Eigen::Vector2d p(r, c);
                const double dist = (centroid - p).norm();
                if (dist == 0.0)
                    continue;
                const Eigen::Vector2d landed = p + dirs(r, c) * dist;
                EXPECT_LT((landed - centroid).norm(), 1e-6) << "id " << id << " at " << r << "," << c;
            }
    }
}

TEST(GtDirectionField, UnitNormEverywhere)
{
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto map = testing::random_scene(rng, testing::uniform_int(rng, 3, 50), testing::uniform_int(rng, 3, 50),
                                               testing::uniform_int(rng, 0, 5), 1.0, 10.0);
        const auto dirs = gt_direction_field(map);
        const Raster<double> norm = (dirs.drow().square() + dirs.dcol().square()).sqrt();
        EXPECT_LT((norm - 1.0).abs().maxCoeff(), 1e-6);
    }
}

TEST(GtDirectionField, StepAlongFieldApproachesCentroidOnConvexMasks)
{
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        Raster<std::int32_t> l = Raster<std::int32_t>::Zero(40, 40);
        testing::paint_ellipse(l, testing::uniform_real(rng, 12, 27), testing::uniform_real(rng, 12, 27), testing::uniform_real(rng, 3, 11),
                               testing::uniform_real(rng, 3, 11), 2);
        const InstanceLabelMap map(l);
        const auto dirs = gt_direction_field(map);
        const Eigen::Vector2d centroid = mask_centroid(instance_masks(map)[0].second);
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 40; ++c) {
                if (l(r, c) != 2)
                    continue;
                const Eigen::Vector2d p(r, c);
                const double before = (centroid - p).norm();
                if (before < 1e-12)
                    continue;
                const Eigen::Vector2d next = p + 0.5 * std::min(1.0, before) * dirs(r, c);
                EXPECT_LT((centroid - next).norm(), before);
            }
    }
}

}  // namespace
}  // namespace uois
