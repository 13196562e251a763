#include "uois/geometry.hpp"

#include <vector>

namespace uois {

DirectionField<double> gt_direction_field(const InstanceLabelMap& instances)
{
    const ImageGrid& grid = instances.grid();
    const auto& labels = instances.labels();
    const int k = instances.num_instances();

    std::vector<Eigen::Vector2d> sums(std::size_t(k), Eigen::Vector2d::Zero());
    std::vector<long> counts(std::size_t(k), 0);
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            const int id = labels(r, c);
            if (id >= kFirstInstanceId) {
                sums[std::size_t(id - kFirstInstanceId)] += Eigen::Vector2d(r, c);
                ++counts[std::size_t(id - kFirstInstanceId)];
            }
        }
    }
    std::vector<Eigen::Vector2d> centroids(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < centroids.size(); ++i)
        centroids[i] = sums[i] / double(counts[i]);

    Raster<double> drow = Raster<double>::Constant(grid.height(), grid.width(), kFixedDirection.x());
    Raster<double> dcol = Raster<double>::Constant(grid.height(), grid.width(), kFixedDirection.y());
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            const int id = labels(r, c);
            if (id < kFirstInstanceId)
                continue;
            const Eigen::Vector2d d = centroids[std::size_t(id - kFirstInstanceId)] - Eigen::Vector2d(r, c);
            const double n = d.norm();
            if (n > 0.0) {
                drow(r, c) = d.x() / n;
                dcol(r, c) = d.y() / n;
            }
        }
    }
    return DirectionField<double>(std::move(drow), std::move(dcol));
}

}  // namespace uois
