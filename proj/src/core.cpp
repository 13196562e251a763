#include "uois/core.hpp"

#include <algorithm>
#include <map>

namespace uois {

InstanceLabelMap::InstanceLabelMap(Raster<std::int32_t> labels) : grid_(ImageGrid::of(labels)), labels_(std::move(labels))
{
    if ((labels_ < 0).any())
        throw Error("instance labels must be nonnegative");
    const int max_id = labels_.maxCoeff();
    num_instances_ = std::max(0, max_id - kFirstInstanceId + 1);
    std::vector<char> seen(std::size_t(num_instances_), 0);
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
        const auto id = labels_.data()[i];
        if (id >= kFirstInstanceId)
            seen[std::size_t(id - kFirstInstanceId)] = 1;
    }
    for (int k = 0; k < num_instances_; ++k) {
        if (!seen[std::size_t(k)])
            throw Error("instance ids are not contiguous: id " + std::to_string(k + kFirstInstanceId) + " has no pixels");
    }
}

InstanceLabelMap InstanceLabelMap::compacted(Raster<std::int32_t> labels)
{
    std::map<std::int32_t, std::int32_t> remap;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels.data()[i] >= kFirstInstanceId)
            remap.emplace(labels.data()[i], 0);
    }
    std::int32_t next = kFirstInstanceId;
    for (auto& [from, to] : remap)
        to = next++;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        auto& id = labels.data()[i];
        if (id >= kFirstInstanceId)
            id = remap[id];
    }
    return InstanceLabelMap(std::move(labels));
}

SemanticLabels InstanceLabelMap::semantic() const
{
    Raster<std::uint8_t> out = labels_.min(kFirstInstanceId).cast<std::uint8_t>();
    return SemanticLabels(std::move(out));
}

std::vector<std::pair<int, BinaryMask>> instance_masks(const InstanceLabelMap& map)
{
    std::vector<std::pair<int, BinaryMask>> out;
    out.reserve(std::size_t(map.num_instances()));
    for (int k = 0; k < map.num_instances(); ++k) {
        const int id = k + kFirstInstanceId;
        out.emplace_back(id, map.labels() == id);
    }
    return out;
}

Eigen::Vector2d mask_centroid(const BinaryMask& mask)
{
    double sum_row = 0.0;
    double sum_col = 0.0;
    long count = 0;
    for (int r = 0; r < mask.rows(); ++r) {
        for (int c = 0; c < mask.cols(); ++c) {
            if (mask(r, c)) {
                sum_row += r;
                sum_col += c;
                ++count;
            }
        }
    }
    if (count == 0)
        throw Error("centroid of an empty mask is undefined");
    return {sum_row / double(count), sum_col / double(count)};
}

BoundingBox bounding_box(const BinaryMask& mask)
{
    BoundingBox box{int(mask.rows()), int(mask.cols()), -1, -1};
    for (int r = 0; r < mask.rows(); ++r) {
        for (int c = 0; c < mask.cols(); ++c) {
            if (mask(r, c)) {
                box.row0 = std::min(box.row0, r);
                box.row1 = std::max(box.row1, r);
                box.col0 = std::min(box.col0, c);
                box.col1 = std::max(box.col1, c);
            }
        }
    }
    if (box.row1 < 0)
        throw Error("bounding box of an empty mask is undefined");
    return box;
}

}  // namespace uois
