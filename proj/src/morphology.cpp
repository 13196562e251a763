#include "uois/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uois {

StructuringElement::StructuringElement(ElementShape shape, int radius) : shape_(shape), radius_(radius)
{
    if (radius < 1)
        throw Error("structuring element radius must be >= 1");
    half_widths_.resize(std::size_t(2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        int w = radius;
        if (shape == ElementShape::Disk)
            w = static_cast<int>(std::floor(std::sqrt(double(radius) * radius - double(dy) * dy) + 1e-9));
        half_widths_[std::size_t(dy + radius)] = w;
    }
}

StructuringElement default_element(const ImageGrid& grid)
{
    return StructuringElement::disk(std::max(1, static_cast<int>(std::lround(grid.diagonal() / 400.0))));
}

namespace {

// prefix(r, c) = number of true pixels in row r before column c.
Raster<std::int32_t> row_prefix(const BinaryMask& mask)
{
    Raster<std::int32_t> prefix(mask.rows(), mask.cols() + 1);
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        prefix(r, 0) = 0;
        for (Eigen::Index c = 0; c < mask.cols(); ++c)
            prefix(r, c + 1) = prefix(r, c) + (mask(r, c) ? 1 : 0);
    }
    return prefix;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    const auto prefix = row_prefix(mask);
    BinaryMask out = BinaryMask::Zero(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask(r, c))
                continue;
            bool keep = true;
            for (int dy = -se.radius(); dy <= se.radius() && keep; ++dy) {
                const int rr = r + dy;
                if (rr < 0 || rr >= h)
                    continue;
                const int hw = se.half_width(dy);
                const int c0 = std::max(0, c - hw);
                const int c1 = std::min(w - 1, c + hw);
                keep = prefix(rr, c1 + 1) - prefix(rr, c0) == c1 - c0 + 1;
            }
            out(r, c) = keep;
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    const auto prefix = row_prefix(mask);
    BinaryMask out = BinaryMask::Zero(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            bool hit = false;
            for (int dy = -se.radius(); dy <= se.radius() && !hit; ++dy) {
                const int rr = r + dy;
                if (rr < 0 || rr >= h)
                    continue;
                const int hw = se.half_width(dy);
                const int c0 = std::max(0, c - hw);
                const int c1 = std::min(w - 1, c + hw);
                hit = prefix(rr, c1 + 1) - prefix(rr, c0) > 0;
            }
            out(r, c) = hit;
        }
    }
    return out;
}

ComponentLabeling label_components(const BinaryMask& mask, Connectivity connectivity)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    Raster<std::int32_t> raw = Raster<std::int32_t>::Constant(h, w, -1);
    std::vector<long> sizes;
    std::vector<Pixel> firsts;
    std::vector<Pixel> stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask(r, c) || raw(r, c) >= 0)
                continue;
            const auto id = static_cast<std::int32_t>(sizes.size());
            long size = 0;
            raw(r, c) = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                ++size;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dy == 0 && dx == 0) || (connectivity == Connectivity::Four && dy != 0 && dx != 0))
                            continue;
                        const int rr = p.row + dy;
                        const int cc = p.col + dx;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w || !mask(rr, cc) || raw(rr, cc) >= 0)
                            continue;
                        raw(rr, cc) = id;
                        stack.push_back({rr, cc});
                    }
                }
            }
            sizes.push_back(size);
            firsts.push_back({r, c});
        }
    }

    // Discovery order is already ascending first pixel; a stable sort by size keeps it as the tie-break.
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    std::vector<std::int32_t> rank(sizes.size());
    ComponentLabeling out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[order[i]] = static_cast<std::int32_t>(i);
        out.sizes.push_back(sizes[order[i]]);
        out.first_pixels.push_back(firsts[order[i]]);
    }
    out.labels = raw.unaryExpr([&](std::int32_t id) { return id < 0 ? id : rank[std::size_t(id)]; });
    return out;
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask, Connectivity connectivity)
{
    const auto labeling = label_components(mask, connectivity);
    std::vector<BinaryMask> out;
    out.reserve(labeling.sizes.size());
    for (std::size_t i = 0; i < labeling.sizes.size(); ++i)
        out.emplace_back(labeling.labels == static_cast<std::int32_t>(i));
    return out;
}

BinaryMask inner_boundary(const BinaryMask& mask)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    BinaryMask out = BinaryMask::Zero(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask(r, c))
                continue;
            if (r == 0 || c == 0 || r == h - 1 || c == w - 1) {
                out(r, c) = true;
                continue;
            }
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy)
                for (int dx = -1; dx <= 1 && !edge; ++dx)
                    edge = !mask(r + dy, c + dx);
            out(r, c) = edge;
        }
    }
    return out;
}

BinaryMask imp_process(const BinaryMask& mask, const Eigen::Vector2d& center, const ImpParams& params)
{
    const int h = int(mask.rows());
    const int w = int(mask.cols());
    BinaryMask out = BinaryMask::Zero(h, w);
    if (!mask.any())
        return out;

    // Work on a crop large enough that the crop edge behaves like the image edge.
    const BoundingBox box = bounding_box(mask);
    const int margin = params.open_element.radius() + params.close_element.radius() + 2;
    const int r0 = std::max(0, box.row0 - margin);
    const int c0 = std::max(0, box.col0 - margin);
    const int r1 = std::min(h - 1, box.row1 + margin);
    const int c1 = std::min(w - 1, box.col1 + margin);
    const BinaryMask crop = mask.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1);

    const BinaryMask cleaned = close(open(crop, params.open_element), params.close_element);
    const auto labeling = label_components(cleaned, params.connectivity);
    if (labeling.sizes.empty())
        return out;

    std::vector<double> nearest(labeling.sizes.size(), std::numeric_limits<double>::infinity());
    for (int r = 0; r < cleaned.rows(); ++r) {
        for (int c = 0; c < cleaned.cols(); ++c) {
            const auto id = labeling.labels(r, c);
            if (id < 0)
                continue;
            const double d = (Eigen::Vector2d(r + r0, c + c0) - center).squaredNorm();
            nearest[std::size_t(id)] = std::min(nearest[std::size_t(id)], d);
        }
    }
    // Components are already ordered by size then first pixel, so the first minimum wins ties.
    const auto best = static_cast<std::int32_t>(std::min_element(nearest.begin(), nearest.end()) - nearest.begin());
    out.block(r0, c0, cleaned.rows(), cleaned.cols()) = labeling.labels == best;
    return out;
}

}  // namespace uois
