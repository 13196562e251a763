#pragma once

// Binary morphology and connected components. Pixels outside the grid are
// ignored: they neither erode nor dilate anything.

#include "uois/core.hpp"

#include <Eigen/Core>

#include <vector>

namespace uois {

enum class ElementShape { Square, Disk };

class StructuringElement {
public:
    StructuringElement(ElementShape shape, int radius);

    static StructuringElement square(int radius) { return {ElementShape::Square, radius}; }
    static StructuringElement disk(int radius) { return {ElementShape::Disk, radius}; }

    ElementShape shape() const { return shape_; }
    int radius() const { return radius_; }

    // Half-width of the element's horizontal chord at row offset dy.
    int half_width(int dy) const { return half_widths_[std::size_t(dy + radius_)]; }

    bool contains(int dy, int dx) const { return dy >= -radius_ && dy <= radius_ && dx >= -half_width(dy) && dx <= half_width(dy); }

private:
    ElementShape shape_;
    int radius_;
    std::vector<int> half_widths_;
};

/// Disk of radius max(1, round(diagonal / 400)): 2 at 640x480.
StructuringElement default_element(const ImageGrid& grid);

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);

inline BinaryMask open(const BinaryMask& mask, const StructuringElement& se) { return dilate(erode(mask, se), se); }
inline BinaryMask close(const BinaryMask& mask, const StructuringElement& se) { return erode(dilate(mask, se), se); }

enum class Connectivity { Four = 4, Eight = 8 };

struct ComponentLabeling {
    Raster<std::int32_t> labels;  // -1 off-mask, else index into `sizes`
    std::vector<long> sizes;
    std::vector<Pixel> first_pixels;  // first pixel in row-major order
};

/// Components indexed in descending size, then ascending first pixel.
ComponentLabeling label_components(const BinaryMask& mask, Connectivity connectivity);

std::vector<BinaryMask> connected_components(const BinaryMask& mask, Connectivity connectivity);

/// True pixels with at least one false 8-neighbor or lying on the image border.
BinaryMask inner_boundary(const BinaryMask& mask);

struct ImpParams {
    StructuringElement open_element;
    StructuringElement close_element;
    Connectivity connectivity = Connectivity::Eight;

    static ImpParams defaults_for(const ImageGrid& grid)
    {
        return {default_element(grid), default_element(grid), Connectivity::Eight};
    }
};

/// Opening, closing, then the component nearest to `center` (distance to its
/// nearest pixel; ties go to the larger component, then the earlier one).
/// May return an empty mask.
BinaryMask imp_process(const BinaryMask& mask, const Eigen::Vector2d& center, const ImpParams& params);

}  // namespace uois
