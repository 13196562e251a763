#pragma once

// Shared raster types. Every raster is row-major with pixel (0, 0) at the
// top-left; flat pixel index is row * width + col.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uois {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BinaryMask = Raster<bool>;

struct Pixel {
    int row = 0;
    int col = 0;

    auto operator<=>(const Pixel&) const = default;
};

class ImageGrid {
public:
    ImageGrid(int height, int width) : height_(height), width_(width)
    {
        if (height < 1 || width < 1)
            throw Error("image grid must be at least 1x1, got " + std::to_string(height) + "x" + std::to_string(width));
    }

    template <typename Derived>
    static ImageGrid of(const Eigen::DenseBase<Derived>& raster)
    {
        return ImageGrid(static_cast<int>(raster.rows()), static_cast<int>(raster.cols()));
    }

    int height() const { return height_; }
    int width() const { return width_; }
    Eigen::Index size() const { return Eigen::Index(height_) * width_; }
    double diagonal() const { return std::hypot(double(height_), double(width_)); }

    bool contains(int row, int col) const { return row >= 0 && row < height_ && col >= 0 && col < width_; }
    Eigen::Index index(int row, int col) const { return Eigen::Index(row) * width_ + col; }

    template <typename Derived>
    bool matches(const Eigen::DenseBase<Derived>& raster) const
    {
        return raster.rows() == height_ && raster.cols() == width_;
    }

    bool operator==(const ImageGrid&) const = default;

private:
    int height_;
    int width_;
};

enum class SemanticClass : std::uint8_t { Background = 0, Table = 1, Object = 2 };

inline constexpr int kNumSemanticClasses = 3;
inline constexpr int kBackgroundLabel = 0;
inline constexpr int kTableLabel = 1;
inline constexpr int kFirstInstanceId = 2;

// Fixed "don't care" direction for background and table pixels: image-up,
// stored as (drow, dcol).
inline const Eigen::Vector2d kFixedDirection{-1.0, 0.0};

inline void require_same_grid(const ImageGrid& a, const ImageGrid& b, const char* what)
{
    if (!(a == b))
        throw Error(std::string(what) + ": grid mismatch (" + std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
}

/// Per-pixel class labels in {0 background, 1 table, 2 object} (or any
/// label set smaller than `classes`).
class SemanticLabels {
public:
    SemanticLabels(Raster<std::uint8_t> labels, int classes = kNumSemanticClasses)
        : grid_(ImageGrid::of(labels)), labels_(std::move(labels)), classes_(classes)
    {
        if (classes_ < 1)
            throw Error("semantic labels need at least one class");
        if (labels_.size() > 0 && labels_.maxCoeff() >= classes_)
            throw Error("semantic label out of range: " + std::to_string(int(labels_.maxCoeff())) + " >= " + std::to_string(classes_));
    }

    const ImageGrid& grid() const { return grid_; }
    const Raster<std::uint8_t>& labels() const { return labels_; }
    int classes() const { return classes_; }
    int operator()(int row, int col) const { return labels_(row, col); }
    bool is_object(int row, int col) const { return labels_(row, col) == int(SemanticClass::Object); }

    BinaryMask object_mask() const { return labels_ == std::uint8_t(SemanticClass::Object); }

private:
    ImageGrid grid_;
    Raster<std::uint8_t> labels_;
    int classes_;
};

/// Per-pixel class probabilities; row `i` of `probs()` is pixel `i`.
template <typename Scalar>
class SemanticProbs {
public:
    using Probs = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    SemanticProbs(ImageGrid grid, Probs probs) : grid_(grid), probs_(std::move(probs))
    {
        if (probs_.rows() != grid_.size())
            throw Error("semantic probabilities: expected " + std::to_string(grid_.size()) + " pixels, got " + std::to_string(probs_.rows()));
        if (probs_.cols() < 1)
            throw Error("semantic probabilities: need at least one class");
        if ((probs_ < Scalar(0)).any())
            throw Error("semantic probabilities: negative probability");
        const auto sums = probs_.rowwise().sum();
        if (((sums - Scalar(1)).abs() > Scalar(1e-6)).any())
            throw Error("semantic probabilities: a pixel does not sum to 1");
    }

    static SemanticProbs one_hot(const SemanticLabels& labels)
    {
        Probs probs = Probs::Zero(labels.grid().size(), labels.classes());
        const auto& raw = labels.labels();
        for (Eigen::Index i = 0; i < raw.size(); ++i)
            probs(i, raw.data()[i]) = Scalar(1);
        return SemanticProbs(labels.grid(), std::move(probs));
    }

    const ImageGrid& grid() const { return grid_; }
    const Probs& probs() const { return probs_; }
    int classes() const { return int(probs_.cols()); }

    SemanticLabels argmax() const
    {
        Raster<std::uint8_t> labels(grid_.height(), grid_.width());
        for (Eigen::Index i = 0; i < probs_.rows(); ++i) {
            Eigen::Index best = 0;
            probs_.row(i).maxCoeff(&best);
            labels.data()[i] = static_cast<std::uint8_t>(best);
        }
        return SemanticLabels(std::move(labels), classes());
    }

private:
    ImageGrid grid_;
    Probs probs_;
};

/// Per-pixel 2D unit vectors stored as (drow, dcol). Pixels with
/// `valid == false` carry no direction and are skipped by voting.
template <typename Scalar>
class DirectionField {
public:
    DirectionField(Raster<Scalar> drow, Raster<Scalar> dcol, BinaryMask valid)
        : grid_(ImageGrid::of(drow)), drow_(std::move(drow)), dcol_(std::move(dcol)), valid_(std::move(valid))
    {
        if (!grid_.matches(dcol_) || !grid_.matches(valid_))
            throw Error("direction field: channel shapes differ");
        const Raster<Scalar> norm = (drow_.square() + dcol_.square()).sqrt();
        if ((valid_ && (norm - Scalar(1)).abs() > Scalar(1e-4)).any())
            throw Error("direction field: a valid pixel is not a unit vector");
    }

    DirectionField(Raster<Scalar> drow, Raster<Scalar> dcol)
        : DirectionField(drow, std::move(dcol), BinaryMask::Constant(drow.rows(), drow.cols(), true))
    {}

    static DirectionField constant(ImageGrid grid, const Eigen::Matrix<Scalar, 2, 1>& dir)
    {
        return DirectionField(Raster<Scalar>::Constant(grid.height(), grid.width(), dir.x()),
                              Raster<Scalar>::Constant(grid.height(), grid.width(), dir.y()));
    }

    const ImageGrid& grid() const { return grid_; }
    const Raster<Scalar>& drow() const { return drow_; }
    const Raster<Scalar>& dcol() const { return dcol_; }
    const BinaryMask& valid() const { return valid_; }

    Eigen::Matrix<Scalar, 2, 1> operator()(int row, int col) const { return {drow_(row, col), dcol_(row, col)}; }

private:
    ImageGrid grid_;
    Raster<Scalar> drow_;
    Raster<Scalar> dcol_;
    BinaryMask valid_;
};

/// XYZ per pixel in meters. Invalid pixels hold (0, 0, 0).
template <typename Scalar>
class OrganizedPointCloud {
public:
    using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

    OrganizedPointCloud(ImageGrid grid, Points xyz, BinaryMask valid) : grid_(grid), xyz_(std::move(xyz)), valid_(std::move(valid))
    {
        if (xyz_.rows() != grid_.size() || !grid_.matches(valid_))
            throw Error("point cloud: shape does not match grid");
        for (Eigen::Index i = 0; i < xyz_.rows(); ++i) {
            if (!valid_.data()[i] && !xyz_.row(i).isZero(0))
                throw Error("point cloud: invalid pixel with nonzero xyz");
        }
    }

    const ImageGrid& grid() const { return grid_; }
    const Points& xyz() const { return xyz_; }
    const BinaryMask& valid() const { return valid_; }

    Raster<Scalar> depth() const
    {
        Raster<Scalar> z(grid_.height(), grid_.width());
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(z.data(), z.size()) = xyz_.col(2);
        return z;
    }

private:
    ImageGrid grid_;
    Points xyz_;
    BinaryMask valid_;
};

/// 8-bit RGB image as three planes.
struct RgbImage {
    std::array<Raster<std::uint8_t>, 3> channels;

    RgbImage() = default;
    explicit RgbImage(const ImageGrid& grid)
    {
        for (auto& c : channels)
            c = Raster<std::uint8_t>::Zero(grid.height(), grid.width());
    }

    ImageGrid grid() const { return ImageGrid::of(channels[0]); }
    bool operator==(const RgbImage& other) const
    {
        for (std::size_t k = 0; k < 3; ++k)
            if (channels[k].rows() != other.channels[k].rows() || channels[k].cols() != other.channels[k].cols() ||
                !(channels[k] == other.channels[k]).all())
                return false;
        return true;
    }
};

/// Instance ids: 0 background, 1 table, 2..1+K objects with every id present.
class InstanceLabelMap {
public:
    explicit InstanceLabelMap(Raster<std::int32_t> labels);

    // Relabels arbitrary ids >= 2 to a contiguous range, preserving the
    // ascending order of the original ids.
    static InstanceLabelMap compacted(Raster<std::int32_t> labels);

    const ImageGrid& grid() const { return grid_; }
    const Raster<std::int32_t>& labels() const { return labels_; }
    int num_instances() const { return num_instances_; }
    std::int32_t operator()(int row, int col) const { return labels_(row, col); }

    SemanticLabels semantic() const;

    bool operator==(const InstanceLabelMap& other) const { return grid_ == other.grid_ && (labels_ == other.labels_).all(); }

private:
    ImageGrid grid_;
    Raster<std::int32_t> labels_;
    int num_instances_ = 0;
};

/// One mask per instance id, ascending.
std::vector<std::pair<int, BinaryMask>> instance_masks(const InstanceLabelMap& map);

/// Mean (row, col) of the true pixels. Throws on an empty mask.
Eigen::Vector2d mask_centroid(const BinaryMask& mask);

struct BoundingBox {
    int row0 = 0, col0 = 0;  // inclusive
    int row1 = 0, col1 = 0;  // inclusive
    int height() const { return row1 - row0 + 1; }
    int width() const { return col1 - col0 + 1; }
};

/// Tight box around the true pixels. Throws on an empty mask.
BoundingBox bounding_box(const BinaryMask& mask);

}  // namespace uois
