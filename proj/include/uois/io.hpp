#pragma once

// File formats: PNG rasters, camera JSON, the direction-field binary, and the
// on-disk dataset layout <root>/<scene>/{rgb.png, depth.png, label.png}.

#include "uois/core.hpp"
#include "uois/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace uois::io {

namespace fs = std::filesystem;

/// Unreadable or ill-formed input.
class DataError : public Error {
public:
    using Error::Error;
};

// PNG. Readers accept any bit depth/color type libpng can convert and throw
// DataError when the image cannot be represented losslessly in the target.
Raster<std::uint8_t> read_png8(const fs::path& path);
Raster<std::uint16_t> read_png16(const fs::path& path);
RgbImage read_png_rgb(const fs::path& path);
void write_png(const fs::path& path, const Raster<std::uint8_t>& gray);
void write_png(const fs::path& path, const Raster<std::uint16_t>& gray);
void write_png(const fs::path& path, const RgbImage& rgb);

/// Meters to millimeters, rounded; invalid or out-of-range pixels become 0.
Raster<std::uint16_t> depth_to_mm(const Raster<double>& depth, const BinaryMask& valid);
/// Millimeters to meters; 0 is missing.
Raster<double> depth_from_mm(const Raster<std::uint16_t>& mm);

InstanceLabelMap labels_from_png(const Raster<std::uint16_t>& raw);
Raster<std::uint16_t> labels_to_png(const InstanceLabelMap& labels);

PinholeCamera<double> read_camera(const fs::path& path);
void write_camera(const fs::path& path, const PinholeCamera<double>& camera);

// Direction-field binary: "UOIS", u8 version, u32 H, W, C (little-endian),
// then H*W*C little-endian float32, row-major with channels innermost.
inline constexpr std::uint8_t kFieldVersion = 1;

struct FieldFile {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    float& at(int row, int col, int ch) { return data[(std::size_t(row) * width + col) * channels + ch]; }
    float at(int row, int col, int ch) const { return data[(std::size_t(row) * width + col) * channels + ch]; }
};

void write_field(std::ostream& out, const FieldFile& field);
FieldFile read_field(std::istream& in);
void write_field(const fs::path& path, const FieldFile& field);
FieldFile read_field(const fs::path& path);

/// Two channels (drow, dcol).
FieldFile to_field(const DirectionField<double>& dirs);
/// Non-unit vectors are an error unless their pixels are marked invalid by
/// being exactly zero.
DirectionField<double> directions_from_field(const FieldFile& field);
/// One channel per class.
FieldFile to_field(const SemanticProbs<double>& probs);
SemanticProbs<double> semantic_from_field(const FieldFile& field);

inline constexpr const char* kCameraFile = "camera.json";
inline constexpr const char* kRgbFile = "rgb.png";
inline constexpr const char* kDepthFile = "depth.png";
inline constexpr const char* kLabelFile = "label.png";
inline constexpr const char* kSemanticFile = "semantic.png";
inline constexpr const char* kPoseFile = "pose.json";
inline constexpr const char* kDirectionsFile = "directions.bin";
inline constexpr const char* kProbsFile = "semantic.bin";

/// Subdirectories of `root` holding `marker`, sorted by name.
std::vector<std::string> list_scenes(const fs::path& root, const char* marker);

struct SceneData {
    std::string name;
    Raster<double> depth;
    BinaryMask valid;
    std::optional<RgbImage> rgb;
    std::optional<InstanceLabelMap> labels;
};

/// Depth is required; rgb and labels are loaded when present.
SceneData read_scene(const fs::path& root, const std::string& name, const PinholeCamera<double>& camera);

}  // namespace uois::io
