#include "uois/io.hpp"

#include <nlohmann/json.hpp>
#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace uois::io {
namespace {

struct File {
    std::FILE* f = nullptr;
    ~File()
    {
        if (f)
            std::fclose(f);
    }
};

struct PngImage {
    int height = 0;
    int width = 0;
    int channels = 0;  // 1 or 3
    int depth = 8;     // 8 or 16
    std::vector<std::uint8_t> bytes;  // row-major; 16-bit samples big-endian
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg)
{
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    *text = msg;
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

PngImage read_png(const fs::path& path, bool want_color)
{
    File file{std::fopen(path.c_str(), "rb")};
    if (!file.f)
        throw DataError("cannot open " + path.string());
    std::array<unsigned char, 8> sig{};
    if (std::fread(sig.data(), 1, sig.size(), file.f) != sig.size() || png_sig_cmp(sig.data(), 0, sig.size()) != 0)
        throw DataError(path.string() + ": not a PNG file");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError(path.string() + ": out of memory");
    }
    PngImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path.string() + ": " + message);
    }
    png_init_io(png, file.f);
    png_set_sig_bytes(png, int(sig.size()));
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int bits = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && bits < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    const bool is_color = color == PNG_COLOR_TYPE_PALETTE || (color & PNG_COLOR_MASK_COLOR);
    if (want_color && !is_color)
        png_set_gray_to_rgb(png);
    if (!want_color && is_color) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path.string() + ": expected a grayscale PNG");
    }
    png_read_update_info(png, info);

    img.height = int(png_get_image_height(png, info));
    img.width = int(png_get_image_width(png, info));
    img.channels = int(png_get_channels(png, info));
    img.depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    img.bytes.resize(stride * std::size_t(img.height));
    rows.resize(std::size_t(img.height));
    for (int r = 0; r < img.height; ++r)
        rows[std::size_t(r)] = img.bytes.data() + std::size_t(r) * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png_bytes(const fs::path& path, int height, int width, int channels, int depth, const std::vector<std::uint8_t>& bytes)
{
    File file{std::fopen(path.c_str(), "wb")};
    if (!file.f)
        throw DataError("cannot write " + path.string());
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError(path.string() + ": out of memory");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError(path.string() + ": " + message);
    }
    png_init_io(png, file.f);
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), depth, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    const std::size_t stride = std::size_t(width) * std::size_t(channels) * std::size_t(depth / 8);
    for (int r = 0; r < height; ++r)
        rows[std::size_t(r)] = const_cast<png_bytep>(bytes.data() + std::size_t(r) * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

template <typename T>
T read_le(const unsigned char* p)
{
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= T(p[i]) << (8 * i);
    return v;
}

template <typename T>
void put_le(std::string& out, T v)
{
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(char((v >> (8 * i)) & 0xff));
}

double json_number(const nlohmann::json& j, const char* key, const fs::path& path)
{
    if (!j.contains(key) || !j.at(key).is_number())
        throw DataError(path.string() + ": missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

Raster<std::uint8_t> read_png8(const fs::path& path)
{
    const PngImage img = read_png(path, false);
    if (img.depth != 8)
        throw DataError(path.string() + ": expected an 8-bit PNG, got " + std::to_string(img.depth) + "-bit");
    Raster<std::uint8_t> out(img.height, img.width);
    std::memcpy(out.data(), img.bytes.data(), img.bytes.size());
    return out;
}

Raster<std::uint16_t> read_png16(const fs::path& path)
{
    const PngImage img = read_png(path, false);
    Raster<std::uint16_t> out(img.height, img.width);
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out.data()[i] = img.depth == 16 ? std::uint16_t((img.bytes[2 * std::size_t(i)] << 8) | img.bytes[2 * std::size_t(i) + 1])
                                        : img.bytes[std::size_t(i)];
    return out;
}

RgbImage read_png_rgb(const fs::path& path)
{
    const PngImage img = read_png(path, true);
    if (img.depth != 8)
        throw DataError(path.string() + ": expected an 8-bit RGB PNG");
    RgbImage out(ImageGrid(img.height, img.width));
    for (Eigen::Index i = 0; i < out.channels[0].size(); ++i)
        for (std::size_t k = 0; k < 3; ++k)
            out.channels[k].data()[i] = img.bytes[3 * std::size_t(i) + k];
    return out;
}

void write_png(const fs::path& path, const Raster<std::uint8_t>& gray)
{
    std::vector<std::uint8_t> bytes(gray.data(), gray.data() + gray.size());
    write_png_bytes(path, int(gray.rows()), int(gray.cols()), 1, 8, bytes);
}

void write_png(const fs::path& path, const Raster<std::uint16_t>& gray)
{
    std::vector<std::uint8_t> bytes(2 * std::size_t(gray.size()));
    for (Eigen::Index i = 0; i < gray.size(); ++i) {
        bytes[2 * std::size_t(i)] = std::uint8_t(gray.data()[i] >> 8);
        bytes[2 * std::size_t(i) + 1] = std::uint8_t(gray.data()[i] & 0xff);
    }
    write_png_bytes(path, int(gray.rows()), int(gray.cols()), 1, 16, bytes);
}

void write_png(const fs::path& path, const RgbImage& rgb)
{
    const auto n = std::size_t(rgb.channels[0].size());
    std::vector<std::uint8_t> bytes(3 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 3; ++k)
            bytes[3 * i + k] = rgb.channels[k].data()[i];
    write_png_bytes(path, int(rgb.channels[0].rows()), int(rgb.channels[0].cols()), 3, 8, bytes);
}

Raster<std::uint16_t> depth_to_mm(const Raster<double>& depth, const BinaryMask& valid)
{
    require_same_grid(ImageGrid::of(depth), ImageGrid::of(valid), "depth_to_mm");
    Raster<std::uint16_t> out = Raster<std::uint16_t>::Zero(depth.rows(), depth.cols());
    for (Eigen::Index i = 0; i < depth.size(); ++i) {
        const double mm = std::round(depth.data()[i] * 1000.0);
        if (valid.data()[i] && mm >= 1.0 && mm <= 65535.0)
            out.data()[i] = std::uint16_t(mm);
    }
    return out;
}

Raster<double> depth_from_mm(const Raster<std::uint16_t>& mm) { return mm.cast<double>() / 1000.0; }

InstanceLabelMap labels_from_png(const Raster<std::uint16_t>& raw) { return InstanceLabelMap::compacted(raw.cast<std::int32_t>()); }

Raster<std::uint16_t> labels_to_png(const InstanceLabelMap& labels)
{
    if (labels.num_instances() + kFirstInstanceId - 1 > 65535)
        throw DataError("too many instances for a 16-bit label image");
    return labels.labels().cast<std::uint16_t>();
}

PinholeCamera<double> read_camera(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    const double h = json_number(j, "height", path);
    const double w = json_number(j, "width", path);
    if (h < 1 || w < 1 || h != std::floor(h) || w != std::floor(w))
        throw DataError(path.string() + ": width and height must be positive integers");
    try {
        return PinholeCamera<double>(json_number(j, "fx", path), json_number(j, "fy", path), json_number(j, "cx", path), json_number(j, "cy", path),
                                     ImageGrid(int(h), int(w)));
    } catch (const DataError&) {
        throw;
    } catch (const Error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_camera(const fs::path& path, const PinholeCamera<double>& camera)
{
    const nlohmann::json j = {{"fx", camera.fx()},
                              {"fy", camera.fy()},
                              {"cx", camera.cx()},
                              {"cy", camera.cy()},
                              {"width", camera.grid().width()},
                              {"height", camera.grid().height()}};
    std::ofstream out(path);
    if (!(out << j.dump(2) << '\n'))
        throw DataError("cannot write " + path.string());
}

void write_field(std::ostream& out, const FieldFile& field)
{
    if (field.height < 1 || field.width < 1 || field.channels < 1 ||
        field.data.size() != std::size_t(field.height) * std::size_t(field.width) * std::size_t(field.channels))
        throw Error("direction-field file: inconsistent shape");
    std::string buf = "UOIS";
    buf.push_back(char(kFieldVersion));
    put_le(buf, std::uint32_t(field.height));
    put_le(buf, std::uint32_t(field.width));
    put_le(buf, std::uint32_t(field.channels));
    buf.reserve(buf.size() + 4 * field.data.size());
    for (const float v : field.data)
        put_le(buf, std::bit_cast<std::uint32_t>(v));
    if (!out.write(buf.data(), std::streamsize(buf.size())))
        throw DataError("direction-field file: write failed");
}

FieldFile read_field(std::istream& in)
{
    std::array<unsigned char, 17> header{};
    if (!in.read(reinterpret_cast<char*>(header.data()), header.size()))
        throw DataError("direction-field file: truncated header");
    if (std::memcmp(header.data(), "UOIS", 4) != 0)
        throw DataError("direction-field file: bad magic");
    if (header[4] != kFieldVersion)
        throw DataError("direction-field file: unsupported version " + std::to_string(header[4]));
    FieldFile f;
    const auto h = read_le<std::uint32_t>(header.data() + 5);
    const auto w = read_le<std::uint32_t>(header.data() + 9);
    const auto c = read_le<std::uint32_t>(header.data() + 13);
    if (h < 1 || w < 1 || c < 1 || std::uint64_t(h) * w * c > (std::uint64_t(1) << 32))
        throw DataError("direction-field file: bad shape " + std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c));
    f.height = int(h);
    f.width = int(w);
    f.channels = int(c);
    const std::size_t n = std::size_t(h) * w * c;
    std::vector<unsigned char> raw(4 * n);
    if (!in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size())))
        throw DataError("direction-field file: truncated data");
    f.data.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        f.data[i] = std::bit_cast<float>(read_le<std::uint32_t>(raw.data() + 4 * i));
    if (in.peek() != std::char_traits<char>::eof())
        throw DataError("direction-field file: trailing bytes");
    return f;
}

void write_field(const fs::path& path, const FieldFile& field)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    write_field(out, field);
}

FieldFile read_field(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    try {
        return read_field(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

FieldFile to_field(const DirectionField<double>& dirs)
{
    const ImageGrid& g = dirs.grid();
    FieldFile f{g.height(), g.width(), 2, std::vector<float>(std::size_t(g.size()) * 2)};
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c) {
            const bool ok = dirs.valid()(r, c);
            f.at(r, c, 0) = ok ? float(dirs.drow()(r, c)) : 0.0f;
            f.at(r, c, 1) = ok ? float(dirs.dcol()(r, c)) : 0.0f;
        }
    return f;
}

DirectionField<double> directions_from_field(const FieldFile& f)
{
    if (f.channels != 2)
        throw DataError("direction field: expected 2 channels, got " + std::to_string(f.channels));
    Raster<double> drow(f.height, f.width), dcol(f.height, f.width);
    BinaryMask valid(f.height, f.width);
    for (int r = 0; r < f.height; ++r)
        for (int c = 0; c < f.width; ++c) {
            const double a = f.at(r, c, 0);
            const double b = f.at(r, c, 1);
            valid(r, c) = !(a == 0.0 && b == 0.0);
            const double n = std::hypot(a, b);
            if (valid(r, c) && !(std::abs(n - 1.0) <= 1e-4))
                throw DataError("direction field: pixel (" + std::to_string(r) + ", " + std::to_string(c) + ") is not a unit vector");
            // float storage loses a little; renormalize.
            drow(r, c) = valid(r, c) ? a / n : kFixedDirection.x();
            dcol(r, c) = valid(r, c) ? b / n : kFixedDirection.y();
        }
    return DirectionField<double>(std::move(drow), std::move(dcol), std::move(valid));
}

FieldFile to_field(const SemanticProbs<double>& probs)
{
    const ImageGrid& g = probs.grid();
    const int k = probs.classes();
    FieldFile f{g.height(), g.width(), k, std::vector<float>(std::size_t(g.size()) * std::size_t(k))};
    for (Eigen::Index i = 0; i < g.size(); ++i)
        for (int c = 0; c < k; ++c)
            f.data[std::size_t(i) * std::size_t(k) + std::size_t(c)] = float(probs.probs()(i, c));
    return f;
}

SemanticProbs<double> semantic_from_field(const FieldFile& f)
{
    const ImageGrid grid(f.height, f.width);
    SemanticProbs<double>::Probs p(grid.size(), f.channels);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        double sum = 0.0;
        for (int c = 0; c < f.channels; ++c) {
            p(i, c) = f.data[std::size_t(i) * std::size_t(f.channels) + std::size_t(c)];
            sum += p(i, c);
        }
        if (!(std::abs(sum - 1.0) <= 1e-4) || (p.row(i) < 0.0).any())
            throw DataError("semantic probabilities: pixel " + std::to_string(i) + " is not a distribution");
        p.row(i) /= sum;
    }
    return SemanticProbs<double>(grid, std::move(p));
}

std::vector<std::string> list_scenes(const fs::path& root, const char* marker)
{
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw DataError("not a directory: " + root.string());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / marker))
            names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

SceneData read_scene(const fs::path& root, const std::string& name, const PinholeCamera<double>& camera)
{
    const fs::path dir = root / name;
    SceneData s;
    s.name = name;
    const Raster<std::uint16_t> mm = read_png16(dir / kDepthFile);
    if (!camera.grid().matches(mm))
        throw DataError((dir / kDepthFile).string() + ": size does not match camera.json");
    s.depth = depth_from_mm(mm);
    s.valid = mm > 0;
    if (fs::exists(dir / kRgbFile)) {
        s.rgb = read_png_rgb(dir / kRgbFile);
        if (!(s.rgb->grid() == camera.grid()))
            throw DataError((dir / kRgbFile).string() + ": size does not match camera.json");
    }
    if (fs::exists(dir / kLabelFile)) {
        const auto raw = read_png16(dir / kLabelFile);
        if (!camera.grid().matches(raw))
            throw DataError((dir / kLabelFile).string() + ": size does not match camera.json");
        s.labels = labels_from_png(raw);
    }
    return s;
}

}  // namespace uois::io
