#include "sweepalign/bev.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

constexpr double kDivisibilityTolerance = 1e-9;
constexpr double kCenterSnap = 1e-9;

int cell_count(double lo, double hi, double cell, const char* axis) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo)) {
        throw InvalidArgument(std::string("GridSpec: empty or non-finite ") + axis + " range");
    }
    if (!(std::isfinite(cell) && cell > 0.0)) {
        throw InvalidArgument(std::string("GridSpec: ") + axis + " cell size must be > 0");
    }
    const double cells = (hi - lo) / cell;
    const double rounded = std::round(cells);
    if (std::abs(rounded * cell - (hi - lo)) > kDivisibilityTolerance) {
        throw InvalidArgument(std::string("GridSpec: ") + axis +
                              " range is not a whole number of cells");
    }
    return static_cast<int>(rounded);
}

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
}

// Fractional pixel coordinate; values within 1e-9 of an integer snap to it
// so that queries at pixel centers reproduce the pixel exactly.
double pixel_coordinate(double value, double lo, double pixel) {
    const double u = (value - lo) / pixel - 0.5;
    const double nearest = std::round(u);
    return std::abs(u - nearest) < kCenterSnap ? nearest : u;
}

}  // namespace

void GridSpec::validate() const {
    const int nx = cell_count(x_min, x_max, cell.x(), "x");
    const int ny = cell_count(y_min, y_max, cell.y(), "y");
    cell_count(z_min, z_max, cell.z(), "z");
    if (stride < 1) {
        throw InvalidArgument("GridSpec: stride must be >= 1");
    }
    if (nx % stride != 0 || ny % stride != 0) {
        throw InvalidArgument("GridSpec: stride " + std::to_string(stride) +
                              " does not divide the grid (" + std::to_string(nx) + " x " +
                              std::to_string(ny) + " cells)");
    }
}

int GridSpec::width() const {
    return static_cast<int>(std::round((x_max - x_min) / cell.x())) / stride;
}

int GridSpec::height() const {
    return static_cast<int>(std::round((y_max - y_min) / cell.y())) / stride;
}

std::vector<PixelIndex> pillarize(std::span<const Vec3> points, const GridSpec& grid) {
    grid.validate();
    const int width = grid.width();
    const int height = grid.height();
    const double px = grid.pixel_x();
    const double py = grid.pixel_y();
    std::vector<PixelIndex> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points[i];
        if (!p.allFinite() || p.z() < grid.z_min || p.z() >= grid.z_max || p.x() < grid.x_min ||
            p.y() < grid.y_min) {
            continue;
        }
        const double cx = std::floor((p.x() - grid.x_min) / px);
        const double cy = std::floor((p.y() - grid.y_min) / py);
        if (cx >= width || cy >= height) {
            continue;
        }
        out[i] = PixelIndex{static_cast<int>(cy), static_cast<int>(cx)};
    }
    return out;
}

BevImage::BevImage(const GridSpec& grid, int channels)
    : grid_((grid.validate(), grid)), height_(grid.height()), width_(grid.width()), channels_(channels) {
    if (channels < 1) {
        throw InvalidArgument("BevImage: channels must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_) *
                     static_cast<std::size_t>(channels_),
                 0.0F);
}

bool BevImage::occupied(int row, int col) const {
    const auto values = pixel(row, col);
    return std::any_of(values.begin(), values.end(), [](float v) { return v != 0.0F; });
}

std::size_t BevImage::occupied_count() const {
    std::size_t count = 0;
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            count += occupied(r, c) ? 1 : 0;
        }
    }
    return count;
}

bool BevImage::same_shape(const BevImage& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
}

PointFeatures featurize(const MergedCloud& merged, const GridSpec& grid) {
    const auto cells = pillarize(merged.points, grid);
    const int width = grid.width();
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(grid.height());
    std::vector<std::uint32_t> count(pixels, 0);
    std::vector<double> sum_z(pixels, 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].valid()) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(cells[i].row) * static_cast<std::size_t>(width) +
                         static_cast<std::size_t>(cells[i].col);
        ++count[idx];
        sum_z[idx] += merged.points[i].z();
    }

    const double z_mid = 0.5 * (grid.z_min + grid.z_max);
    PointFeatures features = PointFeatures::Zero(static_cast<Eigen::Index>(merged.size()), kFeatureChannels);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].valid()) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(cells[i].row) * static_cast<std::size_t>(width) +
                         static_cast<std::size_t>(cells[i].col);
        const Vec3& p = merged.points[i];
        const double center_x = grid.x_min + (cells[i].col + 0.5) * grid.pixel_x();
        const double center_y = grid.y_min + (cells[i].row + 0.5) * grid.pixel_y();
        const auto row = static_cast<Eigen::Index>(i);
        features(row, kOccupancy) = static_cast<float>(count[idx]);
        features(row, kOffsetX) = static_cast<float>(p.x() - center_x);
        features(row, kOffsetY) = static_cast<float>(p.y() - center_y);
        features(row, kOffsetZ) = static_cast<float>(p.z() - z_mid);
        features(row, kTimestamp) = static_cast<float>(merged.timestamp[i]);
        features(row, kPillarMeanZ) = static_cast<float>(sum_z[idx] / count[idx]);
    }
    return features;
}

BevImage scatter_to_bev(std::span<const Vec3> points, const PointFeatures& features,
                        const GridSpec& grid, Reduce reduce) {
    if (static_cast<std::size_t>(features.rows()) != points.size()) {
        throw InvalidArgument("scatter_to_bev: " + std::to_string(features.rows()) +
                              " feature rows for " + std::to_string(points.size()) + " points");
    }
    const int channels = static_cast<int>(features.cols());
    BevImage image(grid, channels);
    const auto cells = pillarize(points, grid);
    const int width = image.width();
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(image.height());
    std::vector<std::uint32_t> count(pixels, 0);

    if (reduce == Reduce::Max) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!cells[i].valid()) {
                continue;
            }
            const auto idx = static_cast<std::size_t>(cells[i].row) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(cells[i].col);
            auto pixel = image.pixel(cells[i].row, cells[i].col);
            const auto row = static_cast<Eigen::Index>(i);
            for (int c = 0; c < channels; ++c) {
                const float v = features(row, c);
                pixel[static_cast<std::size_t>(c)] =
                    count[idx] == 0 ? v : std::max(pixel[static_cast<std::size_t>(c)], v);
            }
            ++count[idx];
        }
        return image;
    }

    std::vector<double> sums(pixels * static_cast<std::size_t>(channels), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].valid()) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(cells[i].row) * static_cast<std::size_t>(width) +
                         static_cast<std::size_t>(cells[i].col);
        const auto row = static_cast<Eigen::Index>(i);
        for (int c = 0; c < channels; ++c) {
            sums[idx * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] += features(row, c);
        }
        ++count[idx];
    }
    auto data = image.data();
    for (std::size_t idx = 0; idx < pixels; ++idx) {
        if (count[idx] == 0) {
            continue;
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c) {
            const std::size_t at = idx * static_cast<std::size_t>(channels) + c;
            data[at] = static_cast<float>(sums[at] / count[idx]);
        }
    }
    return image;
}

Eigen::VectorXf bilinear_interpolate(const BevImage& bev, const Vec2& xy) {
    const GridSpec& grid = bev.grid();
    if (!xy.allFinite() || xy.x() < grid.x_min || xy.x() > grid.x_max || xy.y() < grid.y_min ||
        xy.y() > grid.y_max) {
        throw OutOfRange("bilinear_interpolate: query outside the grid range");
    }
    const double u = pixel_coordinate(xy.x(), grid.x_min, grid.pixel_x());
    const double v = pixel_coordinate(xy.y(), grid.y_min, grid.pixel_y());
    const double u0 = std::floor(u);
    const double v0 = std::floor(v);
    const double wu = u - u0;
    const double wv = v - v0;
    const int w_max = bev.width() - 1;
    const int h_max = bev.height() - 1;
    const int c0 = std::clamp(static_cast<int>(u0), 0, w_max);
    const int c1 = std::clamp(static_cast<int>(u0) + 1, 0, w_max);
    const int r0 = std::clamp(static_cast<int>(v0), 0, h_max);
    const int r1 = std::clamp(static_cast<int>(v0) + 1, 0, h_max);

    Eigen::VectorXf out(bev.channels());
    for (int c = 0; c < bev.channels(); ++c) {
        const double f00 = bev.at(r0, c0, c);
        if (wu == 0.0 && wv == 0.0) {
            out[c] = static_cast<float>(f00);
            continue;
        }
        const double f01 = bev.at(r0, c1, c);
        const double f10 = bev.at(r1, c0, c);
        const double f11 = bev.at(r1, c1, c);
        const double top = (1.0 - wu) * f00 + wu * f01;
        const double bottom = (1.0 - wu) * f10 + wu * f11;
        out[c] = static_cast<float>((1.0 - wv) * top + wv * bottom);
    }
    return out;
}

PointFeatures interpolate_features(const BevImage& bev, std::span<const Vec3> points) {
    const GridSpec& grid = bev.grid();
    PointFeatures out = PointFeatures::Zero(static_cast<Eigen::Index>(points.size()), bev.channels());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points[i];
        if (!p.allFinite() || p.x() < grid.x_min || p.x() > grid.x_max || p.y() < grid.y_min ||
            p.y() > grid.y_max) {
            continue;
        }
        out.row(static_cast<Eigen::Index>(i)) = bilinear_interpolate(bev, p.head<2>()).transpose();
    }
    return out;
}

std::vector<float> occupancy_fusion_weights(const BevImage& /*i0*/, const BevImage& i1) {
    std::vector<float> weights(static_cast<std::size_t>(i1.height()) * static_cast<std::size_t>(i1.width()), 0.0F);
    for (int r = 0; r < i1.height(); ++r) {
        for (int c = 0; c < i1.width(); ++c) {
            if (i1.occupied(r, c)) {
                weights[static_cast<std::size_t>(r) * static_cast<std::size_t>(i1.width()) +
                        static_cast<std::size_t>(c)] = 1.0F;
            }
        }
    }
    return weights;
}

BevImage fuse_bev(const BevImage& i0, const BevImage& i1, const FusionWeightFn& weight_fn) {
    if (!i0.same_shape(i1)) {
        throw InvalidArgument("fuse_bev: I0 and I1 differ in shape");
    }
    const std::vector<float> weights = weight_fn(i0, i1);
    const std::size_t pixels = static_cast<std::size_t>(i0.height()) * static_cast<std::size_t>(i0.width());
    if (weights.size() != pixels) {
        throw InvalidArgument("fuse_bev: weight map has the wrong size");
    }
    BevImage out(i0.grid(), i0.channels());
    const auto a = i0.data();
    const auto b = i1.data();
    auto dst = out.data();
    const auto channels = static_cast<std::size_t>(i0.channels());
    for (std::size_t p = 0; p < pixels; ++p) {
        const float w = weights[p];
        if (!(w >= 0.0F && w <= 1.0F)) {
            throw InvalidArgument("fuse_bev: weight outside [0, 1]");
        }
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = p * channels + c;
            if (w == 0.0F) {
                dst[at] = a[at];
            } else if (w == 1.0F) {
                dst[at] = b[at];
            } else {
                dst[at] = w * b[at] + (1.0F - w) * a[at];
            }
        }
    }
    return out;
}

void write_bev_grid(const BevImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    const GridSpec& grid = image.grid();
    std::ostringstream header;
    header.precision(17);
    header << "SWEEPALIGN-BEV 1\n"
           << image.height() << ' ' << image.width() << ' ' << image.channels() << '\n'
           << grid.x_min << ' ' << grid.y_min << ' ' << grid.pixel_x() << ' ' << grid.pixel_y() << '\n';
    out << header.str();
    for (const float v : image.data()) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        bits = to_little_endian(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

BevImage read_bev_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::string magic_line;
    std::string dims_line;
    std::string origin_line;
    if (!std::getline(in, magic_line) || magic_line != "SWEEPALIGN-BEV 1") {
        throw ParseError(path.string() + ": line 1: expected 'SWEEPALIGN-BEV 1'");
    }
    int height = 0;
    int width = 0;
    int channels = 0;
    if (!std::getline(in, dims_line) || !(std::istringstream(dims_line) >> height >> width >> channels) ||
        height < 1 || width < 1 || channels < 1) {
        throw ParseError(path.string() + ": line 2: expected '<height> <width> <channels>'");
    }
    GridSpec grid;
    double px = 0.0;
    double py = 0.0;
    if (!std::getline(in, origin_line) ||
        !(std::istringstream(origin_line) >> grid.x_min >> grid.y_min >> px >> py) || px <= 0.0 ||
        py <= 0.0) {
        throw ParseError(path.string() + ": line 3: expected '<x_min> <y_min> <pixel_x> <pixel_y>'");
    }
    grid.stride = 1;
    grid.cell = Vec3(px, py, grid.z_max - grid.z_min);
    grid.x_max = grid.x_min + px * width;
    grid.y_max = grid.y_min + py * height;
    BevImage image(grid, channels);
    for (float& v : image.data()) {
        std::uint32_t bits = 0;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
            throw ParseError(path.string() + ": truncated float payload");
        }
        bits = to_little_endian(bits);
        std::memcpy(&v, &bits, sizeof v);
    }
    return image;
}

}  // namespace sweepalign
