#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sweepalign/alignment.hpp"
#include "sweepalign/geometry.hpp"

namespace sweepalign {

// Voxel grid over the world frame plus the BEV downsampling stride. One BEV
// pixel (a "pillar") spans stride x stride voxels.
struct GridSpec {
    double x_min = -51.2;
    double x_max = 51.2;
    double y_min = -51.2;
    double y_max = 51.2;
    double z_min = -5.0;
    double z_max = 3.0;
    Vec3 cell{0.1, 0.1, 0.2};
    int stride = 8;

    // Throws InvalidArgument when a range is not a whole number of cells
    // (1e-9 slack) or the stride does not divide the cell counts.
    void validate() const;
    double pixel_x() const { return cell.x() * stride; }
    double pixel_y() const { return cell.y() * stride; }
    int width() const;   // pixels along x
    int height() const;  // pixels along y
};

struct PixelIndex {
    int row = -1;  // along y
    int col = -1;  // along x
    bool valid() const { return row >= 0; }
};

// floor((p - min) / pixel) per axis; points outside [min, max) in x, y or z
// come back invalid (masked, never wrapped).
std::vector<PixelIndex> pillarize(std::span<const Vec3> points, const GridSpec& grid);

using PointFeatures = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense H x W x C image, row-major with channels innermost.
class BevImage {
public:
    BevImage() = default;
    BevImage(const GridSpec& grid, int channels);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    const GridSpec& grid() const { return grid_; }

    float& at(int row, int col, int channel) { return data_[offset(row, col) + channel]; }
    float at(int row, int col, int channel) const { return data_[offset(row, col) + channel]; }
    std::span<float> pixel(int row, int col) {
        return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
    }
    std::span<const float> pixel(int row, int col) const {
        return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
    }
    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    bool occupied(int row, int col) const;
    std::size_t occupied_count() const;
    bool same_shape(const BevImage& other) const;

private:
    std::size_t offset(int row, int col) const {
        return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_);
    }

    GridSpec grid_;
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Deterministic stand-in for the backbone's per-point descriptor.
inline constexpr int kFeatureChannels = 6;
enum FeatureChannel : int {
    kOccupancy = 0,   // points in the point's pillar
    kOffsetX = 1,     // offset from the pillar center
    kOffsetY = 2,
    kOffsetZ = 3,     // offset from the middle of the z range
    kTimestamp = 4,   // sweep index k
    kPillarMeanZ = 5, // mean height of the pillar's points
};

PointFeatures featurize(const MergedCloud& merged, const GridSpec& grid);

enum class Reduce { Max, Mean };

// Untouched pixels stay zero. Max is order independent; Mean sums in point
// index order.
BevImage scatter_to_bev(std::span<const Vec3> points, const PointFeatures& features,
                        const GridSpec& grid, Reduce reduce);

// Bilinear blend of the four nearest pixel centers (clamped at the border).
// Throws OutOfRange outside the grid's xy range.
Eigen::VectorXf bilinear_interpolate(const BevImage& bev, const Vec2& xy);
// Batched variant; points outside the range get zero features.
PointFeatures interpolate_features(const BevImage& bev, std::span<const Vec3> points);

// Per-pixel weights in [0, 1], row-major H x W.
using FusionWeightFn = std::function<std::vector<float>(const BevImage& i0, const BevImage& i1)>;

// w = 1 where I1 is occupied, 0 elsewhere.
std::vector<float> occupancy_fusion_weights(const BevImage& i0, const BevImage& i1);

// w * I1 + (1 - w) * I0 channelwise.
BevImage fuse_bev(const BevImage& i0, const BevImage& i1,
                  const FusionWeightFn& weight_fn = occupancy_fusion_weights);

// Portable grid export: three text header lines
//   SWEEPALIGN-BEV 1
//   <height> <width> <channels>
//   <x_min> <y_min> <pixel_x> <pixel_y>
// followed by height*width*channels little-endian float32 values, row-major
// with channels innermost.
void write_bev_grid(const BevImage& image, const std::filesystem::path& path);
BevImage read_bev_grid(const std::filesystem::path& path);

}  // namespace sweepalign
