#ifndef FOVEAPANO_RASTER_H_
#define FOVEAPANO_RASTER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace foveapano {

using Color = std::array<double, 3>;

// Row-major single-valued grid. Used for masks and per-pixel labels.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool Contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y) { return data_[Index(x, y)]; }
  const T& at(int x, int y) const { return data_[Index(x, y)]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

// H x W x 3 color raster, interleaved RGB, nominal range [0,1].
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  // Throws kDimension on non-positive sizes.
  RasterImage(int width, int height, Color fill = {0.0, 0.0, 0.0});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  double& at(int x, int y, int c) { return samples_[Index(x, y) + c]; }
  double at(int x, int y, int c) const { return samples_[Index(x, y) + c]; }

  Color pixel(int x, int y) const;
  void set_pixel(int x, int y, const Color& color);

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  // True when every sample is finite and inside [0,1].
  bool IsInUnitRange() const;
  void ClampToUnitRange();

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// Bilinear sample at continuous pixel coordinates (pixel i centered at i).
// Coordinates are clamped to the pixel-center hull on both axes.
Color SampleBilinearClamped(const RasterImage& img, double x, double y);

// Same, but the x axis wraps around (full-sphere longitude).
Color SampleBilinearWrapX(const RasterImage& img, double x, double y);

// Separable resize. Each axis uses area averaging when shrinking and
// bilinear interpolation (half-pixel aligned) when enlarging.
RasterImage Resize(const RasterImage& img, int out_width, int out_height);

RasterImage Crop(const RasterImage& img, int x0, int y0, int width,
                 int height);

// Copies |src| into |dst| with its top-left corner at (x0, y0).
void Paste(const RasterImage& src, int x0, int y0, RasterImage* dst);

RasterImage Scale(const RasterImage& img, double factor);

}  // namespace foveapano

#endif  // FOVEAPANO_RASTER_H_
