#include "raster.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.h"

namespace foveapano {

RasterImage::RasterImage(int width, int height, Color fill)
    : width_(width), height_(height) {
  Require(width >= 1 && height >= 1, ErrorCode::kDimension,
          "raster dimensions must be positive, got " + std::to_string(width) +
              "x" + std::to_string(height));
  samples_.resize(pixel_count() * kChannels);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    for (int c = 0; c < kChannels; ++c) samples_[i * kChannels + c] = fill[c];
  }
}

Color RasterImage::pixel(int x, int y) const {
  const std::size_t i = Index(x, y);
  return {samples_[i], samples_[i + 1], samples_[i + 2]};
}

void RasterImage::set_pixel(int x, int y, const Color& color) {
  const std::size_t i = Index(x, y);
  samples_[i] = color[0];
  samples_[i + 1] = color[1];
  samples_[i + 2] = color[2];
}

bool RasterImage::IsInUnitRange() const {
  return std::all_of(samples_.begin(), samples_.end(), [](double v) {
    return std::isfinite(v) && v >= 0.0 && v <= 1.0;
  });
}

void RasterImage::ClampToUnitRange() {
  for (double& v : samples_) v = std::clamp(v, 0.0, 1.0);
}

namespace {

struct Tap {
  int i0;
  int i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

Tap ClampedTap(double coord, int size) {
  coord = std::clamp(coord, 0.0, static_cast<double>(size - 1));
  const int i0 = std::min(static_cast<int>(std::floor(coord)), size - 1);
  const int i1 = std::min(i0 + 1, size - 1);
  return {i0, i1, coord - i0};
}

Tap WrappedTap(double coord, int size) {
  const double f = std::floor(coord);
  int i0 = static_cast<int>(f) % size;
  if (i0 < 0) i0 += size;
  return {i0, (i0 + 1) % size, coord - f};
}

Color Blend(const RasterImage& img, const Tap& tx, const Tap& ty) {
  Color out;
  for (int c = 0; c < RasterImage::kChannels; ++c) {
    const double top = img.at(tx.i0, ty.i0, c) * (1.0 - tx.w1) +
                       img.at(tx.i1, ty.i0, c) * tx.w1;
    const double bottom = img.at(tx.i0, ty.i1, c) * (1.0 - tx.w1) +
                          img.at(tx.i1, ty.i1, c) * tx.w1;
    out[c] = top * (1.0 - ty.w1) + bottom * ty.w1;
  }
  return out;
}

// Sparse 1-D resampling weights: out[j] = sum_k weights[j][k].second *
// in[weights[j][k].first].
using AxisWeights = std::vector<std::vector<std::pair<int, double>>>;

AxisWeights ComputeAxisWeights(int in_size, int out_size) {
  AxisWeights weights(out_size);
  if (out_size == in_size) {
    for (int j = 0; j < out_size; ++j) weights[j] = {{j, 1.0}};
  } else if (out_size < in_size) {
    // Box filter: output pixel j covers [j*s, (j+1)*s) in input units.
    const double scale = static_cast<double>(in_size) / out_size;
    for (int j = 0; j < out_size; ++j) {
      const double lo = j * scale;
      const double hi = (j + 1) * scale;
      const int first = static_cast<int>(std::floor(lo));
      const int last = std::min(static_cast<int>(std::ceil(hi)), in_size);
      for (int i = first; i < last; ++i) {
        const double overlap = std::min(hi, i + 1.0) - std::max(lo, double(i));
        if (overlap > 0.0) weights[j].emplace_back(i, overlap / scale);
      }
    }
  } else {
    const double scale = static_cast<double>(in_size) / out_size;
    for (int j = 0; j < out_size; ++j) {
      const Tap tap = ClampedTap((j + 0.5) * scale - 0.5, in_size);
      if (tap.i0 == tap.i1 || tap.w1 == 0.0) {
        weights[j] = {{tap.i0, 1.0}};
      } else {
        weights[j] = {{tap.i0, 1.0 - tap.w1}, {tap.i1, tap.w1}};
      }
    }
  }
  return weights;
}

}  // namespace

Color SampleBilinearClamped(const RasterImage& img, double x, double y) {
  return Blend(img, ClampedTap(x, img.width()), ClampedTap(y, img.height()));
}

Color SampleBilinearWrapX(const RasterImage& img, double x, double y) {
  return Blend(img, WrappedTap(x, img.width()), ClampedTap(y, img.height()));
}

RasterImage Resize(const RasterImage& img, int out_width, int out_height) {
  Require(!img.empty(), ErrorCode::kDimension, "cannot resize an empty raster");
  if (out_width == img.width() && out_height == img.height()) return img;

  const AxisWeights wx = ComputeAxisWeights(img.width(), out_width);
  const AxisWeights wy = ComputeAxisWeights(img.height(), out_height);

  RasterImage horizontal(out_width, img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < out_width; ++x) {
      Color acc{0.0, 0.0, 0.0};
      for (const auto& [src, w] : wx[x]) {
        for (int c = 0; c < 3; ++c) acc[c] += w * img.at(src, y, c);
      }
      horizontal.set_pixel(x, y, acc);
    }
  }
  RasterImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      Color acc{0.0, 0.0, 0.0};
      for (const auto& [src, w] : wy[y]) {
        for (int c = 0; c < 3; ++c) acc[c] += w * horizontal.at(x, src, c);
      }
      out.set_pixel(x, y, acc);
    }
  }
  return out;
}

RasterImage Crop(const RasterImage& img, int x0, int y0, int width,
                 int height) {
  Require(x0 >= 0 && y0 >= 0 && x0 + width <= img.width() &&
              y0 + height <= img.height(),
          ErrorCode::kDimension, "crop window outside raster");
  RasterImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.set_pixel(x, y, img.pixel(x0 + x, y0 + y));
  }
  return out;
}

void Paste(const RasterImage& src, int x0, int y0, RasterImage* dst) {
  Require(x0 >= 0 && y0 >= 0 && x0 + src.width() <= dst->width() &&
              y0 + src.height() <= dst->height(),
          ErrorCode::kGeometry, "pasted raster exceeds destination");
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      dst->set_pixel(x0 + x, y0 + y, src.pixel(x, y));
    }
  }
}

RasterImage Scale(const RasterImage& img, double factor) {
  RasterImage out = img;
  for (double& v : out.samples()) v *= factor;
  return out;
}

}  // namespace foveapano
