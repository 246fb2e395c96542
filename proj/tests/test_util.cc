#include "test_util.h"

#include <cmath>
#include <unistd.h>

#include <Eigen/Dense>

namespace foveapano::testing {

Color SmoothField(const Vec3& d) {
  return {0.5 + 0.3 * d.x + 0.1 * d.y * d.z,
          0.5 + 0.25 * d.y - 0.15 * d.x * d.z,
          0.45 + 0.3 * d.z + 0.1 * d.x * d.y};
}

EquirectPanorama SmoothPanorama(int height) {
  EquirectPanorama pano(RasterImage(2 * height, height), 360.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < 2 * height; ++x) {
      const LonLat ll = PixelToLonLat(pano, x, y);
      pano.mutable_image().set_pixel(x, y,
                                     SmoothField(DirectionFromLonLat(ll.lon, ll.lat)));
    }
  }
  return pano;
}

RasterImage SmoothImage(int width, int height, double phase) {
  RasterImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      img.set_pixel(x, y, {0.5 + 0.35 * std::sin(3.0 * u + phase) * std::cos(2.0 * v),
                           0.4 + 0.3 * u * v + 0.1 * std::sin(phase),
                           0.6 - 0.3 * v + 0.1 * std::cos(4.0 * u)});
    }
  }
  return img;
}

RasterImage RandomImage(int width, int height, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterImage img(width, height);
  for (double& s : img.samples()) s = u(rng);
  return img;
}

std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("foveapano_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RasterImage DensePoissonOracle(const RasterImage& canvas,
                               const RasterImage& guidance,
                               const BlendMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  int n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == BlendLabel::kFill) index[y * w + x] = n++;
    }
  }
  RasterImage out = canvas;
  if (n == 0) return out;

  // Component labels, to find Fill regions with no Dirichlet data.
  std::vector<int> comp(index.size(), -1);
  std::vector<bool> anchored;
  for (int s = 0; s < w * h; ++s) {
    if (index[s] < 0 || comp[s] >= 0) continue;
    const int label = static_cast<int>(anchored.size());
    anchored.push_back(false);
    std::vector<int> stack{s};
    comp[s] = label;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int px = p % w, py = p / w;
      const int nbr[4][2] = {{px, py - 1}, {px - 1, py}, {px + 1, py}, {px, py + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
        const int qi = q[1] * w + q[0];
        if (mask.values()[qi] == BlendLabel::kKeep) anchored[label] = true;
        if (index[qi] >= 0 && comp[qi] < 0) {
          comp[qi] = label;
          stack.push_back(qi);
        }
      }
    }
  }

  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int i = index[y * w + x];
        if (i < 0) continue;
        if (!anchored[comp[y * w + x]]) {
          a(i, i) = 1.0;
          b(i) = guidance.at(x, y, c);
          continue;
        }
        const int nbr[4][2] = {{x, y - 1}, {x - 1, y}, {x + 1, y}, {x, y + 1}};
        for (const auto& q : nbr) {
          if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
          const BlendLabel label = mask.at(q[0], q[1]);
          if (label == BlendLabel::kOutside) continue;
          a(i, i) += 1.0;
          b(i) += guidance.at(x, y, c) - guidance.at(q[0], q[1], c);
          if (label == BlendLabel::kFill) {
            a(i, index[q[1] * w + q[0]]) -= 1.0;
          } else {
            b(i) += canvas.at(q[0], q[1], c);
          }
        }
      }
    }
    const Eigen::VectorXd f = a.fullPivLu().solve(b);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int i = index[y * w + x];
        if (i >= 0) out.at(x, y, c) = f(i);
      }
    }
  }
  return out;
}

SelfReconstruction MakeSelfReconstruction(const EquirectPanorama& pano,
                                          int input_size, int output_height) {
  SelfReconstruction s;
  // The input covers the central half of the 90 degree view (linear ratio
  // 1/2), so render the 90 degree view at twice the input size and crop.
  ViewSpec near_view;
  const RasterImage near_native = ExtractView(pano, near_view, 2 * input_size,
                                              2 * input_size);
  s.input = CropCentralQuarter(near_native);
  s.near_truth = Resize(near_native, kNetworkSize, kNetworkSize);
  s.hemisphere = ExtractHemisphere(pano, 0.0, output_height, output_height);
  s.mid_truth = Resize(s.hemisphere.image(), kNetworkSize, kNetworkSize);
  return s;
}

}  // namespace foveapano::testing
