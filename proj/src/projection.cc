#include "projection.h"

#include <cmath>
#include <numbers>
#include <string>

#include "errors.h"

namespace foveapano {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kCoverageSlack = 1e-9;

double WrapLongitude(double lon) {
  double wrapped = std::fmod(lon + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  return wrapped - 180.0;
}

// Continuous pixel coordinates without coverage checks.
PixelCoord RawPixel(const EquirectPanorama& pano, double lon, double lat) {
  return {(lon / pano.lon_span() + 0.5) * pano.width() - 0.5,
          (0.5 - lat / EquirectPanorama::kLatSpan) * pano.height() - 0.5};
}

struct ViewFrame {
  double tan_half_h;
  double tan_half_v;
};

ViewFrame FrameOf(const ViewSpec& view) {
  return {std::tan(view.fov_h / 2.0 * kDegToRad),
          std::tan(view.fov_v / 2.0 * kDegToRad)};
}

}  // namespace

void ViewSpec::Validate() const {
  Require(yaw >= -180.0 && yaw < 180.0, ErrorCode::kDomain,
          "yaw must lie in [-180,180)");
  Require(pitch >= -90.0 && pitch <= 90.0, ErrorCode::kDomain,
          "pitch must lie in [-90,90]");
  Require(fov_h > 0.0 && fov_h < 180.0 && fov_v > 0.0 && fov_v < 180.0,
          ErrorCode::kDomain, "view FoV must lie strictly inside (0,180)");
}

EquirectPanorama::EquirectPanorama(RasterImage image, double lon_span)
    : image_(std::move(image)), lon_span_(lon_span) {
  Require(lon_span == 180.0 || lon_span == 360.0, ErrorCode::kDimension,
          "longitude span must be 180 or 360");
  const int expected = lon_span == 360.0 ? 2 * image_.height() : image_.height();
  Require(image_.width() == expected, ErrorCode::kDimension,
          "equirectangular pixels must be square in angle: " +
              std::to_string(image_.width()) + "x" +
              std::to_string(image_.height()) + " for span " +
              std::to_string(static_cast<int>(lon_span)));
}

Vec3 DirectionFromLonLat(double lon, double lat) {
  const double lon_r = lon * kDegToRad;
  const double lat_r = lat * kDegToRad;
  return {std::cos(lat_r) * std::sin(lon_r), std::sin(lat_r),
          std::cos(lat_r) * std::cos(lon_r)};
}

LonLat LonLatFromDirection(const Vec3& d) {
  return {std::atan2(d.x, d.z) * kRadToDeg,
          std::atan2(d.y, std::hypot(d.x, d.z)) * kRadToDeg};
}

Vec3 CameraToWorld(const ViewSpec& view, const Vec3& ray) {
  const double cp = std::cos(view.pitch * kDegToRad);
  const double sp = std::sin(view.pitch * kDegToRad);
  const double cy = std::cos(view.yaw * kDegToRad);
  const double sy = std::sin(view.yaw * kDegToRad);
  // Pitch about +x (positive looks up), then yaw about +y (positive east).
  const Vec3 pitched{ray.x, ray.y * cp + ray.z * sp, -ray.y * sp + ray.z * cp};
  return {pitched.x * cy + pitched.z * sy, pitched.y,
          -pitched.x * sy + pitched.z * cy};
}

Vec3 WorldToCamera(const ViewSpec& view, const Vec3& dir) {
  const double cp = std::cos(view.pitch * kDegToRad);
  const double sp = std::sin(view.pitch * kDegToRad);
  const double cy = std::cos(view.yaw * kDegToRad);
  const double sy = std::sin(view.yaw * kDegToRad);
  const Vec3 unyawed{dir.x * cy - dir.z * sy, dir.y, dir.x * sy + dir.z * cy};
  return {unyawed.x, unyawed.y * cp - unyawed.z * sp,
          unyawed.y * sp + unyawed.z * cp};
}

PixelCoord LonLatToPixel(const EquirectPanorama& pano, double lon,
                         double lat) {
  Require(std::abs(lat) <= 90.0, ErrorCode::kCoverage,
          "latitude outside [-90,90]");
  if (pano.full_sphere()) {
    Require(std::abs(lon) <= 180.0, ErrorCode::kCoverage,
            "longitude outside [-180,180]");
    lon = WrapLongitude(lon);
  } else {
    Require(std::abs(lon) <= pano.lon_span() / 2.0, ErrorCode::kCoverage,
            "longitude " + std::to_string(lon) + " outside panorama coverage");
  }
  return RawPixel(pano, lon, lat);
}

LonLat PixelToLonLat(const EquirectPanorama& pano, double x, double y) {
  Require(x >= -0.5 && x <= pano.width() - 0.5 && y >= -0.5 &&
              y <= pano.height() - 0.5,
          ErrorCode::kCoverage, "pixel coordinate outside panorama");
  return {((x + 0.5) / pano.width() - 0.5) * pano.lon_span(),
          (0.5 - (y + 0.5) / pano.height()) * EquirectPanorama::kLatSpan};
}

Color SamplePanorama(const EquirectPanorama& pano, double lon, double lat) {
  const PixelCoord p = RawPixel(pano, lon, lat);
  return pano.full_sphere() ? SampleBilinearWrapX(pano.image(), p.x, p.y)
                            : SampleBilinearClamped(pano.image(), p.x, p.y);
}

RasterImage ExtractView(const EquirectPanorama& pano, const ViewSpec& view,
                        int out_width, int out_height) {
  view.Validate();
  const ViewFrame frame = FrameOf(view);
  RasterImage out(out_width, out_height);
  const double half_span = pano.lon_span() / 2.0;
  for (int j = 0; j < out_height; ++j) {
    const double v = (1.0 - 2.0 * (j + 0.5) / out_height) * frame.tan_half_v;
    for (int i = 0; i < out_width; ++i) {
      const double u = (2.0 * (i + 0.5) / out_width - 1.0) * frame.tan_half_h;
      const LonLat ll = LonLatFromDirection(CameraToWorld(view, {u, v, 1.0}));
      if (!pano.full_sphere()) {
        Require(std::abs(ll.lon) <= half_span + kCoverageSlack,
                ErrorCode::kCoverage,
                "view footprint leaves the panorama coverage");
      }
      out.set_pixel(i, j, SamplePanorama(pano, ll.lon, ll.lat));
    }
  }
  return out;
}

InsertResult InsertView(const EquirectPanorama& canvas,
                        const RasterImage& perspective, const ViewSpec& view) {
  view.Validate();
  const ViewFrame frame = FrameOf(view);
  InsertResult result{canvas, Mask(canvas.width(), canvas.height(), 0)};
  RasterImage& img = result.pano.mutable_image();
  const int w = perspective.width();
  const int h = perspective.height();
  for (int y = 0; y < canvas.height(); ++y) {
    for (int x = 0; x < canvas.width(); ++x) {
      const LonLat ll = PixelToLonLat(canvas, x, y);
      const Vec3 c = WorldToCamera(view, DirectionFromLonLat(ll.lon, ll.lat));
      if (c.z <= 0.0) continue;
      const double u = c.x / c.z / frame.tan_half_h;
      const double v = c.y / c.z / frame.tan_half_v;
      if (std::abs(u) > 1.0 || std::abs(v) > 1.0) continue;
      const double px = (u + 1.0) * w / 2.0 - 0.5;
      const double py = (1.0 - v) * h / 2.0 - 0.5;
      img.set_pixel(x, y, SampleBilinearClamped(perspective, px, py));
      result.mask.at(x, y) = 1;
    }
  }
  return result;
}

RasterImage CropCentralQuarter(const RasterImage& img) {
  Require(img.width() % 2 == 0 && img.height() % 2 == 0, ErrorCode::kDimension,
          "central-quarter crop requires even dimensions");
  const int w = img.width() / 2;
  const int h = img.height() / 2;
  return Crop(img, (img.width() - w) / 2, (img.height() - h) / 2, w, h);
}

EquirectPanorama ExtractHemisphere(const EquirectPanorama& pano,
                                   double center_lon, int out_width,
                                   int out_height) {
  Require(pano.full_sphere(), ErrorCode::kCoverage,
          "hemisphere extraction requires a full-sphere panorama");
  const int native = pano.height();
  RasterImage window(native, native);
  for (int y = 0; y < native; ++y) {
    const double lat = (0.5 - (y + 0.5) / native) * 180.0;
    for (int x = 0; x < native; ++x) {
      const double lon = center_lon + ((x + 0.5) / native - 0.5) * 180.0;
      window.set_pixel(x, y, SamplePanorama(pano, lon, lat));
    }
  }
  return EquirectPanorama(Resize(window, out_width, out_height), 180.0);
}

std::string_view DirectionName(Direction d) {
  switch (d) {
    case Direction::kFront: return "front";
    case Direction::kRight: return "right";
    case Direction::kBack: return "back";
    case Direction::kLeft: return "left";
  }
  return "unknown";
}

double DirectionYaw(Direction d) {
  switch (d) {
    case Direction::kFront: return 0.0;
    case Direction::kRight: return 90.0;
    case Direction::kBack: return -180.0;
    case Direction::kLeft: return -90.0;
  }
  return 0.0;
}

std::array<PairTriple, 4> MakePairs(const EquirectPanorama& pano,
                                    const PairOptions& options) {
  Require(pano.full_sphere(), ErrorCode::kCoverage,
          "pair extraction requires a full-sphere panorama");
  Require(options.native_size >= 2 && options.native_size % 2 == 0 &&
              options.output_size >= 1,
          ErrorCode::kInvalidArgument, "invalid pair sizes");
  const int n = options.native_size;
  const int out = options.output_size;
  std::array<PairTriple, 4> pairs;
  for (std::size_t k = 0; k < kAllDirections.size(); ++k) {
    const Direction dir = kAllDirections[k];
    const ViewSpec view{DirectionYaw(dir), 0.0, 90.0, 90.0};
    const RasterImage near_native = ExtractView(pano, view, n, n);
    pairs[k].direction = dir;
    pairs[k].target_near = Resize(near_native, out, out);
    pairs[k].input_narrow = Resize(CropCentralQuarter(near_native), out, out);
    pairs[k].target_mid =
        ExtractHemisphere(pano, DirectionYaw(dir), out, out).image();
  }
  return pairs;
}

EquirectPanorama MirrorExtend(const EquirectPanorama& pano) {
  Require(pano.lon_span() == 180.0, ErrorCode::kDimension,
          "mirror extension expects a 180 degree panorama");
  const int w = pano.width();
  Require(w % 2 == 0, ErrorCode::kDimension,
          "mirror extension needs an even panorama width");
  const RasterImage& src = pano.image();
  RasterImage out(2 * w, pano.height());
  const int front_start = w / 2;
  for (int y = 0; y < pano.height(); ++y) {
    for (int c = 0; c < w; ++c) out.set_pixel(front_start + c, y, src.pixel(c, y));
    for (int m = 0; m < w / 2; ++m) {
      // Reflection about lon = +90 and lon = -90 respectively.
      out.set_pixel(front_start + w + m, y, src.pixel(w - 1 - m, y));
      out.set_pixel(front_start - 1 - m, y, src.pixel(m, y));
    }
  }
  return EquirectPanorama(std::move(out), 360.0);
}

}  // namespace foveapano
