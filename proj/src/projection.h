#ifndef FOVEAPANO_PROJECTION_H_
#define FOVEAPANO_PROJECTION_H_

#include <array>
#include <string>
#include <string_view>

#include "raster.h"

// Perspective <-> equirectangular mapping.
//
// World frame: +x east (lon +90), +y up, +z forward (lon 0, lat 0).
// Longitudes are measured from the panorama's central meridian. Pixel i
// spans [i, i+1) so its center sits at continuous coordinate i.
namespace foveapano {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

// Orientation plus FoV of a pinhole (gnomonic) view. Roll is always 0.
struct ViewSpec {
  double yaw = 0.0;    // [-180, 180)
  double pitch = 0.0;  // [-90, 90]
  double fov_h = 90.0;
  double fov_v = 90.0;

  void Validate() const;
};

class EquirectPanorama {
 public:
  static constexpr double kLatSpan = 180.0;

  EquirectPanorama() = default;
  // Throws kDimension unless pixels are square in angle, i.e. width equals
  // height for a 180 degree span and 2*height for 360.
  EquirectPanorama(RasterImage image, double lon_span);

  const RasterImage& image() const { return image_; }
  RasterImage& mutable_image() { return image_; }
  double lon_span() const { return lon_span_; }
  int width() const { return image_.width(); }
  int height() const { return image_.height(); }
  bool full_sphere() const { return lon_span_ == 360.0; }

 private:
  RasterImage image_;
  double lon_span_ = 360.0;
};

Vec3 DirectionFromLonLat(double lon, double lat);
LonLat LonLatFromDirection(const Vec3& d);

// Camera-frame ray (right, up, forward) to world frame for |view|.
Vec3 CameraToWorld(const ViewSpec& view, const Vec3& ray);
Vec3 WorldToCamera(const ViewSpec& view, const Vec3& dir);

// Throws kCoverage when (lon, lat) lies outside the panorama.
PixelCoord LonLatToPixel(const EquirectPanorama& pano, double lon, double lat);
LonLat PixelToLonLat(const EquirectPanorama& pano, double x, double y);

// Bilinear lookup; longitude wraps on full-sphere panoramas, latitude clamps.
Color SamplePanorama(const EquirectPanorama& pano, double lon, double lat);

// Renders a gnomonic view. Throws kCoverage if the view footprint leaves a
// partial panorama.
RasterImage ExtractView(const EquirectPanorama& pano, const ViewSpec& view,
                        int out_width, int out_height);

struct InsertResult {
  EquirectPanorama pano;
  Mask mask;  // 1 where the canvas was written
};

// Writes |perspective| into every canvas pixel whose direction lies inside
// the view frustum. Other pixels are left untouched.
InsertResult InsertView(const EquirectPanorama& canvas,
                        const RasterImage& perspective, const ViewSpec& view);

// Centered width/2 x height/2 window; odd offsets resolve toward top-left.
RasterImage CropCentralQuarter(const RasterImage& img);

// Resamples the 180 degree window centered on |center_lon| from a
// full-sphere panorama (native resolution, then resized to out size).
EquirectPanorama ExtractHemisphere(const EquirectPanorama& pano,
                                   double center_lon, int out_width,
                                   int out_height);

enum class Direction { kFront, kRight, kBack, kLeft };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kFront, Direction::kRight, Direction::kBack, Direction::kLeft};

std::string_view DirectionName(Direction d);
double DirectionYaw(Direction d);

struct PairTriple {
  RasterImage input_narrow;
  RasterImage target_near;
  RasterImage target_mid;
  Direction direction = Direction::kFront;
};

struct PairOptions {
  int native_size = 512;  // perspective extraction size before resizing
  int output_size = 256;
};

std::array<PairTriple, 4> MakePairs(const EquirectPanorama& pano,
                                    const PairOptions& options = {});

// 180 -> 360 degrees: the rear hemisphere is the front one reflected about
// the +/-90 degree meridians.
EquirectPanorama MirrorExtend(const EquirectPanorama& pano);

}  // namespace foveapano

#endif  // FOVEAPANO_PROJECTION_H_
