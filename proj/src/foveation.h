#ifndef FOVEAPANO_FOVEATION_H_
#define FOVEAPANO_FOVEATION_H_

#include <string>
#include <vector>

// Peripheral-vision resolution model and the field-of-view geometry of the
// two-stage extension. All angles are in degrees.
namespace foveapano {

struct FoveationModel {
  // Eccentricity at which relative acuity halves.
  double beta = 2.5;

  void Validate() const;
};

struct ResolutionRequirement {
  double theta1 = 0.0;  // edge of the source image
  double theta2 = 0.0;  // query eccentricity
  double r1 = 1.0;      // relative resolution of the source
  double r2 = 1.0;      // minimum relative resolution at theta2
};

struct ExtensionGeometry {
  double linear_ratio = 0.5;  // original side / extended side
  double alpha = 0.0;         // input FoV
  double alpha_prime = 90.0;  // target FoV
};

// Angular bands of the output: center (original), near periphery (stage 1)
// and mid periphery (stage 2). Each value is a full FoV, not a half-angle.
struct FoveatedLayout {
  FoveatedLayout();

  double center_fov;
  double near_fov = 90.0;
  double mid_fov = 180.0;

  double center_half() const { return center_fov / 2.0; }
  double near_half() const { return near_fov / 2.0; }
  double mid_half() const { return mid_fov / 2.0; }

  void Validate() const;
};

// beta / (beta + theta). Throws kDomain for negative theta.
double RelativeResolution(const FoveationModel& model, double theta);

// Minimum resolution at theta2 for content whose edge sits at theta1 with
// resolution r1. Depends only on theta2 - theta1.
double RequiredResolution(const FoveationModel& model, double theta1,
                          double theta2, double r1);
ResolutionRequirement ComputeRequirement(const FoveationModel& model,
                                         double theta1, double theta2,
                                         double r1);

// FoV of the original image when it is extended by 1/linear_ratio per side
// to reach alpha_prime.
double InputFov(double linear_ratio, double alpha_prime);

// tan(alpha/2) / tan(alpha_prime/2).
double LinearRatio(double alpha, double alpha_prime);
ExtensionGeometry MakeExtensionGeometry(double linear_ratio,
                                        double alpha_prime);

struct ProfileRow {
  double theta = 0.0;
  double required = 0.0;
  double system = 0.0;
};

// Samples eccentricity from 0 to layout.mid_half() in |step| increments.
// |mid_downscale| is the resolution divisor applied to stage-2 output.
std::vector<ProfileRow> ResolutionProfile(const FoveationModel& model,
                                          const FoveatedLayout& layout,
                                          double r1, double step,
                                          int mid_downscale = 4);

// "theta_deg,required,system" header plus one line per row.
std::string ProfileToCsv(const std::vector<ProfileRow>& rows);

}  // namespace foveapano

#endif  // FOVEAPANO_FOVEATION_H_
