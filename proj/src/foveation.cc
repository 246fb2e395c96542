#include "foveation.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "errors.h"

namespace foveapano {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

void FoveationModel::Validate() const {
  Require(std::isfinite(beta) && beta > 0.0, ErrorCode::kDomain,
          "beta must be positive");
}

FoveatedLayout::FoveatedLayout() : center_fov(InputFov(0.5, 90.0)) {}

void FoveatedLayout::Validate() const {
  Require(center_fov > 0.0 && center_fov < near_fov && near_fov < mid_fov &&
              mid_fov <= 180.0,
          ErrorCode::kDomain,
          "layout requires 0 < center_fov < near_fov < mid_fov <= 180");
}

double RelativeResolution(const FoveationModel& model, double theta) {
  model.Validate();
  Require(theta >= 0.0, ErrorCode::kDomain, "theta must be non-negative");
  return model.beta / (model.beta + theta);
}

double RequiredResolution(const FoveationModel& model, double theta1,
                          double theta2, double r1) {
  model.Validate();
  Require(theta1 >= 0.0, ErrorCode::kDomain, "theta1 must be non-negative");
  Require(theta2 >= theta1, ErrorCode::kDomain, "theta2 must be >= theta1");
  Require(r1 > 0.0, ErrorCode::kDomain, "r1 must be positive");
  return model.beta / (model.beta + (theta2 - theta1)) * r1;
}

ResolutionRequirement ComputeRequirement(const FoveationModel& model,
                                         double theta1, double theta2,
                                         double r1) {
  return {theta1, theta2, r1, RequiredResolution(model, theta1, theta2, r1)};
}

double InputFov(double linear_ratio, double alpha_prime) {
  Require(linear_ratio > 0.0 && linear_ratio <= 1.0, ErrorCode::kDomain,
          "linear ratio must lie in (0,1]");
  Require(alpha_prime > 0.0 && alpha_prime < 180.0, ErrorCode::kDomain,
          "target FoV must lie in (0,180)");
  return 2.0 * std::atan(linear_ratio * std::tan(alpha_prime / 2.0 * kDegToRad)) /
         kDegToRad;
}

double LinearRatio(double alpha, double alpha_prime) {
  Require(alpha > 0.0 && alpha <= alpha_prime && alpha_prime < 180.0,
          ErrorCode::kDomain, "requires 0 < alpha <= alpha_prime < 180");
  return std::tan(alpha / 2.0 * kDegToRad) /
         std::tan(alpha_prime / 2.0 * kDegToRad);
}

ExtensionGeometry MakeExtensionGeometry(double linear_ratio,
                                        double alpha_prime) {
  return {linear_ratio, InputFov(linear_ratio, alpha_prime), alpha_prime};
}

std::vector<ProfileRow> ResolutionProfile(const FoveationModel& model,
                                          const FoveatedLayout& layout,
                                          double r1, double step,
                                          int mid_downscale) {
  model.Validate();
  layout.Validate();
  Require(step > 0.0, ErrorCode::kDomain, "step must be positive");
  Require(r1 > 0.0, ErrorCode::kDomain, "r1 must be positive");
  Require(mid_downscale >= 1, ErrorCode::kDomain,
          "mid_downscale must be >= 1");

  const double theta1 = layout.center_half();
  const double end = layout.mid_half();
  std::vector<ProfileRow> rows;
  for (long k = 0;; ++k) {
    double theta = k * step;
    if (theta > end + 1e-9) break;
    if (theta > end) theta = end;
    ProfileRow row;
    row.theta = theta;
    // Inside the original image the source resolution itself is required.
    row.required = theta <= theta1
                       ? r1
                       : RequiredResolution(model, theta1, theta, r1);
    // Stage 1 keeps the input resolution out to the near band edge; stage 2
    // output is downscaled for the mid band.
    row.system = theta < layout.near_half() ? r1 : r1 / mid_downscale;
    rows.push_back(row);
  }
  return rows;
}

std::string ProfileToCsv(const std::vector<ProfileRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "theta_deg,required,system\n";
  for (const auto& row : rows) {
    out << row.theta << ',' << row.required << ',' << row.system << '\n';
  }
  return out.str();
}

}  // namespace foveapano
