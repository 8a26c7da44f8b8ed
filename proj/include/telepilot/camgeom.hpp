#pragma once

#include <Eigen/Core>

namespace telepilot {

/// Radial (k1, k2, k3) and tangential (p1, p2) lens distortion.
struct Distortion {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  bool is_zero() const { return k1 == 0.0 && k2 == 0.0 && k3 == 0.0 && p1 == 0.0 && p2 == 0.0; }
};

/// Pixel coordinates, origin at the top-left pixel center, u right, v down.
struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Point on the unit-depth plane of the optical frame (+Z forward).
struct NormalizedImagePoint {
  double x = 0.0;
  double y = 0.0;
};

struct CameraRay {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

struct CameraModel {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  Distortion distortion;
  int width = 640;
  int height = 480;

  /// Throws Error(InvalidConfig) when the intrinsics are unusable.
  void validate() const;
  bool contains(PixelPoint px) const;
};

// Rays further off-axis than this on the unit-depth plane are rejected.
inline constexpr double kMaxNormalizedCoordinate = 10.0;

NormalizedImagePoint distort(const Distortion& coeffs, NormalizedImagePoint p);

/// Inverts `distort` by fixed-point iteration.
///
/// Starts from the distorted point and iterates
///   p <- (p_d - tangential(p)) / radial_factor(p)
/// until the forward residual drops below `tolerance` (max-norm).
/// Throws Error(NoConvergence) after `max_iterations` or on a non-finite
/// iterate.
NormalizedImagePoint undistort(const Distortion& coeffs, NormalizedImagePoint p_distorted,
                               double tolerance = 1e-10, int max_iterations = 50);

/// Camera-frame point (meters, +Z forward) to pixel. The result may lie
/// outside the image; callers clip. Throws Error(PointBehindCamera) when
/// point.z <= 1e-9.
PixelPoint project(const CameraModel& model, const Eigen::Vector3d& point);

/// Unit view ray through a pixel. Throws Error(OutOfFrame) for pixels
/// outside the image and propagates NoConvergence from `undistort`.
CameraRay pixel_to_ray(const CameraModel& model, PixelPoint px);

}  // namespace telepilot
