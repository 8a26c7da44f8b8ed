#include "telepilot/camgeom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "telepilot/error.hpp"

namespace telepilot {

void CameraModel::validate() const {
  const bool finite = std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
                      std::isfinite(cy);
  if (!finite || fx <= 0.0 || fy <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "camera focal lengths must be positive and finite");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidConfig, "camera image size must be positive");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error(ErrorCode::InvalidConfig, "principal point outside the image");
  }
}

bool CameraModel::contains(PixelPoint px) const {
  return px.u >= 0.0 && px.u < width && px.v >= 0.0 && px.v < height;
}

namespace {

double radial_factor(const Distortion& c, double r2) {
  return 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
}

Eigen::Vector2d tangential(const Distortion& c, double x, double y, double r2) {
  return {2.0 * c.p1 * x * y + c.p2 * (r2 + 2.0 * x * x),
          c.p1 * (r2 + 2.0 * y * y) + 2.0 * c.p2 * x * y};
}

}  // namespace

NormalizedImagePoint distort(const Distortion& coeffs, NormalizedImagePoint p) {
  const double r2 = p.x * p.x + p.y * p.y;
  const double radial = radial_factor(coeffs, r2);
  const Eigen::Vector2d t = tangential(coeffs, p.x, p.y, r2);
  return {p.x * radial + t.x(), p.y * radial + t.y()};
}

NormalizedImagePoint undistort(const Distortion& coeffs, NormalizedImagePoint p_distorted,
                               double tolerance, int max_iterations) {
  if (coeffs.is_zero()) return p_distorted;

  NormalizedImagePoint p = p_distorted;
  for (int i = 0; i <= max_iterations; ++i) {
    const NormalizedImagePoint forward = distort(coeffs, p);
    const double residual =
        std::max(std::abs(forward.x - p_distorted.x), std::abs(forward.y - p_distorted.y));
    if (!std::isfinite(residual)) break;
    if (residual < tolerance) return p;
    if (i == max_iterations) break;

    const double r2 = p.x * p.x + p.y * p.y;
    const double radial = radial_factor(coeffs, r2);
    if (radial <= 0.0) break;
    const Eigen::Vector2d t = tangential(coeffs, p.x, p.y, r2);
    p = {(p_distorted.x - t.x()) / radial, (p_distorted.y - t.y()) / radial};
  }
  throw Error(ErrorCode::NoConvergence, "lens distortion inversion did not converge");
}

PixelPoint project(const CameraModel& model, const Eigen::Vector3d& point) {
  if (!(point.z() > 1e-9)) {
    throw Error(ErrorCode::PointBehindCamera, "point is not in front of the camera");
  }
  const NormalizedImagePoint ideal{point.x() / point.z(), point.y() / point.z()};
  const NormalizedImagePoint real = distort(model.distortion, ideal);
  return {model.fx * real.x + model.cx, model.fy * real.y + model.cy};
}

CameraRay pixel_to_ray(const CameraModel& model, PixelPoint px) {
  if (!model.contains(px)) {
    throw Error(ErrorCode::OutOfFrame, "pixel (" + std::to_string(px.u) + ", " +
                                           std::to_string(px.v) + ") is outside the frame");
  }
  const NormalizedImagePoint distorted{(px.u - model.cx) / model.fx, (px.v - model.cy) / model.fy};
  const NormalizedImagePoint ideal = undistort(model.distortion, distorted);
  if (std::abs(ideal.x) >= kMaxNormalizedCoordinate ||
      std::abs(ideal.y) >= kMaxNormalizedCoordinate) {
    throw Error(ErrorCode::NoConvergence, "view ray too far off the optical axis");
  }
  CameraRay ray;
  ray.direction = Eigen::Vector3d(ideal.x, ideal.y, 1.0).normalized();
  return ray;
}

}  // namespace telepilot
