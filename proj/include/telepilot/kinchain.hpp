#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "telepilot/camgeom.hpp"

namespace telepilot {

enum class JointKind { Fixed, Revolute };

/// One Denavit-Hartenberg link: Rz(theta) * Tz(d) * Tx(a) * Rx(alpha),
/// with theta = theta_offset + q for revolute links.
struct DhLink {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double theta_offset = 0.0;
  JointKind joint = JointKind::Fixed;
};

/// Joint angles, one per revolute link in chain order.
struct JointState {
  std::vector<double> q;
};

/// Rigid homogeneous transform.
class Transform {
 public:
  Transform() : m_(Eigen::Matrix4d::Identity()) {}
  explicit Transform(const Eigen::Matrix4d& m) : m_(m) {}

  static Transform translation(double x, double y, double z);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  Transform operator*(const Transform& rhs) const { return Transform(m_ * rhs.m_); }
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation() * p + translation(); }
  Transform inverse() const;

  /// max |R^T R - I| plus |det R - 1| plus bottom-row deviation.
  double orthonormality_error() const;

 private:
  Eigen::Matrix4d m_;
};

/// Fixed rotation from the chain's terminal frame to the optical frame.
class AxisRemap {
 public:
  AxisRemap() : m_(Eigen::Matrix3d::Identity()) {}

  static AxisRemap identity() { return AxisRemap(); }

  /// Optical axis along the mount frame's +Y: a mount-frame point
  /// (X, Y, Z) maps to optical coordinates (-Z, -X, Y).
  static AxisRemap y_forward();

  const Eigen::Matrix3d& matrix() const { return m_; }
  Eigen::Vector3d to_optical(const Eigen::Vector3d& mount) const { return m_ * mount; }
  Eigen::Vector3d to_mount(const Eigen::Vector3d& optical) const { return m_.transpose() * optical; }

 private:
  explicit AxisRemap(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

/// Destination on the floor, robot-base frame.
struct GroundPoint {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kMaxClickRange = 10.0;

/// Kinematic description of a pan/tilt camera head.
///
/// The chain is generic; `pan_joint` and `tilt_joint` index into the
/// JointState, and `tilt_sign` maps the operator-facing tilt (negative
/// looks down) onto the joint's rotation sense.
struct CameraMount {
  std::vector<DhLink> links;
  AxisRemap remap = AxisRemap::y_forward();
  std::size_t pan_joint = 0;
  std::size_t tilt_joint = 1;
  double tilt_sign = -1.0;

  /// Three-link head: fixed mast, pan about the vertical, tilt about the
  /// horizontal. Zero pan and tilt give a level camera looking along +X.
  static CameraMount webot();

  std::size_t revolute_count() const;
  JointState joints(double tilt, double pan) const;
};

Transform link_transform(const DhLink& link, double q);

/// Ordered product of link transforms. Throws Error(JointCountMismatch).
Transform chain_transform(std::span<const DhLink> chain, const JointState& joints);

/// Two points of the view ray in the base frame: the optical center and
/// the point at unit optical depth.
struct BaseRay {
  Eigen::Vector3d p0;
  Eigen::Vector3d p1;
};

BaseRay camera_ray_in_base(const Transform& camera_to_base, const AxisRemap& remap,
                           const CameraRay& ray);

/// Intersects P(t) = p0 + t (p1 - p0) with Z = 0.
///
/// Throws AboveHorizon when the ray is level or rising, BehindCamera when
/// the hit is at t <= 0 and OutOfRange beyond `max_range` from the base
/// origin.
GroundPoint intersect_ground(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                             double max_range = kMaxClickRange);

GroundPoint pixel_to_ground(const CameraModel& model, std::span<const DhLink> chain,
                            const JointState& joints, const AxisRemap& remap, PixelPoint px,
                            double max_range = kMaxClickRange);

/// Forward model: base-frame point to pixel through the same chain.
PixelPoint base_to_pixel(const CameraModel& model, const Transform& camera_to_base,
                         const AxisRemap& remap, const Eigen::Vector3d& p_base);

}  // namespace telepilot
