#include "telepilot/kinchain.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <string>

#include "telepilot/error.hpp"

namespace telepilot {

Transform Transform::translation(double x, double y, double z) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = x;
  m(1, 3) = y;
  m(2, 3) = z;
  return Transform(m);
}

Transform Transform::inverse() const {
  const Eigen::Matrix3d rt = rotation().transpose();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rt;
  m.topRightCorner<3, 1>() = -rt * translation();
  return Transform(m);
}

double Transform::orthonormality_error() const {
  const Eigen::Matrix3d r = rotation();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(r.determinant() - 1.0);
  const double bottom = (m_.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff();
  return ortho + det + bottom;
}

AxisRemap AxisRemap::y_forward() {
  Eigen::Matrix3d m;
  // clang-format off
  m <<  0, 0, -1,
       -1, 0,  0,
        0, 1,  0;
  // clang-format on
  return AxisRemap(m);
}

CameraMount CameraMount::webot() {
  using std::numbers::pi;
  CameraMount mount;
  mount.links = {
      {0.05, 1.10, 0.0, 0.0, JointKind::Fixed},
      {0.03, 0.0, pi / 2.0, pi, JointKind::Revolute},
      {0.02, 0.0, 0.0, pi / 2.0, JointKind::Revolute},
  };
  mount.remap = AxisRemap::y_forward();
  mount.pan_joint = 0;
  mount.tilt_joint = 1;
  mount.tilt_sign = -1.0;
  return mount;
}

std::size_t CameraMount::revolute_count() const {
  std::size_t n = 0;
  for (const DhLink& link : links) n += link.joint == JointKind::Revolute ? 1 : 0;
  return n;
}

JointState CameraMount::joints(double tilt, double pan) const {
  JointState state;
  state.q.assign(revolute_count(), 0.0);
  if (pan_joint < state.q.size()) state.q[pan_joint] = pan;
  if (tilt_joint < state.q.size()) state.q[tilt_joint] = tilt_sign * tilt;
  return state;
}

Transform link_transform(const DhLink& link, double q) {
  const double theta = link.theta_offset + (link.joint == JointKind::Revolute ? q : 0.0);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double ca = std::cos(link.alpha);
  const double sa = std::sin(link.alpha);
  Eigen::Matrix4d m;
  // clang-format off
  m << ct, -st * ca,  st * sa, link.a * ct,
       st,  ct * ca, -ct * sa, link.a * st,
      0.0,       sa,       ca, link.d,
      0.0,      0.0,      0.0, 1.0;
  // clang-format on
  return Transform(m);
}

Transform chain_transform(std::span<const DhLink> chain, const JointState& joints) {
  std::size_t revolute = 0;
  for (const DhLink& link : chain) revolute += link.joint == JointKind::Revolute ? 1 : 0;
  if (joints.q.size() != revolute) {
    throw Error(ErrorCode::JointCountMismatch,
                "chain has " + std::to_string(revolute) + " revolute joints, got " +
                    std::to_string(joints.q.size()) + " angles");
  }
  Transform t;
  std::size_t next = 0;
  for (const DhLink& link : chain) {
    const double q = link.joint == JointKind::Revolute ? joints.q[next++] : 0.0;
    t = t * link_transform(link, q);
  }
  return t;
}

BaseRay camera_ray_in_base(const Transform& camera_to_base, const AxisRemap& remap,
                           const CameraRay& ray) {
  // Unit optical depth; direction.z > 0 for any ray from pixel_to_ray.
  const Eigen::Vector3d optical = ray.origin + ray.direction / ray.direction.z();
  return {camera_to_base.apply(remap.to_mount(ray.origin)),
          camera_to_base.apply(remap.to_mount(optical))};
}

GroundPoint intersect_ground(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                             double max_range) {
  if (p1.z() >= p0.z()) {
    throw Error(ErrorCode::AboveHorizon, "view ray does not descend to the floor");
  }
  const double t = -p0.z() / (p1.z() - p0.z());
  if (t <= 0.0) {
    throw Error(ErrorCode::BehindCamera, "floor intersection lies behind the camera");
  }
  const Eigen::Vector3d hit = p0 + t * (p1 - p0);
  if (std::hypot(hit.x(), hit.y()) > max_range) {
    throw Error(ErrorCode::OutOfRange, "floor point beyond the click range");
  }
  return {hit.x(), hit.y()};
}

GroundPoint pixel_to_ground(const CameraModel& model, std::span<const DhLink> chain,
                            const JointState& joints, const AxisRemap& remap, PixelPoint px,
                            double max_range) {
  const CameraRay ray = pixel_to_ray(model, px);
  const BaseRay base = camera_ray_in_base(chain_transform(chain, joints), remap, ray);
  return intersect_ground(base.p0, base.p1, max_range);
}

PixelPoint base_to_pixel(const CameraModel& model, const Transform& camera_to_base,
                         const AxisRemap& remap, const Eigen::Vector3d& p_base) {
  return project(model, remap.to_optical(camera_to_base.inverse().apply(p_base)));
}

}  // namespace telepilot
