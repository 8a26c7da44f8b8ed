#include "telepilot/odom.hpp"

#include <cmath>
#include <numbers>

namespace telepilot {

double wrap_angle(double angle) {
  using std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * pi);  // [-pi, pi]
  if (wrapped <= -pi) wrapped += 2.0 * pi;
  return wrapped;
}

OdomPose integrate(const OdomPose& pose, double v, double w, double dt) {
  OdomPose next = pose;
  if (std::abs(w) < 1e-9) {
    next.x += v * dt * std::cos(pose.theta);
    next.y += v * dt * std::sin(pose.theta);
  } else {
    const double radius = v / w;
    const double heading = pose.theta + w * dt;
    next.x += radius * (std::sin(heading) - std::sin(pose.theta));
    next.y += radius * (std::cos(pose.theta) - std::cos(heading));
  }
  next.theta = wrap_angle(pose.theta + w * dt);
  return next;
}

PoseDelta delta_between(const OdomPose& from, const OdomPose& to) {
  const double c = std::cos(from.theta);
  const double s = std::sin(from.theta);
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(to.theta - from.theta)};
}

OdomPose compose(const OdomPose& pose, const PoseDelta& delta) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * delta.dx - s * delta.dy, pose.y + s * delta.dx + c * delta.dy,
          wrap_angle(pose.theta + delta.dtheta)};
}

PoseDelta add_noise(const PoseDelta& delta, const OdomNoise& noise, Rng& rng) {
  PoseDelta noisy = delta;
  const double distance = std::hypot(delta.dx, delta.dy);
  if (noise.trans_std_per_m > 0.0 && distance > 0.0) {
    const double scale = 1.0 + rng.normal(0.0, noise.trans_std_per_m * distance) / distance;
    noisy.dx *= scale;
    noisy.dy *= scale;
  }
  if (noise.rot_std_per_rad > 0.0 && delta.dtheta != 0.0) {
    noisy.dtheta += rng.normal(0.0, noise.rot_std_per_rad * std::abs(delta.dtheta));
  }
  return noisy;
}

}  // namespace telepilot
