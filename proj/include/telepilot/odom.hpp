#pragma once

#include "telepilot/rng.hpp"

namespace telepilot {

struct OdomPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Exact unicycle arc update for constant (v, w) over dt > 0.
OdomPose integrate(const OdomPose& pose, double v, double w, double dt);

/// Motion between two poses, expressed in the frame of the first.
struct PoseDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

PoseDelta delta_between(const OdomPose& from, const OdomPose& to);
OdomPose compose(const OdomPose& pose, const PoseDelta& delta);

/// Odometry error model: standard deviations proportional to the distance
/// travelled (per meter) and the angle turned (per radian).
struct OdomNoise {
  double trans_std_per_m = 0.0;
  double rot_std_per_rad = 0.0;
};

PoseDelta add_noise(const PoseDelta& delta, const OdomNoise& noise, Rng& rng);

}  // namespace telepilot
