#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "support.hpp"
#include "telepilot/kinchain.hpp"
#include "telepilot/rng.hpp"

using namespace telepilot;
using telepilot::testing::error_code;
using std::numbers::pi;

namespace {

// DH matrix written entry by entry from Rz(theta) Tz(d) Tx(a) Rx(alpha).
Eigen::Matrix4d dh_reference(double a, double d, double alpha, double theta) {
  const Eigen::Affine3d t = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()) *
                            Eigen::Translation3d(0, 0, d) * Eigen::Translation3d(a, 0, 0) *
                            Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitX());
  return t.matrix();
}

// Camera pose of the default head built as a scene graph rather than from
// DH parameters: a mast to (0.05, 0, 1.10), yaw by pan, a 0.03 m arm
// back to the tilt pivot, pitch down by -tilt, then a 0.02 m riser to the
// optical center. The optical frame looks along the head's +x with image
// right = -y and image down = -z.
struct SceneCamera {
  Eigen::Vector3d position;
  Eigen::Matrix3d optical_to_base;  // columns: image right, image down, forward
};

SceneCamera scene_graph_camera(double tilt, double pan) {
  const Eigen::Matrix3d yaw = Eigen::AngleAxisd(pan, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d pitch = Eigen::AngleAxisd(-tilt, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d head = yaw * pitch;
  SceneCamera cam;
  cam.position = Eigen::Vector3d(0.05, 0.0, 1.10) + yaw * Eigen::Vector3d(-0.03, 0.0, 0.0) +
                 head * Eigen::Vector3d(0.0, 0.0, 0.02);
  cam.optical_to_base.col(0) = head * Eigen::Vector3d(0, -1, 0);
  cam.optical_to_base.col(1) = head * Eigen::Vector3d(0, 0, -1);
  cam.optical_to_base.col(2) = head * Eigen::Vector3d(1, 0, 0);
  return cam;
}

}  // namespace

TEST_CASE("link_transform examples") {
  SUBCASE("fixed link is a pure translation") {
    const Transform t = link_transform({0.1, 0.5, 0.0, 0.0, JointKind::Fixed}, 0.0);
    CHECK(t.rotation().isIdentity(0.0));
    CHECK(t.translation().isApprox(Eigen::Vector3d(0.1, 0.0, 0.5), 0.0));
  }
  SUBCASE("revolute quarter turn about z") {
    const Transform t = link_transform({0.0, 0.0, 0.0, 0.0, JointKind::Revolute}, pi / 2);
    Eigen::Matrix3d expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((t.rotation() - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(t.translation().norm() == 0.0);
  }
  SUBCASE("general link matches the reference formula") {
    const Transform t = link_transform({0.05, 0.0, pi / 2, 0.0, JointKind::Revolute}, 0.3);
    CHECK((t.matrix() - dh_reference(0.05, 0.0, pi / 2, 0.3)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("fixed links ignore q") {
    const DhLink link{0.2, 0.1, 0.4, 0.3, JointKind::Fixed};
    CHECK(link_transform(link, 1.0).matrix() == link_transform(link, 0.0).matrix());
  }
}

TEST_CASE("property: link_transform agrees with the reference for random links") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const DhLink link{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-pi, pi), rng.uniform(-pi, pi),
                      JointKind::Revolute};
    const double q = rng.uniform(-pi, pi);
    const Eigen::Matrix4d ref = dh_reference(link.a, link.d, link.alpha, link.theta_offset + q);
    CHECK((link_transform(link, q).matrix() - ref).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("chain_transform examples") {
  SUBCASE("empty chain is the identity") {
    CHECK(chain_transform({}, {}).matrix().isIdentity(0.0));
  }
  SUBCASE("pure translations commute") {
    // x and z offsets as DH links; y has no single-link form, so it is
    // checked through Transform::translation.
    const std::vector<DhLink> xz = {{1, 0, 0, 0, JointKind::Fixed}, {0, 2, 0, 0, JointKind::Fixed}};
    const std::vector<DhLink> zx = {{0, 2, 0, 0, JointKind::Fixed}, {1, 0, 0, 0, JointKind::Fixed}};
    CHECK(chain_transform(xz, {}).translation().isApprox(chain_transform(zx, {}).translation(), 0.0));
    const Transform x = Transform::translation(1, 0, 0);
    const Transform y = Transform::translation(0, 1, 0);
    CHECK((x * y).translation().isApprox((y * x).translation(), 0.0));
  }
  SUBCASE("joint count mismatch") {
    const CameraMount mount = CameraMount::webot();
    CHECK(error_code([&] { chain_transform(mount.links, JointState{{0.0}}); }) ==
          ErrorCode::JointCountMismatch);
    CHECK(error_code([&] { chain_transform(mount.links, JointState{{0.0, 0.0, 0.0}}); }) ==
          ErrorCode::JointCountMismatch);
  }
}

TEST_CASE("default head at zero angles equals the hand-multiplied product") {
  // Link matrices at q = 0 with the default parameters, evaluated by hand:
  //   A1: a = 0.05, d = 1.10
  //   A2: a = 0.03, alpha = pi/2, theta = pi
  //   A3: a = 0.02, theta = pi/2
  Eigen::Matrix4d a1;
  a1 << 1, 0, 0, 0.05,
        0, 1, 0, 0,
        0, 0, 1, 1.10,
        0, 0, 0, 1;
  Eigen::Matrix4d a2;
  a2 << -1, 0, 0, -0.03,
         0, 0, 1, 0,
         0, 1, 0, 0,
         0, 0, 0, 1;
  Eigen::Matrix4d a3;
  a3 << 0, -1, 0, 0,
        1,  0, 0, 0.02,
        0,  0, 1, 0,
        0,  0, 0, 1;
  Eigen::Matrix4d expected;
  expected << 0, 1, 0, 0.02,
              0, 0, 1, 0,
              1, 0, 0, 1.12,
              0, 0, 0, 1;
  CHECK((a1 * a2 * a3 - expected).cwiseAbs().maxCoeff() < 1e-15);

  const CameraMount mount = CameraMount::webot();
  const Transform t = chain_transform(mount.links, mount.joints(0.0, 0.0));
  CHECK((t.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("property: chain transforms stay orthonormal") {
  Rng rng(4);
  const CameraMount mount = CameraMount::webot();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const JointState q{{rng.uniform(-pi, pi), rng.uniform(-pi, pi)}};
    const Transform t = chain_transform(mount.links, q);
    worst = std::max(worst, t.orthonormality_error());
    CHECK(t.matrix().row(3) == Eigen::RowVector4d(0, 0, 0, 1));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("axis remap") {
  const AxisRemap r = AxisRemap::y_forward();
  Eigen::Matrix3d expected;
  expected << 0, 0, -1, -1, 0, 0, 0, 1, 0;
  CHECK(r.matrix() == expected);
  CHECK(r.to_optical({1, 2, 3}).isApprox(Eigen::Vector3d(-3, -1, 2), 0.0));
  CHECK(r.to_mount(r.to_optical({0.3, -0.7, 1.1})).isApprox(Eigen::Vector3d(0.3, -0.7, 1.1), 1e-15));
  CHECK(r.matrix().determinant() == doctest::Approx(1.0));
  CHECK((r.matrix() * r.matrix().transpose()).isIdentity(0.0));
}

TEST_CASE("camera_ray_in_base examples") {
  SUBCASE("identity transform") {
    const BaseRay r = camera_ray_in_base(Transform(), AxisRemap::identity(), CameraRay{});
    CHECK(r.p0.isZero(0.0));
    CHECK(r.p1.isApprox(Eigen::Vector3d(0, 0, 1), 0.0));
  }
  SUBCASE("translated camera") {
    const BaseRay r = camera_ray_in_base(Transform::translation(0, 0, 1.2), AxisRemap::identity(), CameraRay{});
    CHECK(r.p0.isApprox(Eigen::Vector3d(0, 0, 1.2), 0.0));
  }
  SUBCASE("default head at tilt -0.6, principal pixel, against a scene graph") {
    const CameraModel model;
    const CameraMount mount = CameraMount::webot();
    const Transform t = chain_transform(mount.links, mount.joints(-0.6, 0.0));
    const BaseRay r = camera_ray_in_base(t, mount.remap, pixel_to_ray(model, {model.cx, model.cy}));
    const SceneCamera cam = scene_graph_camera(-0.6, 0.0);
    CHECK((r.p0 - cam.position).norm() < 1e-12);
    CHECK((r.p1 - (cam.position + cam.optical_to_base.col(2))).norm() < 1e-12);
    // Looking 0.6 rad below the horizon.
    const Eigen::Vector3d dir = r.p1 - r.p0;
    CHECK(std::atan2(-dir.z(), dir.x()) == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("property: chain agrees with the scene graph for random pixels and angles") {
  Rng rng(8);
  const CameraModel model;
  const CameraMount mount = CameraMount::webot();
  for (int i = 0; i < 200; ++i) {
    const double tilt = rng.uniform(-1.2, 0.4);
    const double pan = rng.uniform(-pi, pi);
    const PixelPoint px{rng.uniform(0, 640), rng.uniform(0, 480)};
    const Transform t = chain_transform(mount.links, mount.joints(tilt, pan));
    const CameraRay ray = pixel_to_ray(model, px);
    const BaseRay r = camera_ray_in_base(t, mount.remap, ray);
    const SceneCamera cam = scene_graph_camera(tilt, pan);
    const Eigen::Vector3d p1 = cam.position + cam.optical_to_base * (ray.direction / ray.direction.z());
    CHECK((r.p0 - cam.position).norm() < 1e-12);
    CHECK((r.p1 - p1).norm() < 1e-12);
  }
}

TEST_CASE("intersect_ground examples") {
  SUBCASE("45 degree ray from 1 m") {
    const GroundPoint g = intersect_ground({0, 0, 1}, {0, 1, 0});
    CHECK(g.x == doctest::Approx(0.0));
    CHECK(g.y == doctest::Approx(1.0));
  }
  SUBCASE("level ray") {
    CHECK(error_code([] { intersect_ground({0, 0, 1}, {0, 1, 1}); }) == ErrorCode::AboveHorizon);
    CHECK(error_code([] { intersect_ground({0, 0, 1}, {0, 1, 1.5}); }) == ErrorCode::AboveHorizon);
  }
  SUBCASE("general ray") {
    const Eigen::Vector3d p0(0, 0, 1.2);
    const Eigen::Vector3d p1(0.1, 0.9, 0.8);
    const GroundPoint g = intersect_ground(p0, p1);
    CHECK(g.x == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(g.y == doctest::Approx(2.7).epsilon(1e-14));
    // Parametric sampling: the height along the line changes sign exactly
    // once, between the samples bracketing t = 3.
    double t_lo = 0.0;
    for (double t = 0.0; t <= 10.0; t += 1e-3) {
      const Eigen::Vector3d p = p0 + t * (p1 - p0);
      if (p.z() <= 0.0) break;
      t_lo = t;
    }
    CHECK(t_lo == doctest::Approx(3.0).epsilon(1e-3));
    const Eigen::Vector3d hit = p0 + t_lo * (p1 - p0);
    CHECK(std::hypot(hit.x() - g.x, hit.y() - g.y) < 2e-3);
  }
  SUBCASE("camera below the floor") {
    CHECK(error_code([] { intersect_ground({0, 0, -1}, {1, 0, -2}); }) == ErrorCode::BehindCamera);
  }
  SUBCASE("out of range") {
    CHECK(error_code([] { intersect_ground({0, 0, 1}, {1, 0, 0.99}); }) == ErrorCode::OutOfRange);
    CHECK_FALSE(error_code([] { intersect_ground({0, 0, 1}, {1, 0, 0.89}); }));
  }
}

TEST_CASE("property: ground hits lie on the floor") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p0(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 2.0));
    const Eigen::Vector3d p1 = p0 + Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), -rng.uniform(0.2, 1));
    const GroundPoint g = intersect_ground(p0, p1, 1e9);
    const double t = -p0.z() / (p1.z() - p0.z());
    const Eigen::Vector3d hit = p0 + t * (p1 - p0);
    CHECK(std::abs(hit.z()) < 1e-9);
    CHECK(std::hypot(hit.x() - g.x, hit.y() - g.y) < 1e-12);
  }
}

TEST_CASE("pixel_to_ground examples") {
  const CameraModel model;
  SUBCASE("camera at 1 m tilted 45 degrees down") {
    // Mast of 1 m whose twist turns the mount's +Y (the optical axis)
    // horizontal, then a joint offset pitching it 45 deg down.
    const std::vector<DhLink> links = {
        {0.0, 1.0, -pi / 2, 0.0, JointKind::Fixed},
        {0.0, 0.0, 0.0, -pi / 4, JointKind::Revolute},
    };
    const JointState q{{0.0}};
    const Eigen::Vector3d forward = chain_transform(links, q).rotation().col(1);
    REQUIRE(forward.isApprox(Eigen::Vector3d(std::sqrt(0.5), 0.0, -std::sqrt(0.5)), 1e-15));
    const GroundPoint g = pixel_to_ground(model, links, q, AxisRemap::y_forward(), {model.cx, model.cy});
    CHECK(g.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.y) < 1e-12);
  }
  SUBCASE("level camera sees the horizon at the principal point") {
    const CameraMount mount = CameraMount::webot();
    CHECK(error_code([&] {
            pixel_to_ground(model, mount.links, mount.joints(0.0, 0.0), mount.remap, {model.cx, model.cy});
          }) == ErrorCode::AboveHorizon);
  }
  SUBCASE("clicks outside the frame") {
    const CameraMount mount = CameraMount::webot();
    CHECK(error_code([&] {
            pixel_to_ground(model, mount.links, mount.joints(-0.5, 0.0), mount.remap, {700.0, 300.0});
          }) == ErrorCode::OutOfFrame);
  }
}

TEST_CASE("property: forward projection then pixel_to_ground is the identity") {
  const CameraMount mount = CameraMount::webot();
  for (const bool distorted : {false, true}) {
    CAPTURE(distorted);
    CameraModel model;
    if (distorted) model.distortion = {-0.2, 0.03, 0.002, 0.004, -0.003};
    Rng rng(distorted ? 31 : 30);
    double worst = 0.0;
    int used = 0;
    while (used < 100) {
      const double tilt = rng.uniform(-1.0, -0.3);
      const double pan = rng.uniform(-0.8, 0.8);
      const JointState q = mount.joints(tilt, pan);
      const Transform t = chain_transform(mount.links, q);
      const double range = rng.uniform(0.5, 5.0);
      const double bearing = pan + rng.uniform(-0.6, 0.6);
      const Eigen::Vector3d ground(range * std::cos(bearing), range * std::sin(bearing), 0.0);
      PixelPoint px;
      try {
        px = base_to_pixel(model, t, mount.remap, ground);
      } catch (const Error&) {
        continue;
      }
      if (!model.contains(px)) continue;
      ++used;
      const GroundPoint g = pixel_to_ground(model, mount.links, q, mount.remap, px);
      worst = std::max(worst, std::hypot(g.x - ground.x(), g.y - ground.y()));
    }
    CHECK(worst < (distorted ? 1e-4 : 1e-6));
  }
}

TEST_CASE("property: lower pixel rows hit the floor closer") {
  const CameraModel model;
  const CameraMount mount = CameraMount::webot();
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const JointState q = mount.joints(rng.uniform(-1.0, -0.4), rng.uniform(-0.5, 0.5));
    const double u = rng.uniform(50, 590);
    double previous = std::numeric_limits<double>::infinity();
    for (int v = 0; v < model.height; v += 4) {
      GroundPoint g;
      try {
        g = pixel_to_ground(model, mount.links, q, mount.remap, {u, static_cast<double>(v)}, 1e6);
      } catch (const Error&) {
        continue;
      }
      const double range = std::hypot(g.x, g.y);
      CHECK(range < previous);
      previous = range;
    }
  }
}
