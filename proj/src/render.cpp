#include "telepilot/simworld.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace telepilot {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kSky{150, 190, 235};
constexpr Rgb kFarGround{130, 130, 130};
constexpr Rgb kCheckerLight{205, 205, 205};
constexpr Rgb kCheckerDark{55, 55, 55};
constexpr Rgb kWall{190, 120, 70};
constexpr Rgb kOutline{220, 30, 30};

constexpr double kNearPlane = 0.01;

using Polygon = std::vector<Eigen::Vector3d>;

// Maps world points to the optical frame for one camera placement.
struct CameraPlacement {
  Eigen::Matrix3d world_to_optical;
  Eigen::Vector3d camera_in_world;

  Eigen::Vector3d to_optical(const Eigen::Vector3d& p) const {
    return world_to_optical * (p - camera_in_world);
  }
};

CameraPlacement place_camera(const SimRobot& robot, const CameraMount& mount) {
  const Transform camera_to_base =
      chain_transform(mount.links, mount.joints(robot.camera_tilt, robot.camera_pan));
  const double c = std::cos(robot.true_pose.theta);
  const double s = std::sin(robot.true_pose.theta);
  Eigen::Matrix4d base_to_world = Eigen::Matrix4d::Identity();
  base_to_world.topLeftCorner<2, 2>() << c, -s, s, c;
  base_to_world(0, 3) = robot.true_pose.x;
  base_to_world(1, 3) = robot.true_pose.y;
  const Transform camera_to_world = Transform(base_to_world) * camera_to_base;

  CameraPlacement placement;
  placement.world_to_optical = mount.remap.matrix() * camera_to_world.rotation().transpose();
  placement.camera_in_world = camera_to_world.translation();
  return placement;
}

// Half-space a.x*p.x + a.y*p.y + a.z*p.z >= 0 in the optical frame.
Polygon clip(const Polygon& poly, const Eigen::Vector3d& plane, double offset) {
  Polygon out;
  if (poly.empty()) return out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector3d& cur = poly[i];
    const Eigen::Vector3d& nxt = poly[(i + 1) % poly.size()];
    const double dc = plane.dot(cur) - offset;
    const double dn = plane.dot(nxt) - offset;
    if (dc >= 0.0) out.push_back(cur);
    if ((dc >= 0.0) != (dn >= 0.0)) out.push_back(cur + (dc / (dc - dn)) * (nxt - cur));
  }
  return out;
}

class Rasterizer {
 public:
  Rasterizer(RenderFrame& frame, const CameraModel& model, const CameraPlacement& placement)
      : frame_(frame), model_(model), placement_(placement) {
    // Frustum slightly wider than the image so the distortion polynomial is
    // only evaluated where it is well behaved.
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    const int w = model.width;
    const int h = model.height;
    auto extend = [&](double u, double v) {
      NormalizedImagePoint n{(u - model.cx) / model.fx, (v - model.cy) / model.fy};
      try {
        n = undistort(model.distortion, n);
      } catch (const std::exception&) {
        return;
      }
      xmin = std::min(xmin, n.x);
      xmax = std::max(xmax, n.x);
      ymin = std::min(ymin, n.y);
      ymax = std::max(ymax, n.y);
    };
    for (int i = 0; i <= 16; ++i) {
      const double fu = -0.5 + (w) * i / 16.0;
      const double fv = -0.5 + (h) * i / 16.0;
      extend(fu, -0.5);
      extend(fu, h - 0.5);
      extend(-0.5, fv);
      extend(w - 0.5, fv);
    }
    const double mx = 0.1 * (xmax - xmin);
    const double my = 0.1 * (ymax - ymin);
    planes_ = {
        {Eigen::Vector3d(0, 0, 1), kNearPlane},
        {Eigen::Vector3d(1, 0, -(xmin - mx)), 0.0},
        {Eigen::Vector3d(-1, 0, xmax + mx), 0.0},
        {Eigen::Vector3d(0, 1, -(ymin - my)), 0.0},
        {Eigen::Vector3d(0, -1, ymax + my), 0.0},
    };
  }

  void fill_world_polygon(const Polygon& world_poly, const Rgb& color) {
    Polygon poly;
    poly.reserve(world_poly.size());
    for (const Eigen::Vector3d& p : world_poly) poly.push_back(placement_.to_optical(p));
    for (const auto& [plane, offset] : planes_) {
      poly = clip(poly, plane, offset);
      if (poly.size() < 3) return;
    }
    std::vector<PixelPoint> px;
    px.reserve(poly.size());
    for (const Eigen::Vector3d& p : poly) px.push_back(project(model_, p));
    fill(px, color);
  }

 private:
  // Scanline fill sampling at pixel centers (integer coordinates).
  void fill(const std::vector<PixelPoint>& px, const Rgb& color) {
    double vmin = px[0].v, vmax = px[0].v;
    for (const PixelPoint& p : px) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
    }
    const int row0 = std::max(0, static_cast<int>(std::ceil(vmin)));
    const int row1 = std::min(frame_.height - 1, static_cast<int>(std::floor(vmax)));
    std::vector<double> xs;
    for (int row = row0; row <= row1; ++row) {
      xs.clear();
      const double y = row;
      for (std::size_t i = 0; i < px.size(); ++i) {
        const PixelPoint& a = px[i];
        const PixelPoint& b = px[(i + 1) % px.size()];
        if ((a.v <= y && y < b.v) || (b.v <= y && y < a.v)) {
          xs.push_back(a.u + (y - a.v) / (b.v - a.v) * (b.u - a.u));
        }
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
        const int c1 = std::min(frame_.width, static_cast<int>(std::ceil(xs[k + 1])));
        for (int col = c0; col < c1; ++col) {
          std::uint8_t* dst = &frame_.rgb[3 * (static_cast<std::size_t>(row) * frame_.width + col)];
          dst[0] = color[0];
          dst[1] = color[1];
          dst[2] = color[2];
        }
      }
    }
  }

  RenderFrame& frame_;
  const CameraModel& model_;
  const CameraPlacement& placement_;
  std::vector<std::pair<Eigen::Vector3d, double>> planes_;
};

void fill_background(RenderFrame& frame, const CameraModel& model, const CameraPlacement& placement) {
  const Eigen::Matrix3d optical_to_world = placement.world_to_optical.transpose();
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      Rgb color = kSky;
      try {
        const CameraRay ray = pixel_to_ray(model, {static_cast<double>(u), static_cast<double>(v)});
        if ((optical_to_world * ray.direction).z() < 0.0) color = kFarGround;
      } catch (const std::exception&) {
      }
      std::uint8_t* dst = &frame.rgb[3 * (static_cast<std::size_t>(v) * frame.width + u)];
      dst[0] = color[0];
      dst[1] = color[1];
      dst[2] = color[2];
    }
  }
}

Rgb shade(const Rgb& base, double intensity) {
  Rgb out;
  for (int i = 0; i < 3; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
        std::clamp(std::lround(base[static_cast<std::size_t>(i)] * intensity), 0L, 255L));
  }
  return out;
}

}  // namespace

PixelPoint world_to_pixel(const CameraModel& model, const CameraMount& mount, const SimRobot& robot,
                          const Eigen::Vector3d& p_world) {
  return project(model, place_camera(robot, mount).to_optical(p_world));
}

RenderFrame render_camera(const World& world, const SimRobot& robot, const CameraModel& model,
                          const CameraMount& mount, const RenderOptions& options) {
  RenderFrame frame;
  frame.width = model.width;
  frame.height = model.height;
  frame.rgb.assign(static_cast<std::size_t>(model.width) * model.height * 3, 0);
  frame.camera_tilt = robot.camera_tilt;
  frame.camera_pan = robot.camera_pan;
  frame.joints = mount.joints(robot.camera_tilt, robot.camera_pan);
  frame.true_pose = robot.true_pose;

  const CameraPlacement placement = place_camera(robot, mount);
  const int sub = options.subdivisions > 0 ? options.subdivisions
                                           : (model.distortion.is_zero() ? 1 : 4);
  fill_background(frame, model, placement);
  Rasterizer raster(frame, model, placement);

  // Ground checkerboard.
  const double cell = options.checker_size;
  const double cx = placement.camera_in_world.x();
  const double cy = placement.camera_in_world.y();
  const int i0 = static_cast<int>(std::floor((cx - options.ground_radius) / cell));
  const int i1 = static_cast<int>(std::ceil((cx + options.ground_radius) / cell));
  const int j0 = static_cast<int>(std::floor((cy - options.ground_radius) / cell));
  const int j1 = static_cast<int>(std::ceil((cy + options.ground_radius) / cell));
  const double piece = cell / sub;
  for (int i = i0; i < i1; ++i) {
    for (int j = j0; j < j1; ++j) {
      const double x0 = i * cell;
      const double y0 = j * cell;
      if (std::hypot(x0 + 0.5 * cell - cx, y0 + 0.5 * cell - cy) > options.ground_radius) continue;
      const Rgb& color = ((i + j) % 2 == 0) ? kCheckerLight : kCheckerDark;
      for (int a = 0; a < sub; ++a) {
        for (int b = 0; b < sub; ++b) {
          const double xa = x0 + a * piece;
          const double ya = y0 + b * piece;
          raster.fill_world_polygon({{xa, ya, 0.0}, {xa + piece, ya, 0.0},
                                     {xa + piece, ya + piece, 0.0}, {xa, ya + piece, 0.0}},
                                    color);
        }
      }
    }
  }

  // Target zone outline, drawn as thin strips on the floor.
  if (options.target) {
    const std::vector<Eigen::Vector2d> corners = options.target->corners();
    const double half = 0.5 * options.outline_width;
    for (std::size_t k = 0; k < corners.size(); ++k) {
      const Eigen::Vector2d a = corners[k];
      const Eigen::Vector2d b = corners[(k + 1) % corners.size()];
      const Eigen::Vector2d dir = (b - a).normalized();
      const Eigen::Vector2d n(-dir.y() * half, dir.x() * half);
      const Eigen::Vector2d a0 = a - dir * half;
      const Eigen::Vector2d b0 = b + dir * half;
      for (int s = 0; s < sub; ++s) {
        const Eigen::Vector2d p = a0 + (b0 - a0) * (static_cast<double>(s) / sub);
        const Eigen::Vector2d q = a0 + (b0 - a0) * (static_cast<double>(s + 1) / sub);
        raster.fill_world_polygon({{p.x() - n.x(), p.y() - n.y(), 0.0},
                                   {q.x() - n.x(), q.y() - n.y(), 0.0},
                                   {q.x() + n.x(), q.y() + n.y(), 0.0},
                                   {p.x() + n.x(), p.y() + n.y(), 0.0}},
                                  kOutline);
      }
    }
  }

  // Walls, split into short panels and painted far to near.
  struct Panel {
    Eigen::Vector2d a;
    Eigen::Vector2d b;
    double depth;
    Rgb color;
  };
  std::vector<Panel> panels;
  const Eigen::Vector2d light = Eigen::Vector2d(0.6, 0.8).normalized();
  const Eigen::Vector2d camera_xy(cx, cy);
  for (const Segment& seg : world.obstacles) {
    const double len = (seg.b - seg.a).norm();
    if (len <= 0.0) continue;
    const Eigen::Vector2d dir = (seg.b - seg.a) / len;
    const Eigen::Vector2d normal(-dir.y(), dir.x());
    const Rgb color = shade(kWall, 0.55 + 0.45 * std::abs(normal.dot(light)));
    const int n = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d a = seg.a + (seg.b - seg.a) * (static_cast<double>(k) / n);
      const Eigen::Vector2d b = seg.a + (seg.b - seg.a) * (static_cast<double>(k + 1) / n);
      panels.push_back({a, b, (0.5 * (a + b) - camera_xy).norm(), color});
    }
  }
  std::stable_sort(panels.begin(), panels.end(),
                   [](const Panel& l, const Panel& r) { return l.depth > r.depth; });
  for (const Panel& panel : panels) {
    for (int s = 0; s < sub; ++s) {
      const double z0 = options.wall_height * s / sub;
      const double z1 = options.wall_height * (s + 1) / sub;
      raster.fill_world_polygon({{panel.a.x(), panel.a.y(), z0}, {panel.b.x(), panel.b.y(), z0},
                                 {panel.b.x(), panel.b.y(), z1}, {panel.a.x(), panel.a.y(), z1}},
                                panel.color);
    }
  }
  return frame;
}

}  // namespace telepilot
