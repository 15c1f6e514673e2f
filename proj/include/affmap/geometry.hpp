#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "affmap/core.hpp"

namespace affmap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  void validate() const {
    if (fx <= 0 || fy <= 0) fail(errc::invalid_spec, "focal lengths must be positive");
    if (cx < 0 || cx >= width || cy < 0 || cy >= height)
      fail(errc::invalid_spec, "principal point outside image");
  }

  double diagonal() const { return std::hypot(static_cast<double>(width), height); }
  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0 && pixel.x() < width && pixel.y() >= 0 && pixel.y() < height;
  }
};

// Rigid transform stored in world-from-camera convention:
//   X_world = rotation * X_camera + translation.
// Camera-from-world is derived on demand via inverse().
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose from_quaternion(double qw, double qx, double qy, double qz, const Vec3& t) {
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() == 0) fail(errc::invalid_spec, "zero quaternion");
    Pose p;
    p.rotation = q.normalized().toRotationMatrix();
    p.translation = t;
    return p;
  }

  // Re-orthonormalizes via the nearest unit quaternion. SfM exports carry
  // rounding noise; `deviation` reports ||R Rt - I||_inf of the input.
  static Pose from_matrix(const Mat3& r, const Vec3& t, double* deviation = nullptr) {
    if (deviation) *deviation = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    Eigen::Quaterniond q(r);
    Pose p;
    p.rotation = q.normalized().toRotationMatrix();
    p.translation = t;
    if (p.rotation.determinant() < 0) fail(errc::invalid_spec, "rotation has negative determinant");
    return p;
  }

  Vec3 to_world(const Vec3& camera_point) const { return rotation * camera_point + translation; }
  Vec3 to_camera(const Vec3& world_point) const {
    return rotation.transpose() * (world_point - translation);
  }

  Pose inverse() const {
    Pose p;
    p.rotation = rotation.transpose();
    p.translation = -(rotation.transpose() * translation);
    return p;
  }

  bool is_orthonormal(double tol = 1e-9) const {
    return (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

inline Pose compose(const Pose& a, const Pose& b) {
  Pose p;
  p.rotation = a.rotation * b.rotation;
  p.translation = a.rotation * b.translation + a.translation;
  return p;
}

struct SparseDepth {
  Vec2 pixel;      // continuous pixel coordinates
  double depth_m;  // metric depth from SfM
};

// Dense network depth (up to scale) plus the SfM depths visible in the frame.
struct DepthFrame {
  Image<float> dense;
  std::vector<SparseDepth> sparse;
};

struct ScaleFactor {
  double value = 1.0;
};

struct PixelDepth {
  Vec2 pixel;
  double depth;
};

inline PixelDepth project(const Vec3& point_world, const Pose& pose, const CameraIntrinsics& k) {
  Vec3 c = pose.to_camera(point_world);
  if (c.z() <= 0) fail(errc::behind_camera, "camera-frame z <= 0");
  return {Vec2(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy), c.z()};
}

inline Vec3 unproject(const Vec2& pixel, double depth, const Pose& pose,
                      const CameraIntrinsics& k) {
  if (!(depth > 0)) fail(errc::non_positive_depth, "depth must be positive");
  Vec3 c((pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth, depth);
  return pose.to_world(c);
}

// Even-length lists take the mean of the two central values.
inline double median(std::vector<double> v) {
  if (v.empty()) fail(errc::domain_error, "median of empty list");
  std::sort(v.begin(), v.end());
  size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return (v[mid - 1] + v[mid]) / 2.0;
}

// Nearest-pixel sample; geometry elsewhere stays sub-pixel.
inline double depth_at(const Image<float>& dense, const Vec2& pixel) {
  int x = static_cast<int>(std::lround(pixel.x()));
  int y = static_cast<int>(std::lround(pixel.y()));
  if (!dense.in_bounds(y, x)) fail(errc::invalid_depth, "pixel outside depth image");
  return dense.at(y, x);
}

enum class ScaleMethod {
  ratio_of_medians,  // median(metric) / median(network)
  median_of_ratios,  // median(metric_i / network_i)
};

inline ScaleFactor scale_correction(const DepthFrame& frame,
                                    ScaleMethod method = ScaleMethod::ratio_of_medians) {
  if (frame.sparse.empty()) fail(errc::empty_sparse_set, "no SfM depths in frame");
  std::vector<double> metric, network;
  metric.reserve(frame.sparse.size());
  network.reserve(frame.sparse.size());
  for (const SparseDepth& s : frame.sparse) {
    metric.push_back(s.depth_m);
    network.push_back(depth_at(frame.dense, s.pixel));
  }
  if (method == ScaleMethod::median_of_ratios) {
    std::vector<double> ratios;
    ratios.reserve(metric.size());
    for (size_t i = 0; i < metric.size(); ++i) {
      if (network[i] <= 0) fail(errc::zero_median, "network depth <= 0 at SfM pixel");
      ratios.push_back(metric[i] / network[i]);
    }
    double m = median(std::move(ratios));
    if (m <= 0 || !std::isfinite(m)) fail(errc::zero_median, "nonpositive scale");
    return {m};
  }
  double med_metric = median(std::move(metric));
  double med_network = median(std::move(network));
  if (med_metric <= 0 || med_network <= 0) fail(errc::zero_median, "nonpositive median depth");
  double scale = med_metric / med_network;
  if (!std::isfinite(scale)) fail(errc::zero_median, "degenerate scale");
  return {scale};
}

// Everything known about one frame: calibration, pose, depth and the
// per-frame scale factor aligning network depth to metric depth.
struct FrameContext {
  std::int64_t frame_id = 0;
  CameraIntrinsics intrinsics;
  Pose pose;  // world-from-camera
  DepthFrame depth;
  ScaleFactor scale;
};

// Metric depth at a pixel of the frame, or a non-positive value passed through
// for the caller to reject.
inline double metric_depth_at(const FrameContext& ctx, const Vec2& pixel) {
  return ctx.scale.value * depth_at(ctx.depth.dense, pixel);
}

}  // namespace affmap
