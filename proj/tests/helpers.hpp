#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "affmap/geometry.hpp"
#include "affmap/multilabel.hpp"

namespace test_helpers {

using affmap::CameraIntrinsics;
using affmap::Pose;
using affmap::Vec2;
using affmap::Vec3;

inline Pose random_pose(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  while (q.norm() < 1e-6) q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng));
  Pose p;
  p.rotation = q.normalized().toRotationMatrix();
  p.translation = Vec3(n(rng), n(rng), n(rng)) * 2.0;
  return p;
}

inline CameraIntrinsics random_intrinsics(std::mt19937& rng) {
  std::uniform_real_distribution<double> f(50.0, 500.0);
  std::uniform_int_distribution<int> size(64, 640);
  CameraIntrinsics k;
  k.width = size(rng);
  k.height = size(rng);
  k.fx = f(rng);
  k.fy = f(rng);
  std::uniform_real_distribution<double> cx(0.25 * k.width, 0.75 * k.width);
  std::uniform_real_distribution<double> cy(0.25 * k.height, 0.75 * k.height);
  k.cx = cx(rng);
  k.cy = cy(rng);
  return k;
}

// Categorical probability vector of length K (sums to 1).
inline std::vector<float> random_categorical(std::mt19937& rng, int K) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> raw(K);
  double sum = 0.0;
  for (double& v : raw) {
    v = u(rng);
    sum += v;
  }
  std::vector<float> p(K);
  for (int k = 0; k < K; ++k) p[k] = static_cast<float>(raw[k] / sum);
  return p;
}

// Single-pixel categorical field from a vector.
inline affmap::multilabel::ProbabilityField field_from_vector(
    const std::vector<float>& p,
    affmap::multilabel::ProbabilityMode mode = affmap::multilabel::ProbabilityMode::categorical) {
  affmap::multilabel::ProbabilityField f;
  f.mode = mode;
  std::vector<std::string> classes;
  for (size_t k = 0; k < p.size(); ++k) classes.push_back("c" + std::to_string(k));
  f.planes = affmap::ClassPlanes<float>::zeros(classes, 1, 1);
  for (size_t k = 0; k < p.size(); ++k) f.planes.values[k] = p[k];
  return f;
}

// Active class indices of the single pixel of a 1x1 LabelField.
inline std::set<int> active_classes(const affmap::LabelField& l, int y = 0, int x = 0) {
  std::set<int> out;
  for (int k = 0; k < l.num_classes(); ++k)
    if (l.at(k, y, x)) out.insert(k);
  return out;
}

// Random multi-pixel categorical field.
inline affmap::multilabel::ProbabilityField random_categorical_field(std::mt19937& rng, int K,
                                                                     int h, int w) {
  std::vector<std::string> classes;
  for (int k = 0; k < K; ++k) classes.push_back("c" + std::to_string(k));
  affmap::multilabel::ProbabilityField f;
  f.mode = affmap::multilabel::ProbabilityMode::categorical;
  f.planes = affmap::ClassPlanes<float>::zeros(classes, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto p = random_categorical(rng, K);
      for (int k = 0; k < K; ++k) f.planes.at(k, y, x) = p[k];
    }
  return f;
}

inline affmap::multilabel::ProbabilityField random_bernoulli_field(std::mt19937& rng, int K, int h,
                                                                   int w, float lo = 0.01f,
                                                                   float hi = 0.99f) {
  std::vector<std::string> classes;
  for (int k = 0; k < K; ++k) classes.push_back("c" + std::to_string(k));
  affmap::multilabel::ProbabilityField f;
  f.mode = affmap::multilabel::ProbabilityMode::bernoulli;
  f.planes = affmap::ClassPlanes<float>::zeros(classes, h, w);
  std::uniform_real_distribution<float> u(lo, hi);
  for (auto& v : f.planes.values) v = u(rng);
  return f;
}

inline affmap::LabelField random_labels(std::mt19937& rng, int K, int h, int w,
                                        double density = 0.4) {
  std::vector<std::string> classes;
  for (int k = 0; k < K; ++k) classes.push_back("c" + std::to_string(k));
  affmap::LabelField l = affmap::LabelField::zeros(classes, h, w);
  std::bernoulli_distribution b(density);
  for (auto& v : l.values) v = b(rng) ? 1 : 0;
  return l;
}

}  // namespace test_helpers
