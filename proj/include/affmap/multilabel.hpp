#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "affmap/core.hpp"

namespace affmap::multilabel {

enum class ProbabilityMode { categorical, bernoulli };

inline const char* mode_name(ProbabilityMode m) {
  return m == ProbabilityMode::categorical ? "categorical" : "bernoulli";
}

inline ProbabilityMode parse_mode(const std::string& s) {
  if (s == "categorical") return ProbabilityMode::categorical;
  if (s == "bernoulli") return ProbabilityMode::bernoulli;
  fail(errc::invalid_spec, "unknown probability mode '" + s + "'");
}

struct ProbabilityField {
  ProbabilityMode mode = ProbabilityMode::categorical;
  ClassPlanes<float> planes;

  void validate(double tol = 1e-5) const {
    const int K = planes.num_classes();
    if (K == 0) fail(errc::invalid_spec, "probability field without classes");
    for (size_t px = 0; px < planes.plane_size(); ++px) {
      double sum = 0.0;
      for (int k = 0; k < K; ++k) {
        float v = planes.values[k * planes.plane_size() + px];
        if (v < 0.f || (mode == ProbabilityMode::bernoulli && v > 1.f))
          fail(errc::domain_error, "probability out of range");
        sum += v;
      }
      if (mode == ProbabilityMode::categorical && std::abs(sum - 1.0) > tol)
        fail(errc::domain_error, "categorical probabilities do not sum to 1");
    }
  }
};

// Denominator of the top-k probability floor. The default floors at the
// inverse of the class count K; the alternative uses the selection count k.
enum class TopKFloorRule { inverse_class_count, inverse_selection_count };

namespace detail {

// Class indices sorted by descending probability; exact ties keep ascending
// class index so outputs are identical across platforms.
inline void rank_descending(std::vector<int>& order, const std::vector<float>& p) {
  order.resize(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
}

template <typename PerPixel>
inline LabelField per_pixel_select(const ProbabilityField& field, ProbabilityMode expected,
                                   PerPixel&& fn) {
  if (field.mode != expected)
    fail(errc::mode_mismatch, std::string("expected ") + mode_name(expected) + " probabilities");
  const auto& planes = field.planes;
  LabelField out = LabelField::zeros(planes.classes, planes.height, planes.width);
  const int K = planes.num_classes();
  const size_t n = planes.plane_size();
  std::vector<float> p(K);
  std::vector<int> order;
  std::vector<std::uint8_t> y(K);
  for (size_t px = 0; px < n; ++px) {
    for (int k = 0; k < K; ++k) p[k] = planes.values[k * n + px];
    std::fill(y.begin(), y.end(), 0);
    fn(p, order, y);
    for (int k = 0; k < K; ++k) out.values[k * n + px] = y[k];
  }
  return out;
}

}  // namespace detail

// Top-k classes by probability, dropping any whose probability falls below
// the floor (strict <). With k = 1 this is exactly argmax: the maximum of a
// categorical vector is never below 1/K.
inline LabelField select_topk(const ProbabilityField& field, int k,
                              TopKFloorRule floor_rule = TopKFloorRule::inverse_class_count) {
  const int K = field.planes.num_classes();
  if (k < 1 || k > K) fail(errc::invalid_k, "k must be in [1, K]");
  const float floor = 1.0f / static_cast<float>(
                                 floor_rule == TopKFloorRule::inverse_class_count ? K : k);
  return detail::per_pixel_select(
      field, ProbabilityMode::categorical,
      [&](const std::vector<float>& p, std::vector<int>& order, std::vector<std::uint8_t>& y) {
        detail::rank_descending(order, p);
        for (int r = 0; r < k; ++r)
          if (p[order[r]] >= floor) y[order[r]] = 1;
      });
}

// All classes with probability strictly greater than theta.
inline LabelField select_max_theta(const ProbabilityField& field, double theta) {
  if (!(theta > 0 && theta < 1)) fail(errc::domain_error, "theta must be in (0,1)");
  const float th = static_cast<float>(theta);
  return detail::per_pixel_select(
      field, ProbabilityMode::categorical,
      [&](const std::vector<float>& p, std::vector<int>&, std::vector<std::uint8_t>& y) {
        for (size_t k = 0; k < p.size(); ++k)
          if (p[k] > th) y[k] = 1;
      });
}

// Cut the descending ranking at the first gap larger than theta_d and keep
// everything above it. Without a qualifying gap the selection falls back to
// the argmax alone, so it is never empty.
inline LabelField select_dyn_theta(const ProbabilityField& field, double theta_d) {
  if (!(theta_d > 0)) fail(errc::domain_error, "theta_d must be positive");
  const float th = static_cast<float>(theta_d);
  return detail::per_pixel_select(
      field, ProbabilityMode::categorical,
      [&](const std::vector<float>& p, std::vector<int>& order, std::vector<std::uint8_t>& y) {
        detail::rank_descending(order, p);
        const int K = static_cast<int>(p.size());
        int cut = -1;
        for (int r = 0; r + 1 < K; ++r) {
          if (p[order[r]] - p[order[r + 1]] > th) {
            cut = r;
            break;
          }
        }
        if (cut < 0) {
          y[order[0]] = 1;  // no qualifying gap
          return;
        }
        for (int r = 0; r <= cut; ++r) y[order[r]] = 1;
      });
}

// Independent per-class detections: active iff p > 0.5 (strict).
inline LabelField select_bernoulli(const ProbabilityField& field) {
  return detail::per_pixel_select(
      field, ProbabilityMode::bernoulli,
      [&](const std::vector<float>& p, std::vector<int>&, std::vector<std::uint8_t>& y) {
        for (size_t k = 0; k < p.size(); ++k)
          if (p[k] > 0.5f) y[k] = 1;
      });
}

enum class Heuristic { topk, max_theta, dyn_theta, bernoulli };

inline Heuristic parse_heuristic(const std::string& name) {
  if (name == "topk") return Heuristic::topk;
  if (name == "max") return Heuristic::max_theta;
  if (name == "dyn") return Heuristic::dyn_theta;
  if (name == "bernoulli") return Heuristic::bernoulli;
  fail(errc::usage_error, "unknown heuristic '" + name + "' (topk|max|dyn|bernoulli)");
}

inline LabelField apply_heuristic(const ProbabilityField& field, Heuristic h, double param) {
  switch (h) {
    case Heuristic::topk: return select_topk(field, static_cast<int>(param));
    case Heuristic::max_theta: return select_max_theta(field, param);
    case Heuristic::dyn_theta: return select_dyn_theta(field, param);
    case Heuristic::bernoulli: return select_bernoulli(field);
  }
  fail(errc::usage_error, "unreachable heuristic");
}

}  // namespace affmap::multilabel
