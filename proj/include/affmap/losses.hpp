#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/multilabel.hpp"

namespace affmap::losses {

struct LossConfig {
  double gamma_plus = 4.0;
  double gamma_minus = 1.0;
  std::vector<double> class_weights;  // empty means all ones
  double epsilon = 1e-7;

  void validate() const {
    if (gamma_plus < 0 || gamma_minus < 0) fail(errc::domain_error, "gammas must be nonnegative");
    if (!(epsilon > 0 && epsilon < 1e-3)) fail(errc::domain_error, "epsilon out of range");
    for (double w : class_weights)
      if (!(w > 0)) fail(errc::domain_error, "class weights must be positive");
  }

  double weight(int k) const { return class_weights.empty() ? 1.0 : class_weights[k]; }
};

inline double clamp_probability(double p, double epsilon) {
  return std::min(std::max(p, epsilon), 1.0 - epsilon);
}

// One asymmetric-loss term (unweighted), nonnegative:
//   y=1: -log(p) (1-p)^g+      y=0: -log(1-p) p^g-
inline double asl_term(double p, bool y, const LossConfig& cfg) {
  p = clamp_probability(p, cfg.epsilon);
  if (y) return -std::log(p) * std::pow(1.0 - p, cfg.gamma_plus);
  return -std::log(1.0 - p) * std::pow(p, cfg.gamma_minus);
}

// d asl_term / dp at the clamped probability.
inline double asl_term_grad(double p, bool y, const LossConfig& cfg) {
  p = clamp_probability(p, cfg.epsilon);
  if (y) {
    double g = cfg.gamma_plus;
    return -std::pow(1.0 - p, g) / p + g * std::log(p) * std::pow(1.0 - p, g - 1.0);
  }
  double g = cfg.gamma_minus;
  return std::pow(p, g) / (1.0 - p) - std::log(1.0 - p) * g * std::pow(p, g - 1.0);
}

namespace detail {

inline void check_shapes(const multilabel::ProbabilityField& P, const LabelField& Y,
                         size_t n_weights) {
  if (P.mode != multilabel::ProbabilityMode::bernoulli)
    fail(errc::mode_mismatch, "loss expects bernoulli probabilities");
  if (!P.planes.same_shape(Y)) fail(errc::shape_mismatch, "probability/label shapes differ");
  if (n_weights != 0 && n_weights != static_cast<size_t>(P.planes.num_classes()))
    fail(errc::shape_mismatch, "class weight count differs from class count");
  if (P.planes.plane_size() == 0) fail(errc::domain_error, "empty field");
}

}  // namespace detail

// L = mean over pixels of (1/K) sum_k w_k ASL_k. Summation order is fixed
// (pixels outer, classes inner) so results are bit-stable.
inline double asym_loss(const multilabel::ProbabilityField& P, const LabelField& Y,
                        const LossConfig& cfg) {
  cfg.validate();
  detail::check_shapes(P, Y, cfg.class_weights.size());
  const int K = P.planes.num_classes();
  const size_t n = P.planes.plane_size();
  double total = 0.0;
  for (size_t px = 0; px < n; ++px) {
    double pixel_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      size_t i = k * n + px;
      pixel_sum += cfg.weight(k) * asl_term(P.planes.values[i], Y.values[i] != 0, cfg);
    }
    total += pixel_sum / K;
  }
  return total / static_cast<double>(n);
}

// Class-weighted binary cross-entropy. Deliberately mirrors the asym_loss
// reduction so the gamma=0 case agrees bit-for-bit.
inline double weighted_bce(const multilabel::ProbabilityField& P, const LabelField& Y,
                           const std::vector<double>& weights, double epsilon = 1e-7) {
  LossConfig cfg;
  cfg.class_weights = weights;
  cfg.epsilon = epsilon;
  cfg.validate();
  detail::check_shapes(P, Y, weights.size());
  const int K = P.planes.num_classes();
  const size_t n = P.planes.plane_size();
  double total = 0.0;
  for (size_t px = 0; px < n; ++px) {
    double pixel_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      size_t i = k * n + px;
      double p = clamp_probability(P.planes.values[i], epsilon);
      double term = Y.values[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
      pixel_sum += cfg.weight(k) * term;
    }
    total += pixel_sum / K;
  }
  return total / static_cast<double>(n);
}

// Analytic dL/dp for every entry, matching central finite differences of
// asym_loss.
inline std::vector<double> asym_loss_grad(const multilabel::ProbabilityField& P,
                                          const LabelField& Y, const LossConfig& cfg) {
  cfg.validate();
  detail::check_shapes(P, Y, cfg.class_weights.size());
  const int K = P.planes.num_classes();
  const size_t n = P.planes.plane_size();
  std::vector<double> grad(P.planes.values.size());
  for (int k = 0; k < K; ++k) {
    double scale = cfg.weight(k) / (static_cast<double>(K) * static_cast<double>(n));
    for (size_t px = 0; px < n; ++px) {
      size_t i = k * n + px;
      grad[i] = scale * asl_term_grad(P.planes.values[i], Y.values[i] != 0, cfg);
    }
  }
  return grad;
}

// Balanced-frequency weights w_k = (neg+pos)/(2 pos), clamped. Classes that
// never occur get the maximum weight.
inline std::vector<double> class_weights_from_counts(const std::vector<std::int64_t>& positives,
                                                     const std::vector<std::int64_t>& negatives,
                                                     double w_min = 0.05, double w_max = 20.0) {
  if (positives.size() != negatives.size())
    fail(errc::shape_mismatch, "positive/negative count vectors differ in length");
  std::vector<double> w(positives.size());
  for (size_t k = 0; k < w.size(); ++k) {
    if (positives[k] < 0 || negatives[k] < 0) fail(errc::domain_error, "negative counts");
    if (positives[k] == 0) {
      w[k] = w_max;
      continue;
    }
    double raw = static_cast<double>(negatives[k] + positives[k]) / (2.0 * positives[k]);
    w[k] = std::min(std::max(raw, w_min), w_max);
  }
  return w;
}

}  // namespace affmap::losses
