#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/multilabel.hpp"

namespace affmap::metrics {

namespace detail {

inline void check_sizes(size_t a, size_t b) {
  if (a != b) fail(errc::shape_mismatch, "metric inputs differ in size");
}

// Additive smoothing then normalization to a distribution.
inline std::vector<double> normalized(std::span<const float> m, double delta) {
  double sum = 0.0;
  for (float v : m) {
    if (v < 0.f) fail(errc::domain_error, "heatmap values must be nonnegative");
    sum += v;
  }
  if (sum == 0.0) fail(errc::all_zero_map, "all-zero heatmap");
  std::vector<double> out(m.size());
  double total = sum + delta * static_cast<double>(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i] = (m[i] + delta) / total;
  return out;
}

}  // namespace detail

// KL divergence of the normalized maps, sum gt * ln(gt / pred) >= 0.
inline double kld(std::span<const float> pred, std::span<const float> gt, double delta = 1e-12) {
  detail::check_sizes(pred.size(), gt.size());
  std::vector<double> p = detail::normalized(pred, delta);
  std::vector<double> g = detail::normalized(gt, delta);
  double out = 0.0;
  for (size_t i = 0; i < p.size(); ++i) out += g[i] * std::log(g[i] / p[i]);
  return out;
}

// Histogram intersection of the normalized maps, in [0, 1].
inline double sim(std::span<const float> pred, std::span<const float> gt, double delta = 1e-12) {
  detail::check_sizes(pred.size(), gt.size());
  std::vector<double> p = detail::normalized(pred, delta);
  std::vector<double> g = detail::normalized(gt, delta);
  double out = 0.0;
  for (size_t i = 0; i < p.size(); ++i) out += std::min(p[i], g[i]);
  return out;
}

// ROC area with ground-truth pixels as positives and all others as negatives.
// Computed as the Mann-Whitney rank statistic; tied scores contribute 0.5.
inline double auc_judd(std::span<const float> pred, std::span<const std::uint8_t> gt_points) {
  detail::check_sizes(pred.size(), gt_points.size());
  size_t n = pred.size();
  size_t n_pos = 0;
  for (std::uint8_t g : gt_points) n_pos += g != 0;
  size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    fail(errc::domain_error, "auc_judd needs at least one positive and one negative pixel");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return pred[a] < pred[b]; });

  // Average ranks over tied groups, then the rank-sum statistic.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && pred[order[j]] == pred[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (size_t t = i; t < j; ++t)
      if (gt_points[order[t]] != 0) pos_rank_sum += avg_rank;
    i = j;
  }
  double auc = (pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
               (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return auc;
}

// Per-class confusion counts accumulated over a whole evaluation set;
// intersections and unions are summed globally before any division.
class SegAccumulator {
 public:
  explicit SegAccumulator(std::vector<std::string> classes)
      : classes_(std::move(classes)),
        tp_(classes_.size(), 0),
        pred_(classes_.size(), 0),
        gt_(classes_.size(), 0) {}

  void add(const LabelField& pred, const LabelField& gt) {
    if (!pred.same_shape(gt)) fail(errc::shape_mismatch, "prediction/ground-truth shapes differ");
    if (pred.classes != classes_) fail(errc::vocab_mismatch, "vocabulary differs from accumulator");
    const size_t n = pred.plane_size();
    for (size_t k = 0; k < classes_.size(); ++k) {
      const std::uint8_t* p = pred.values.data() + k * n;
      const std::uint8_t* g = gt.values.data() + k * n;
      for (size_t i = 0; i < n; ++i) {
        bool pp = p[i] != 0, gg = g[i] != 0;
        tp_[k] += pp && gg;
        pred_[k] += pp;
        gt_[k] += gg;
      }
    }
  }

  void merge(const SegAccumulator& o) {
    if (o.classes_ != classes_) fail(errc::vocab_mismatch, "merging mismatched accumulators");
    for (size_t k = 0; k < classes_.size(); ++k) {
      tp_[k] += o.tp_[k];
      pred_[k] += o.pred_[k];
      gt_[k] += o.gt_[k];
    }
  }

  // IoU_k = tp / (pred + gt - tp); NaN marks classes with an empty union,
  // which are excluded from the mean.
  std::vector<double> per_class_iou() const {
    std::vector<double> iou(classes_.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t k = 0; k < classes_.size(); ++k) {
      std::int64_t uni = pred_[k] + gt_[k] - tp_[k];
      if (uni > 0) iou[k] = static_cast<double>(tp_[k]) / static_cast<double>(uni);
    }
    return iou;
  }

  // Dice_k = 2 tp / (pred + gt); degenerate classes are NaN.
  std::vector<double> per_class_f1() const {
    std::vector<double> f1(classes_.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t k = 0; k < classes_.size(); ++k) {
      std::int64_t denom = pred_[k] + gt_[k];
      if (denom > 0) f1[k] = 2.0 * static_cast<double>(tp_[k]) / static_cast<double>(denom);
    }
    return f1;
  }

  double miou() const { return mean_defined(per_class_iou()); }
  double f1_macro() const { return mean_defined(per_class_f1()); }

  const std::vector<std::string>& classes() const { return classes_; }
  std::int64_t true_positives(size_t k) const { return tp_[k]; }
  std::int64_t pred_count(size_t k) const { return pred_[k]; }
  std::int64_t gt_count(size_t k) const { return gt_[k]; }

 private:
  static double mean_defined(const std::vector<double>& v) {
    double sum = 0.0;
    size_t count = 0;
    for (double x : v)
      if (!std::isnan(x)) {
        sum += x;
        ++count;
      }
    return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / count;
  }

  std::vector<std::string> classes_;
  std::vector<std::int64_t> tp_, pred_, gt_;
};

struct MiouResult {
  std::vector<double> per_class;
  double miou;
};

inline MiouResult miou(const LabelField& pred, const LabelField& gt) {
  SegAccumulator acc(pred.classes);
  acc.add(pred, gt);
  return {acc.per_class_iou(), acc.miou()};
}

inline double f1(const LabelField& pred, const LabelField& gt) {
  SegAccumulator acc(pred.classes);
  acc.add(pred, gt);
  return acc.f1_macro();
}

struct APResult {
  std::vector<double> per_class_ap;    // NaN for classes without positives
  std::vector<double> per_class_ap50;  // NaN likewise
  double map = 0.0;
  double ap50 = 0.0;
};

// Pixel-level precision-recall per class. Scores and labels are accumulated
// across frames; AP integrates the interpolated (envelope) PR curve over the
// distinct score thresholds, predictions taken as score >= threshold.
class APAccumulator {
 public:
  explicit APAccumulator(std::vector<std::string> classes)
      : classes_(std::move(classes)), samples_(classes_.size()) {}

  void add(const multilabel::ProbabilityField& scores, const LabelField& gt) {
    if (scores.planes.height != gt.height || scores.planes.width != gt.width ||
        scores.planes.classes != gt.classes)
      fail(errc::shape_mismatch, "score/ground-truth shapes differ");
    if (gt.classes != classes_) fail(errc::vocab_mismatch, "vocabulary differs from accumulator");
    const size_t n = gt.plane_size();
    for (size_t k = 0; k < classes_.size(); ++k) {
      auto& dst = samples_[k];
      dst.reserve(dst.size() + n);
      for (size_t i = 0; i < n; ++i)
        dst.push_back({scores.planes.values[k * n + i], gt.values[k * n + i] != 0});
    }
  }

  APResult finalize() const {
    APResult r;
    r.per_class_ap.assign(classes_.size(), std::numeric_limits<double>::quiet_NaN());
    r.per_class_ap50.assign(classes_.size(), std::numeric_limits<double>::quiet_NaN());
    double ap_sum = 0.0, ap50_sum = 0.0;
    size_t defined = 0;
    for (size_t k = 0; k < classes_.size(); ++k) {
      auto curve = pr_curve(samples_[k]);
      if (curve.total_pos == 0) continue;
      r.per_class_ap[k] = interpolated_ap(curve);
      r.per_class_ap50[k] = precision_at_first_iou50(curve);
      ap_sum += r.per_class_ap[k];
      ap50_sum += r.per_class_ap50[k];
      ++defined;
    }
    if (defined > 0) {
      r.map = ap_sum / defined;
      r.ap50 = ap50_sum / defined;
    } else {
      r.map = std::numeric_limits<double>::quiet_NaN();
      r.ap50 = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
  }

 private:
  struct Sample {
    float score;
    bool positive;
  };
  struct Curve {
    // One entry per distinct threshold, descending; cumulative counts for
    // predictions score >= threshold.
    std::vector<std::int64_t> tp, fp;
    std::int64_t total_pos = 0;
    std::int64_t total = 0;
  };

  static Curve pr_curve(std::vector<Sample> s) {
    Curve c;
    c.total = static_cast<std::int64_t>(s.size());
    for (const Sample& x : s) c.total_pos += x.positive;
    std::sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) {
      return a.score > b.score;
    });
    std::int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < s.size()) {
      size_t j = i;
      while (j < s.size() && s[j].score == s[i].score) {
        tp += s[j].positive;
        fp += !s[j].positive;
        ++j;
      }
      c.tp.push_back(tp);
      c.fp.push_back(fp);
      i = j;
    }
    return c;
  }

  static double interpolated_ap(const Curve& c) {
    size_t m = c.tp.size();
    // Precision envelope from the high-recall end.
    std::vector<double> prec(m), rec(m);
    for (size_t i = 0; i < m; ++i) {
      prec[i] = static_cast<double>(c.tp[i]) / static_cast<double>(c.tp[i] + c.fp[i]);
      rec[i] = static_cast<double>(c.tp[i]) / static_cast<double>(c.total_pos);
    }
    for (size_t i = m; i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);
    double ap = 0.0, prev_rec = 0.0;
    for (size_t i = 0; i < m; ++i) {
      ap += (rec[i] - prev_rec) * prec[i];
      prev_rec = rec[i];
    }
    return ap;
  }

  // Precision at the first threshold (descending sweep) where the binarized
  // mask reaches IoU 0.5 against the ground truth; 0 if never reached.
  static double precision_at_first_iou50(const Curve& c) {
    for (size_t i = 0; i < c.tp.size(); ++i) {
      std::int64_t uni = c.total_pos + c.fp[i];  // |pred u gt| = tp+fp+fn = pos+fp
      double iou = static_cast<double>(c.tp[i]) / static_cast<double>(uni);
      if (iou >= 0.5)
        return static_cast<double>(c.tp[i]) / static_cast<double>(c.tp[i] + c.fp[i]);
    }
    return 0.0;
  }

  std::vector<std::string> classes_;
  std::vector<std::vector<Sample>> samples_;
};

inline APResult average_precision(const multilabel::ProbabilityField& scores,
                                  const LabelField& gt) {
  APAccumulator acc(gt.classes);
  acc.add(scores, gt);
  return acc.finalize();
}

// Mean saliency scores over (frame, class) pairs with a nonempty ground-truth
// plane; pairs where AUC is undefined (no negatives) are skipped for AUC only.
class SaliencyAccumulator {
 public:
  void add(std::span<const float> pred, std::span<const std::uint8_t> gt_plane) {
    detail::check_sizes(pred.size(), gt_plane.size());
    size_t pos = 0;
    for (std::uint8_t g : gt_plane) pos += g != 0;
    if (pos == 0) return;
    std::vector<float> gt_float(gt_plane.size());
    for (size_t i = 0; i < gt_plane.size(); ++i) gt_float[i] = gt_plane[i] != 0 ? 1.f : 0.f;
    bool pred_all_zero = true;
    for (float v : pred)
      if (v != 0.f) pred_all_zero = false;
    // An all-zero prediction is maximally wrong but still well-defined under
    // smoothing: treat it as uniform mass from the smoothing floor.
    std::vector<float> pred_adj(pred.begin(), pred.end());
    if (pred_all_zero) pred_adj.assign(pred.size(), 1.f);
    kld_sum_ += kld(pred_adj, gt_float);
    sim_sum_ += sim(pred_adj, gt_float);
    ++distribution_pairs_;
    if (pos < gt_plane.size()) {
      auc_sum_ += auc_judd(pred, gt_plane);
      ++auc_pairs_;
    }
  }

  double mean_kld() const { return ratio(kld_sum_, distribution_pairs_); }
  double mean_sim() const { return ratio(sim_sum_, distribution_pairs_); }
  double mean_auc() const { return ratio(auc_sum_, auc_pairs_); }
  size_t pairs() const { return distribution_pairs_; }

 private:
  static double ratio(double sum, size_t n) {
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
  }
  double kld_sum_ = 0.0, sim_sum_ = 0.0, auc_sum_ = 0.0;
  size_t distribution_pairs_ = 0, auc_pairs_ = 0;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> per_class_iou;   // NaN = undefined
  std::vector<double> per_class_f1;    // NaN = undefined
  std::vector<double> per_class_ap;    // NaN = undefined
  double miou = 0.0;
  double f1 = 0.0;
  double kld = 0.0;
  double sim = 0.0;
  double auc_j = 0.0;
  double map = 0.0;
  double ap50 = 0.0;
};

}  // namespace affmap::metrics
