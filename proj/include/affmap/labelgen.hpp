#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/geometry.hpp"
#include "affmap/interaction.hpp"

namespace affmap::labelgen {

struct Interaction3D {
  Vec3 world_point = Vec3::Zero();
  std::string verb;
  std::string object;
  std::int64_t source_frame = 0;
};

// All past interactions of one environment, in a shared world frame.
// Append-only.
struct AffordanceHistory {
  std::string environment_id;
  std::vector<Interaction3D> interactions;

  void append(Interaction3D i) { interactions.push_back(std::move(i)); }
};

struct ProjectedInteraction {
  Vec2 pixel = Vec2::Zero();
  std::string verb;
  std::string object;
};

struct ReprojectStats {
  std::size_t behind_camera = 0;
  std::size_t out_of_bounds = 0;
  std::size_t occluded = 0;
};

// Gaussian truncation radius in sigmas. Contributions beyond contribute
// less than exp(-8) ~ 3.4e-4, far below the mask threshold.
inline constexpr double kGaussianCutoffSigmas = 4.0;

inline double default_sigma(const CameraIntrinsics& k) { return 0.03 * k.diagonal(); }

// Lifts an interaction pixel to a world point through the scale-corrected
// dense depth at the nearest pixel.
inline Interaction3D lift_event(const interaction::InteractionEvent& event,
                                const FrameContext& ctx) {
  double d = metric_depth_at(ctx, event.center);
  if (!(d > 0) || !std::isfinite(d)) fail(errc::invalid_depth, "invalid depth at event pixel");
  return {unproject(event.center, d, ctx.pose, ctx.intrinsics), event.verb, event.object,
          event.frame_id};
}

// Projects every history interaction into the frame; keeps those in front of
// the camera whose pixel lands inside image bounds. Occlusion is ignored by
// default; with a positive margin, projections whose depth disagrees with the
// frame's scaled dense depth by more than the margin are flagged and dropped.
inline std::vector<ProjectedInteraction> reproject_history(const AffordanceHistory& history,
                                                           const FrameContext& ctx,
                                                           ReprojectStats* stats = nullptr,
                                                           double occlusion_margin_m = 0.0) {
  std::vector<ProjectedInteraction> out;
  out.reserve(history.interactions.size());
  ReprojectStats local;
  ReprojectStats& s = stats ? *stats : local;
  for (const Interaction3D& it : history.interactions) {
    Vec3 cam = ctx.pose.to_camera(it.world_point);
    if (cam.z() <= 0) {
      ++s.behind_camera;
      continue;
    }
    Vec2 px(ctx.intrinsics.fx * cam.x() / cam.z() + ctx.intrinsics.cx,
            ctx.intrinsics.fy * cam.y() / cam.z() + ctx.intrinsics.cy);
    if (!ctx.intrinsics.contains(px)) {
      ++s.out_of_bounds;
      continue;
    }
    if (occlusion_margin_m > 0) {
      double surface = metric_depth_at(ctx, px);
      if (std::abs(surface - cam.z()) > occlusion_margin_m) {
        ++s.occluded;
        continue;
      }
    }
    out.push_back({px, it.verb, it.object});
  }
  return out;
}

// Additive Gaussian heatmap before normalization: per verb class, a sum of
// exp(-||p - center||^2 / (2 sigma^2)) over its projected points.
inline Heatmap build_raw_heatmap(const std::vector<ProjectedInteraction>& projected, double sigma,
                                 int height, int width, const Vocabulary& vocab) {
  if (!(sigma > 0)) fail(errc::domain_error, "sigma must be positive");
  Heatmap h = Heatmap::zeros(vocab.classes(), height, width);
  double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  int radius = static_cast<int>(std::ceil(kGaussianCutoffSigmas * sigma));
  for (const ProjectedInteraction& p : projected) {
    int k = vocab.index_of(p.verb);
    if (k < 0) fail(errc::vocab_mismatch, "verb '" + p.verb + "' not in vocabulary");
    int x0 = std::max(0, static_cast<int>(std::floor(p.pixel.x())) - radius);
    int x1 = std::min(width - 1, static_cast<int>(std::ceil(p.pixel.x())) + radius);
    int y0 = std::max(0, static_cast<int>(std::floor(p.pixel.y())) - radius);
    int y1 = std::min(height - 1, static_cast<int>(std::ceil(p.pixel.y())) + radius);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double dx = x - p.pixel.x();
        double dy = y - p.pixel.y();
        double r2 = dx * dx + dy * dy;
        if (r2 > kGaussianCutoffSigmas * kGaussianCutoffSigmas * sigma * sigma) continue;
        h.at(k, y, x) += static_cast<float>(std::exp(-r2 * inv_two_sigma2));
      }
    }
  }
  return h;
}

// Scales each class plane so its peak is 1; all-zero planes stay zero.
inline void normalize_per_class(Heatmap& h) {
  for (int k = 0; k < h.num_classes(); ++k) {
    auto plane = h.plane(k);
    float mx = 0.f;
    for (float v : plane) mx = std::max(mx, v);
    if (mx > 0.f)
      for (float& v : plane) v /= mx;
  }
}

inline Heatmap build_heatmap(const std::vector<ProjectedInteraction>& projected, double sigma,
                             int height, int width, const Vocabulary& vocab) {
  Heatmap h = build_raw_heatmap(projected, sigma, height, width, vocab);
  normalize_per_class(h);
  return h;
}

// Strict threshold: a pixel is active iff its heatmap value exceeds tau.
inline MultiLabelMask threshold_mask(const Heatmap& h, double tau = 0.25) {
  if (!(tau > 0 && tau < 1)) fail(errc::domain_error, "tau must be in (0,1)");
  MultiLabelMask m = MultiLabelMask::zeros(h.classes, h.height, h.width);
  for (size_t i = 0; i < h.values.size(); ++i)
    m.values[i] = h.values[i] > static_cast<float>(tau) ? 1 : 0;
  return m;
}

// Removes contributions of interactions whose object is absent from the
// frame, rebuilding the heatmap from the filtered projection list. With every
// object present this is the identity.
inline MultiLabelMask filter_by_presence(const MultiLabelMask& mask,
                                         const std::vector<ProjectedInteraction>& projected,
                                         const std::set<std::string>& present_objects,
                                         double sigma, double tau, const Vocabulary& vocab) {
  bool all_present = true;
  std::vector<ProjectedInteraction> kept;
  kept.reserve(projected.size());
  for (const ProjectedInteraction& p : projected) {
    if (present_objects.count(p.object)) kept.push_back(p);
    else all_present = false;
  }
  if (all_present) return mask;
  return threshold_mask(build_heatmap(kept, sigma, mask.height, mask.width, vocab), tau);
}

struct LabelFrame {
  FrameContext ctx;
  std::set<std::string> present_objects;
};

struct GenerateParams {
  double sigma_px = 0.0;  // <= 0 selects default_sigma(intrinsics)
  double tau = 0.25;
  double occlusion_margin_m = 0.0;  // <= 0 disables the visibility test
  int workers = 1;
};

struct FrameLabels {
  std::int64_t frame_id = 0;
  MultiLabelMask mask;
  ReprojectStats stats;
  std::optional<std::string> error;  // set when the frame failed; mask is empty then
};

// Per-frame pipeline: reproject -> threshold(raw heatmap) -> presence filter.
// One bad frame never aborts the stream; its error is recorded instead.
inline std::vector<FrameLabels> generate_labels(const AffordanceHistory& history,
                                                const std::vector<LabelFrame>& frames,
                                                const Vocabulary& vocab,
                                                const GenerateParams& params = {}) {
  std::vector<FrameLabels> out(frames.size());
  parallel_for(frames.size(), params.workers, [&](size_t i) {
    const LabelFrame& f = frames[i];
    FrameLabels result;
    result.frame_id = f.ctx.frame_id;
    try {
      f.ctx.intrinsics.validate();
      double sigma = params.sigma_px > 0 ? params.sigma_px : default_sigma(f.ctx.intrinsics);
      auto projected =
          reproject_history(history, f.ctx, &result.stats, params.occlusion_margin_m);
      Heatmap h = build_heatmap(projected, sigma, f.ctx.intrinsics.height, f.ctx.intrinsics.width,
                                vocab);
      MultiLabelMask full = threshold_mask(h, params.tau);
      result.mask =
          filter_by_presence(full, projected, f.present_objects, sigma, params.tau, vocab);
    } catch (const Error& e) {
      result.error = e.what();
      result.mask = MultiLabelMask::zeros(vocab.classes(), f.ctx.intrinsics.height,
                                          f.ctx.intrinsics.width);
    }
    out[i] = std::move(result);
  });
  return out;
}

}  // namespace affmap::labelgen
