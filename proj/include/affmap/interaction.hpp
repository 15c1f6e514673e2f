#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "affmap/geometry.hpp"

namespace affmap::interaction {

inline constexpr const char* kHandClass = "hand";

struct BBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
  // Touching boxes (zero-area overlap) count as intersecting.
  bool intersects(const BBox& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }
  BBox intersection(const BBox& o) const {
    return {std::max(x_min, o.x_min), std::max(y_min, o.y_min), std::min(x_max, o.x_max),
            std::min(y_max, o.y_max)};
  }
  Vec2 center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  BBox clamped(int width, int height) const {
    auto clip = [](double v, double hi) { return std::min(std::max(v, 0.0), hi); };
    return {clip(x_min, width - 1.0), clip(y_min, height - 1.0), clip(x_max, width - 1.0),
            clip(y_max, height - 1.0)};
  }
  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

struct NarrationRecord {
  std::int64_t frame_id = 0;
  std::string verb;
  std::string object;
};

struct Detection {
  std::string cls;
  BBox box;
};

struct InteractionEvent {
  std::int64_t frame_id = 0;
  std::string verb;
  std::string object;
  Vec2 center = Vec2::Zero();  // sub-pixel interaction point
};

// Centroid of the intersection rectangle. Zero-area (touching) intersections
// are accepted and yield the degenerate centroid.
inline Vec2 interaction_center(const BBox& hand, const BBox& object) {
  if (!hand.intersects(object)) fail(errc::no_intersection, "hand and object boxes are disjoint");
  return hand.intersection(object).center();
}

struct ExtractionSummary {
  std::size_t events = 0;
  std::size_t missing_hand = 0;
  std::size_t missing_object = 0;
  std::size_t no_intersection = 0;
  std::vector<std::string> skipped;  // one line per dropped narration
};

// Joins narrations with per-frame detections. When several hands or object
// instances exist, picks the pair with the largest intersection area; ties go
// to the smaller object box, then to detection order. Skipped narrations are
// counted, never silently dropped. Output preserves narration order.
inline std::vector<InteractionEvent> extract_events(
    const std::vector<NarrationRecord>& narrations,
    const std::map<std::int64_t, std::vector<Detection>>& detections,
    ExtractionSummary* summary = nullptr) {
  ExtractionSummary local;
  ExtractionSummary& s = summary ? *summary : local;
  std::vector<InteractionEvent> events;
  events.reserve(narrations.size());

  static const std::vector<Detection> kNone;
  for (const NarrationRecord& n : narrations) {
    auto it = detections.find(n.frame_id);
    const std::vector<Detection>& dets = it == detections.end() ? kNone : it->second;

    std::vector<const BBox*> hands, objects;
    for (const Detection& d : dets) {
      if (d.cls == kHandClass) hands.push_back(&d.box);
      else if (d.cls == n.object) objects.push_back(&d.box);
    }
    if (hands.empty()) {
      ++s.missing_hand;
      s.skipped.push_back("frame " + std::to_string(n.frame_id) + ": no hand detection for '" +
                          n.verb + " " + n.object + "'");
      continue;
    }
    if (objects.empty()) {
      ++s.missing_object;
      s.skipped.push_back("frame " + std::to_string(n.frame_id) + ": object '" + n.object +
                          "' not detected");
      continue;
    }

    const BBox* best_hand = nullptr;
    const BBox* best_object = nullptr;
    double best_area = -1.0;
    double best_object_area = 0.0;
    for (const BBox* h : hands) {
      for (const BBox* o : objects) {
        if (!h->intersects(*o)) continue;
        double a = h->intersection(*o).area();
        if (a > best_area || (a == best_area && o->area() < best_object_area)) {
          best_area = a;
          best_object_area = o->area();
          best_hand = h;
          best_object = o;
        }
      }
    }
    if (!best_hand) {
      ++s.no_intersection;
      s.skipped.push_back("frame " + std::to_string(n.frame_id) + ": hand and '" + n.object +
                          "' boxes are disjoint");
      continue;
    }
    ++s.events;
    events.push_back({n.frame_id, n.verb, n.object, interaction_center(*best_hand, *best_object)});
  }
  return events;
}

}  // namespace affmap::interaction
