#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/geometry.hpp"
#include "affmap/interaction.hpp"
#include "affmap/io.hpp"
#include "affmap/labelgen.hpp"
#include "affmap/mapping.hpp"

namespace affmap::synth {

// Deterministic splitmix64 stream; all fixture randomness flows through this
// so bundles are byte-identical across runs and platforms.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

// Independent per-purpose, per-frame stream derived from the scene seed.
inline Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t frame) {
  Rng r(seed ^ (purpose * 0xD1B54A32D192ED03ull) ^ (frame * 0x8CB92BA72F3D8DD7ull));
  r.next();
  return r;
}

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
  // Distance of an interior/on-surface point to the nearest face plane.
  double face_distance(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
      d = std::min({d, std::abs(p[a] - min[a]), std::abs(p[a] - max[a])});
    return d;
  }
};

// Slab intersection of ray o + t*d with the box; returns [t_in, t_out] or
// nothing.
inline std::optional<std::pair<double, double>> ray_box(const Vec3& o, const Vec3& d,
                                                        const Aabb& box) {
  double t_in = -std::numeric_limits<double>::infinity();
  double t_out = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / d[a];
    double t1 = (box.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (t_in > t_out) return std::nullopt;
  return std::make_pair(t_in, t_out);
}

struct FurnitureBox {
  std::string name;
  Aabb box;
};

struct Waypoint {
  Vec3 position = Vec3::Zero();
  Vec3 look_at = Vec3::Zero();
};

struct ScriptedInteraction {
  int frame = 0;
  std::string verb;
  std::string object;
  Vec3 point = Vec3::Zero();  // on the object's surface
};

struct NoiseLevels {
  double pose_jitter_rad = 0.0;
  double pose_jitter_m = 0.0;
  double depth_noise = 0.0;     // multiplicative, uniform in [-x, +x]
  double bbox_jitter_px = 0.0;  // additive, uniform in [-x, +x] per coordinate
};

struct SceneSpec {
  std::uint64_t seed = 1;
  std::string environment_id = "synth-kitchen";
  Aabb room{Vec3(0, 0, 0), Vec3(4, 2.5, 3)};
  int up_axis = 1;  // index of the world up axis (1 = y up, ground plane xz)
  CameraIntrinsics camera{130.0, 130.0, 80.0, 60.0, 160, 120};
  std::vector<std::string> vocabulary = Vocabulary::easy().classes();
  std::vector<FurnitureBox> furniture;
  std::vector<Waypoint> trajectory;
  std::vector<ScriptedInteraction> interactions;
  std::vector<double> network_depth_scales{2.5};  // cycled per frame
  int sparse_pixel_step = 8;
  double mask_sigma_px = 0.0;  // <= 0 selects 3% of the image diagonal
  double mask_tau = 0.25;
  double hand_box_px = 40.0;
  NoiseLevels noise;

  double sigma() const {
    return mask_sigma_px > 0 ? mask_sigma_px : labelgen::default_sigma(camera);
  }
  double scale_for_frame(size_t f) const {
    return network_depth_scales[f % network_depth_scales.size()];
  }

  void validate() const {
    camera.validate();
    if ((room.max.array() <= room.min.array()).any())
      fail(errc::invalid_spec, "room extents are degenerate");
    if (up_axis < 0 || up_axis > 2) fail(errc::invalid_spec, "up_axis must be 0, 1 or 2");
    if (trajectory.empty()) fail(errc::invalid_spec, "trajectory is empty");
    if (vocabulary.empty()) fail(errc::invalid_spec, "vocabulary is empty");
    if (network_depth_scales.empty()) fail(errc::invalid_spec, "no depth scale");
    for (double s : network_depth_scales)
      if (!(s > 0)) fail(errc::invalid_spec, "depth scales must be positive");
    for (const Waypoint& w : trajectory)
      if (!room.contains(w.position)) fail(errc::invalid_spec, "camera waypoint outside room");
    Vocabulary vocab(vocabulary);
    for (const ScriptedInteraction& i : interactions) {
      if (i.frame < 0 || i.frame >= static_cast<int>(trajectory.size()))
        fail(errc::invalid_spec, "interaction frame out of range");
      if (!vocab.contains(i.verb))
        fail(errc::invalid_spec, "interaction verb '" + i.verb + "' not in vocabulary");
      const FurnitureBox* obj = nullptr;
      for (const FurnitureBox& f : furniture)
        if (f.name == i.object) obj = &f;
      if (!obj) fail(errc::invalid_spec, "interaction object '" + i.object + "' has no furniture");
      if (!obj->box.contains(i.point, 1e-9) || obj->box.face_distance(i.point) > 1e-6)
        fail(errc::invalid_spec, "interaction point not on the surface of '" + i.object + "'");
    }
  }
};

// ---------------------------------------------------------------------------
// Scene JSON

inline Vec3 vec3_from_json(const io::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline io::ojson vec3_to_json(const Vec3& v) { return io::ojson::array({v.x(), v.y(), v.z()}); }

inline SceneSpec spec_from_json(const io::json& j) {
  SceneSpec s;
  s.seed = j.value("seed", std::uint64_t{1});
  s.environment_id = j.value("environment_id", std::string("synth-kitchen"));
  if (j.contains("room")) {
    s.room.min = vec3_from_json(j.at("room").at("min"));
    s.room.max = vec3_from_json(j.at("room").at("max"));
  }
  if (j.contains("up_axis")) {
    std::string up = j.at("up_axis").get<std::string>();
    if (up == "x") s.up_axis = 0;
    else if (up == "y") s.up_axis = 1;
    else if (up == "z") s.up_axis = 2;
    else fail(errc::invalid_spec, "up_axis must be x, y or z");
  }
  if (j.contains("camera")) s.camera = io::camera_from_json(j.at("camera"));
  if (j.contains("vocabulary")) {
    const auto& v = j.at("vocabulary");
    if (v.is_string()) {
      std::string name = v.get<std::string>();
      if (name == "easy") s.vocabulary = Vocabulary::easy().classes();
      else if (name == "complex") s.vocabulary = Vocabulary::complex().classes();
      else fail(errc::invalid_spec, "unknown vocabulary preset '" + name + "'");
    } else {
      s.vocabulary = v.get<std::vector<std::string>>();
    }
  }
  for (const auto& f : j.value("furniture", io::json::array()))
    s.furniture.push_back({f.at("name").get<std::string>(),
                           {vec3_from_json(f.at("min")), vec3_from_json(f.at("max"))}});
  for (const auto& w : j.value("trajectory", io::json::array()))
    s.trajectory.push_back({vec3_from_json(w.at("position")), vec3_from_json(w.at("look_at"))});
  for (const auto& i : j.value("interactions", io::json::array()))
    s.interactions.push_back({i.at("frame").get<int>(), i.at("verb").get<std::string>(),
                              i.at("object").get<std::string>(), vec3_from_json(i.at("point"))});
  if (j.contains("network_depth_scale")) {
    const auto& v = j.at("network_depth_scale");
    if (v.is_array()) s.network_depth_scales = v.get<std::vector<double>>();
    else s.network_depth_scales = {v.get<double>()};
  }
  s.sparse_pixel_step = j.value("sparse_pixel_step", 8);
  s.mask_sigma_px = j.value("mask_sigma_px", 0.0);
  s.mask_tau = j.value("mask_tau", 0.25);
  s.hand_box_px = j.value("hand_box_px", 40.0);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    s.noise.pose_jitter_rad = n.value("pose_jitter_rad", 0.0);
    s.noise.pose_jitter_m = n.value("pose_jitter_m", 0.0);
    s.noise.depth_noise = n.value("depth_noise", 0.0);
    s.noise.bbox_jitter_px = n.value("bbox_jitter_px", 0.0);
  }
  s.validate();
  return s;
}

inline io::ojson spec_to_json(const SceneSpec& s) {
  io::ojson furniture = io::ojson::array();
  for (const auto& f : s.furniture)
    furniture.push_back({{"name", f.name},
                         {"min", vec3_to_json(f.box.min)},
                         {"max", vec3_to_json(f.box.max)}});
  io::ojson trajectory = io::ojson::array();
  for (const auto& w : s.trajectory)
    trajectory.push_back(
        {{"position", vec3_to_json(w.position)}, {"look_at", vec3_to_json(w.look_at)}});
  io::ojson interactions = io::ojson::array();
  for (const auto& i : s.interactions)
    interactions.push_back({{"frame", i.frame},
                            {"verb", i.verb},
                            {"object", i.object},
                            {"point", vec3_to_json(i.point)}});
  const char* axes[3] = {"x", "y", "z"};
  return io::ojson{
      {"seed", s.seed},
      {"environment_id", s.environment_id},
      {"room", {{"min", vec3_to_json(s.room.min)}, {"max", vec3_to_json(s.room.max)}}},
      {"up_axis", axes[s.up_axis]},
      {"camera",
       {{"fx", s.camera.fx},
        {"fy", s.camera.fy},
        {"cx", s.camera.cx},
        {"cy", s.camera.cy},
        {"width", s.camera.width},
        {"height", s.camera.height}}},
      {"vocabulary", s.vocabulary},
      {"furniture", furniture},
      {"trajectory", trajectory},
      {"interactions", interactions},
      {"network_depth_scale", s.network_depth_scales},
      {"sparse_pixel_step", s.sparse_pixel_step},
      {"mask_sigma_px", s.mask_sigma_px},
      {"mask_tau", s.mask_tau},
      {"hand_box_px", s.hand_box_px},
      {"noise",
       {{"pose_jitter_rad", s.noise.pose_jitter_rad},
        {"pose_jitter_m", s.noise.pose_jitter_m},
        {"depth_noise", s.noise.depth_noise},
        {"bbox_jitter_px", s.noise.bbox_jitter_px}}}};
}

// ---------------------------------------------------------------------------
// Rendering

// Camera pose looking from `position` toward `look_at`, image v axis pointing
// down along the world up axis.
inline Pose look_at_pose(const Vec3& position, const Vec3& target, int up_axis) {
  Vec3 up = Vec3::Zero();
  up[up_axis] = 1.0;
  Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    // Looking straight up/down: pick any horizontal right axis.
    right = Vec3::Zero();
    right[(up_axis + 1) % 3] = 1.0;
    right -= forward * forward.dot(right);
  }
  right.normalize();
  Vec3 down = forward.cross(right);
  Pose p;
  p.rotation.col(0) = right;
  p.rotation.col(1) = down;
  p.rotation.col(2) = forward;
  p.translation = position;
  return p;
}

// Everything the pipeline consumes plus the ground truth it should produce.
struct Bundle {
  SceneSpec spec;
  Vocabulary vocabulary;
  std::vector<FrameContext> frames;  // reported (possibly jittered) poses
  std::map<std::int64_t, std::vector<interaction::Detection>> detections;
  std::vector<interaction::NarrationRecord> narrations;
  std::vector<Vec3> cloud;
  std::vector<double> true_scales;
  std::vector<Pose> true_poses;

  std::vector<interaction::InteractionEvent> gt_events;
  labelgen::AffordanceHistory gt_history;
  std::vector<MultiLabelMask> gt_masks;
  mapping::AffordanceMap3D gt_map;
};

namespace detail {

// Depth along the pixel ray (camera-frame z): nearest furniture entry, else
// the room wall behind.
inline double analytic_depth(const SceneSpec& spec, const Pose& pose, double px, double py) {
  Vec3 dir_c((px - spec.camera.cx) / spec.camera.fx, (py - spec.camera.cy) / spec.camera.fy, 1.0);
  Vec3 o = pose.translation;
  Vec3 d = pose.rotation * dir_c;
  double best = std::numeric_limits<double>::infinity();
  for (const FurnitureBox& f : spec.furniture) {
    auto hit = ray_box(o, d, f.box);
    if (hit && hit->second > 1e-9) {
      double t = std::max(hit->first, 0.0);
      if (t > 1e-9) best = std::min(best, t);
    }
  }
  auto room_hit = ray_box(o, d, spec.room);
  if (!room_hit || room_hit->second <= 0)
    fail(errc::invalid_spec, "camera ray misses the room (camera outside?)");
  return std::min(best, room_hit->second);
}

// Projected bounding box of a furniture piece, clamped to the image, or
// nothing when it is behind the camera or fully outside the frame.
inline std::optional<interaction::BBox> project_box(const SceneSpec& spec, const Pose& pose,
                                                    const Aabb& box) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 p(corner & 1 ? box.max.x() : box.min.x(), corner & 2 ? box.max.y() : box.min.y(),
           corner & 4 ? box.max.z() : box.min.z());
    Vec3 c = pose.to_camera(p);
    if (c.z() <= 1e-9) return std::nullopt;
    double u = spec.camera.fx * c.x() / c.z() + spec.camera.cx;
    double v = spec.camera.fy * c.y() / c.z() + spec.camera.cy;
    x0 = std::min(x0, u);
    x1 = std::max(x1, u);
    y0 = std::min(y0, v);
    y1 = std::max(y1, v);
  }
  if (x1 < 0 || y1 < 0 || x0 > spec.camera.width - 1.0 || y0 > spec.camera.height - 1.0)
    return std::nullopt;
  return interaction::BBox{x0, y0, x1, y1}.clamped(spec.camera.width, spec.camera.height);
}

inline interaction::BBox jitter_box(const interaction::BBox& b, double amount, Rng& rng,
                                    const CameraIntrinsics& cam) {
  if (amount <= 0) return b;
  interaction::BBox out{b.x_min + rng.uniform(-amount, amount),
                        b.y_min + rng.uniform(-amount, amount),
                        b.x_max + rng.uniform(-amount, amount),
                        b.y_max + rng.uniform(-amount, amount)};
  if (out.x_min > out.x_max) std::swap(out.x_min, out.x_max);
  if (out.y_min > out.y_max) std::swap(out.y_min, out.y_max);
  return out.clamped(cam.width, cam.height);
}

}  // namespace detail

inline Bundle render(const SceneSpec& spec) {
  spec.validate();
  Bundle b;
  b.spec = spec;
  b.vocabulary = Vocabulary(spec.vocabulary);
  const size_t n_frames = spec.trajectory.size();
  const CameraIntrinsics& cam = spec.camera;

  // True poses, then the reported (jittered) poses the pipeline sees.
  std::vector<Pose> reported(n_frames);
  b.true_poses.resize(n_frames);
  for (size_t f = 0; f < n_frames; ++f) {
    b.true_poses[f] = look_at_pose(spec.trajectory[f].position, spec.trajectory[f].look_at,
                                   spec.up_axis);
    Pose p = b.true_poses[f];
    if (spec.noise.pose_jitter_rad > 0 || spec.noise.pose_jitter_m > 0) {
      Rng rot = stream(spec.seed, 1, f);
      Vec3 axis(rot.uniform(-1, 1), rot.uniform(-1, 1), rot.uniform(-1, 1));
      if (axis.norm() < 1e-9) axis = Vec3(1, 0, 0);
      double angle = rot.uniform(-spec.noise.pose_jitter_rad, spec.noise.pose_jitter_rad);
      p.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() * p.rotation;
      Rng tr = stream(spec.seed, 2, f);
      p.translation += Vec3(tr.uniform(-spec.noise.pose_jitter_m, spec.noise.pose_jitter_m),
                            tr.uniform(-spec.noise.pose_jitter_m, spec.noise.pose_jitter_m),
                            tr.uniform(-spec.noise.pose_jitter_m, spec.noise.pose_jitter_m));
    }
    reported[f] = p;
  }

  // Dense depth, sparse SfM depths, per-frame scale.
  b.frames.resize(n_frames);
  b.true_scales.resize(n_frames);
  parallel_for(n_frames, 0, [&](size_t f) {
    const Pose& true_pose = b.true_poses[f];
    double s = spec.scale_for_frame(f);
    b.true_scales[f] = s;
    Image<float> dense = Image<float>::zeros(cam.height, cam.width);
    Rng noise = stream(spec.seed, 3, f);
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        double t = detail::analytic_depth(spec, true_pose, x, y);
        double network = t / s;
        if (spec.noise.depth_noise > 0)
          network *= 1.0 + noise.uniform(-spec.noise.depth_noise, spec.noise.depth_noise);
        dense.at(y, x) = static_cast<float>(network);
      }
    }
    // SfM measurements on an integer pixel lattice. The metric depth is the
    // clean network depth rescaled, so a zero-noise bundle recovers the
    // planted scale exactly.
    std::vector<SparseDepth> sparse;
    int step = std::max(1, spec.sparse_pixel_step);
    for (int y = step / 2; y < cam.height; y += step) {
      for (int x = step / 2; x < cam.width; x += step) {
        double t = detail::analytic_depth(spec, true_pose, x, y);
        double clean_network = static_cast<double>(static_cast<float>(t / s));
        sparse.push_back({Vec2(x, y), s * clean_network});
      }
    }
    FrameContext ctx;
    ctx.frame_id = static_cast<std::int64_t>(f);
    ctx.intrinsics = cam;
    ctx.pose = reported[f];
    ctx.depth = {std::move(dense), std::move(sparse)};
    ctx.scale = scale_correction(ctx.depth);
    b.frames[f] = std::move(ctx);
  });

  // Global SfM cloud: the lattice points of every frame in world coordinates.
  for (size_t f = 0; f < n_frames; ++f)
    for (const SparseDepth& s : b.frames[f].depth.sparse)
      b.cloud.push_back(unproject(s.pixel, s.depth_m, b.true_poses[f], cam));

  // Detections: furniture projections everywhere, one hand box per scripted
  // interaction. Ground truth keeps the unjittered boxes.
  std::map<std::int64_t, std::vector<interaction::Detection>> clean_dets;
  for (size_t f = 0; f < n_frames; ++f) {
    std::vector<interaction::Detection> dets;
    for (const FurnitureBox& fur : spec.furniture)
      if (auto box = detail::project_box(spec, b.true_poses[f], fur.box))
        dets.push_back({fur.name, *box});
    clean_dets[static_cast<std::int64_t>(f)] = std::move(dets);
  }
  for (const ScriptedInteraction& i : spec.interactions) {
    const Pose& pose = b.true_poses[i.frame];
    Vec3 c = pose.to_camera(i.point);
    if (c.z() <= 0) fail(errc::invalid_spec, "interaction point behind its own camera");
    Vec2 px(cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy);
    if (!cam.contains(px)) fail(errc::invalid_spec, "interaction point outside its own frame");
    double h = spec.hand_box_px / 2.0;
    double hx = std::round(px.x()), hy = std::round(px.y());
    interaction::BBox hand =
        interaction::BBox{hx - h, hy - h, hx + h, hy + h}.clamped(cam.width, cam.height);
    clean_dets[i.frame].push_back({interaction::kHandClass, hand});
    b.narrations.push_back({i.frame, i.verb, i.object});
  }
  if (spec.noise.bbox_jitter_px > 0) {
    for (auto& [frame_id, dets] : clean_dets) {
      Rng rng = stream(spec.seed, 4, static_cast<std::uint64_t>(frame_id));
      std::vector<interaction::Detection> noisy;
      noisy.reserve(dets.size());
      for (const auto& d : dets)
        noisy.push_back({d.cls, detail::jitter_box(d.box, spec.noise.bbox_jitter_px, rng, cam)});
      b.detections[frame_id] = std::move(noisy);
    }
  } else {
    b.detections = clean_dets;
  }

  // Ground truth. Events use the same center rule the pipeline applies to the
  // clean boxes; the 3D point follows the pixel ray of the rounded event
  // pixel down to the analytic surface, rescaled through the f32 depth grid
  // the pipeline reads.
  b.gt_history.environment_id = spec.environment_id;
  b.gt_map.environment_id = spec.environment_id;
  b.gt_map.classes = spec.vocabulary;
  for (const ScriptedInteraction& i : spec.interactions) {
    const auto& dets = clean_dets[i.frame];
    const interaction::BBox* hand = nullptr;
    const interaction::BBox* object = nullptr;
    for (const auto& d : dets) {
      if (d.cls == interaction::kHandClass && !hand) hand = &d.box;
      if (d.cls == i.object) object = &d.box;
    }
    if (!hand || !object || !hand->intersects(*object))
      fail(errc::invalid_spec, "scripted interaction produces no box intersection");
    Vec2 center = interaction::interaction_center(*hand, *object);
    double s = spec.scale_for_frame(i.frame);
    double t = detail::analytic_depth(spec, b.true_poses[i.frame], std::round(center.x()),
                                      std::round(center.y()));
    double metric = s * static_cast<double>(static_cast<float>(t / s));
    Vec3 world = unproject(center, metric, b.true_poses[i.frame], cam);

    b.gt_events.push_back({i.frame, i.verb, i.object, center});
    b.gt_history.append({world, i.verb, i.object, i.frame});
    mapping::MapPoint mp;
    mp.position = world;
    mp.class_mask = std::uint64_t{1} << b.vocabulary.index_of(i.verb);
    mp.source_frame = i.frame;
    mp.object_id = b.gt_map.object_id(i.object);
    b.gt_map.points.push_back(mp);
  }

  // Independent rasterization of the expected masks: project each ground
  // truth interaction with the true poses, filter by object presence, splat
  // truncated Gaussians, normalize per class, threshold.
  double sigma = spec.sigma();
  double cutoff2 = labelgen::kGaussianCutoffSigmas * labelgen::kGaussianCutoffSigmas * sigma *
                  sigma;
  b.gt_masks.resize(n_frames);
  for (size_t f = 0; f < n_frames; ++f) {
    std::set<std::string> present;
    for (const auto& d : clean_dets[static_cast<std::int64_t>(f)])
      if (d.cls != interaction::kHandClass) present.insert(d.cls);

    Heatmap heat = Heatmap::zeros(spec.vocabulary, cam.height, cam.width);
    for (const labelgen::Interaction3D& it : b.gt_history.interactions) {
      if (!present.count(it.object)) continue;
      Vec3 c = b.true_poses[f].to_camera(it.world_point);
      if (c.z() <= 0) continue;
      Vec2 px(cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy);
      if (!cam.contains(px)) continue;
      int k = b.vocabulary.index_of(it.verb);
      for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
          double dx = x - px.x(), dy = y - px.y();
          double r2 = dx * dx + dy * dy;
          if (r2 > cutoff2) continue;
          heat.at(k, y, x) += static_cast<float>(std::exp(-r2 / (2.0 * sigma * sigma)));
        }
      }
    }
    for (int k = 0; k < heat.num_classes(); ++k) {
      auto plane = heat.plane(k);
      float mx = 0.f;
      for (float v : plane) mx = std::max(mx, v);
      if (mx > 0.f)
        for (float& v : plane) v /= mx;
    }
    MultiLabelMask mask = MultiLabelMask::zeros(spec.vocabulary, cam.height, cam.width);
    for (size_t i = 0; i < heat.values.size(); ++i)
      mask.values[i] = heat.values[i] > static_cast<float>(spec.mask_tau) ? 1 : 0;
    b.gt_masks[f] = std::move(mask);
  }
  return b;
}

// File layout consumed by the CLI commands; see README for the map of files.
inline void write_bundle(const Bundle& b, const io::fs::path& dir) {
  io::fs::create_directories(dir);
  io::write_json_file(dir / "scene.json", spec_to_json(b.spec));
  io::write_camera(dir / "camera.json", b.spec.camera);

  std::map<std::int64_t, Pose> poses;
  std::map<std::int64_t, std::vector<SparseDepth>> sparse;
  io::JsonlWriter manifest(dir / "frames.jsonl");
  char name[32];
  for (const FrameContext& f : b.frames) {
    poses[f.frame_id] = f.pose;
    sparse[f.frame_id] = f.depth.sparse;
    std::snprintf(name, sizeof name, "%06lld.f32", static_cast<long long>(f.frame_id));
    io::write_depth_image(dir / "depth" / name, f.depth.dense);
    manifest.write({{"frame_id", f.frame_id}, {"depth", std::string("depth/") + name}});
  }
  io::write_poses(dir / "poses.jsonl", poses);
  io::write_sparse_depths(dir / "sparse_depth.jsonl", sparse);
  io::write_narrations(dir / "narrations.jsonl", b.narrations);
  io::write_detections(dir / "detections.jsonl", b.detections);
  io::write_cloud(dir / "sfm_points.jsonl", b.cloud);

  io::write_events(dir / "gt" / "events.jsonl", b.gt_events);
  io::write_history(dir / "gt" / "history.jsonl", b.gt_history);
  for (size_t f = 0; f < b.gt_masks.size(); ++f) {
    std::snprintf(name, sizeof name, "%06zu.u8", f);
    io::write_mask(dir / "gt" / "masks" / name, b.gt_masks[f], static_cast<std::int64_t>(f));
  }
  io::write_map_ply(dir / "gt" / "map.ply", b.gt_map);
  io::ojson scales = io::ojson::array();
  for (double s : b.true_scales) scales.push_back(s);
  io::write_json_file(dir / "gt" / "scales.json", io::ojson{{"true_scales", scales}});
}

// Desk-scale kitchen used across the tests and the README walkthrough:
// three frames, two interactions, the 20-class vocabulary.
inline SceneSpec demo_scene() {
  SceneSpec s;
  s.seed = 7;
  s.environment_id = "demo-kitchen";
  s.room = {Vec3(0, 0, 0), Vec3(4, 2.5, 3)};
  s.up_axis = 1;  // y up, ground plane xz
  s.furniture = {
      {"sink", {Vec3(0.2, 0.70, 2.40), Vec3(1.0, 0.95, 3.0)}},
      {"hob", {Vec3(1.6, 0.70, 2.50), Vec3(2.6, 0.95, 3.0)}},
      {"cupboard", {Vec3(3.2, 0.0, 2.20), Vec3(4.0, 1.8, 3.0)}},
  };
  s.trajectory = {
      {Vec3(0.8, 1.60, 1.00), Vec3(0.6, 0.95, 2.70)},
      {Vec3(2.1, 1.60, 1.20), Vec3(2.1, 0.95, 2.75)},
      {Vec3(1.3, 1.70, 0.80), Vec3(1.5, 0.95, 2.70)},
  };
  s.interactions = {
      {0, "wash", "sink", Vec3(0.6, 0.95, 2.70)},
      {1, "turn-on", "hob", Vec3(2.1, 0.95, 2.75)},
  };
  s.network_depth_scales = {2.5};
  return s;
}

}  // namespace affmap::synth
