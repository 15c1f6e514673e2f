// affmap: egocentric affordance labelling, mapping, and planning toolkit.
//
// Subcommands: synth, extract-labels, postprocess, build-map, evaluate, plan.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affmap/affmap.hpp"

using namespace affmap;
namespace fs = std::filesystem;

namespace {

Vocabulary load_vocabulary(const std::string& spec) {
  if (spec == "easy") return Vocabulary::easy();
  if (spec == "complex") return Vocabulary::complex();
  if (!fs::exists(spec))
    fail(errc::usage_error, "vocabulary '" + spec + "' is neither a preset nor a file");
  io::json j = io::read_json_file(spec);
  if (j.is_array()) return Vocabulary(j.get<std::vector<std::string>>());
  return Vocabulary(j.at("classes").get<std::vector<std::string>>());
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) fail(errc::usage_error, std::string("missing required ") + what + " path");
  if (!fs::exists(path))
    fail(errc::usage_error, std::string(what) + " file missing: '" + path + "'");
}

std::string frame_file(std::int64_t frame_id, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld.%s", static_cast<long long>(frame_id), ext);
  return buf;
}

// Common input set shared by extract-labels and build-map. --bundle fills any
// path left unset with the synth bundle layout.
struct BundleInputs {
  std::string bundle, camera, poses, frames, sparse, narrations, detections, cloud;

  void add_flags(CLI::App* cmd, bool with_events_inputs, bool with_cloud) {
    cmd->add_option("--bundle", bundle, "input bundle directory (fills unset paths)");
    cmd->add_option("--camera", camera, "camera intrinsics JSON");
    cmd->add_option("--poses", poses, "world-from-camera poses JSONL");
    cmd->add_option("--frames", frames, "frame manifest JSONL {frame_id, depth}");
    cmd->add_option("--sparse", sparse, "sparse SfM depths JSONL");
    if (with_events_inputs) {
      cmd->add_option("--narrations", narrations, "narrations JSONL");
      cmd->add_option("--detections", detections, "detections JSONL");
    }
    if (with_cloud) cmd->add_option("--cloud", cloud, "SfM point cloud JSONL");
  }

  void resolve() {
    auto fill = [&](std::string& path, const char* name) {
      if (path.empty() && !bundle.empty()) path = (fs::path(bundle) / name).string();
    };
    fill(camera, "camera.json");
    fill(poses, "poses.jsonl");
    fill(frames, "frames.jsonl");
    fill(sparse, "sparse_depth.jsonl");
    fill(narrations, "narrations.jsonl");
    fill(detections, "detections.jsonl");
    fill(cloud, "sfm_points.jsonl");
  }
};

struct LoadedFrame {
  FrameContext ctx;
  std::optional<std::string> error;  // scale/depth problems; frame is skipped
};

std::vector<LoadedFrame> load_frames(const BundleInputs& in, ScaleMethod scale_method) {
  require_file(in.camera, "camera");
  require_file(in.poses, "poses");
  require_file(in.frames, "frame manifest");
  require_file(in.sparse, "sparse depths");
  CameraIntrinsics camera = io::read_camera(in.camera);
  auto poses = io::read_poses(in.poses);
  auto sparse = io::read_sparse_depths(in.sparse);
  fs::path base = fs::path(in.frames).parent_path();

  std::vector<LoadedFrame> frames;
  for (const io::json& row : io::read_jsonl(in.frames)) {
    LoadedFrame f;
    f.ctx.frame_id = row.at("frame_id").get<std::int64_t>();
    f.ctx.intrinsics = camera;
    auto pose_it = poses.find(f.ctx.frame_id);
    if (pose_it == poses.end())
      fail(errc::io_error, "no pose for frame " + std::to_string(f.ctx.frame_id));
    f.ctx.pose = pose_it->second;
    f.ctx.depth.dense = io::read_depth_image(base / row.at("depth").get<std::string>());
    if (auto it = sparse.find(f.ctx.frame_id); it != sparse.end()) f.ctx.depth.sparse = it->second;
    try {
      f.ctx.scale = scale_correction(f.ctx.depth, scale_method);
    } catch (const Error& e) {
      f.error = e.what();
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

ScaleMethod parse_scale_method(const std::string& s) {
  if (s == "ratio-of-medians") return ScaleMethod::ratio_of_medians;
  if (s == "median-of-ratios") return ScaleMethod::median_of_ratios;
  fail(errc::usage_error, "scale method must be ratio-of-medians or median-of-ratios");
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              const std::string& demo_spec_path, std::int64_t seed_override) {
  if (!demo_spec_path.empty())
    io::write_json_file(demo_spec_path, synth::spec_to_json(synth::demo_scene()));
  if (out_dir.empty()) {
    if (demo_spec_path.empty())
      fail(errc::usage_error, "synth needs --out (and --spec) or --demo-spec");
    return 0;
  }
  synth::SceneSpec spec;
  if (!spec_path.empty()) {
    require_file(spec_path, "scene spec");
    spec = synth::spec_from_json(io::read_json_file(spec_path));
  } else {
    spec = synth::demo_scene();
  }
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  synth::Bundle bundle = synth::render(spec);
  synth::write_bundle(bundle, out_dir);
  std::cout << "synth: " << bundle.frames.size() << " frames, " << bundle.gt_events.size()
            << " interactions, " << bundle.cloud.size() << " cloud points -> " << out_dir << "\n";
  return 0;
}

int cmd_extract_labels(const BundleInputs& in, const std::string& vocab_spec,
                       const std::string& out_dir, double sigma, double tau,
                       double occlusion_margin, const std::string& scale_method, bool rle,
                       int threads) {
  require_file(in.camera, "camera");
  require_file(in.poses, "poses");
  require_file(in.frames, "frame manifest");
  require_file(in.sparse, "sparse depths");
  require_file(in.narrations, "narrations");
  require_file(in.detections, "detections");
  Vocabulary vocab = load_vocabulary(vocab_spec);
  std::vector<LoadedFrame> frames = load_frames(in, parse_scale_method(scale_method));
  CameraIntrinsics camera = io::read_camera(in.camera);
  auto narrations = io::read_narrations(in.narrations);
  auto detections = io::read_detections(in.detections, camera.width, camera.height);

  for (const auto& n : narrations)
    if (!vocab.contains(n.verb))
      fail(errc::vocab_mismatch, "narration verb '" + n.verb + "' not in vocabulary");

  interaction::ExtractionSummary summary;
  auto events = interaction::extract_events(narrations, detections, &summary);

  std::map<std::int64_t, size_t> frame_index;
  for (size_t i = 0; i < frames.size(); ++i) frame_index[frames[i].ctx.frame_id] = i;

  labelgen::AffordanceHistory history;
  history.environment_id = fs::path(out_dir).filename().string();
  size_t skipped_lift = 0;
  std::vector<std::string> lift_errors;
  for (const auto& e : events) {
    auto it = frame_index.find(e.frame_id);
    if (it == frame_index.end() || frames[it->second].error) {
      ++skipped_lift;
      lift_errors.push_back("event at frame " + std::to_string(e.frame_id) +
                            ": frame unavailable");
      continue;
    }
    try {
      history.append(labelgen::lift_event(e, frames[it->second].ctx));
    } catch (const Error& err) {
      ++skipped_lift;
      lift_errors.push_back("event at frame " + std::to_string(e.frame_id) + ": " + err.what());
    }
  }

  io::write_events(fs::path(out_dir) / "events.jsonl", events);
  io::write_history(fs::path(out_dir) / "history.jsonl", history);

  std::vector<labelgen::LabelFrame> label_frames;
  std::vector<std::optional<std::string>> load_errors;
  for (const LoadedFrame& f : frames) {
    std::set<std::string> present;
    if (auto it = detections.find(f.ctx.frame_id); it != detections.end())
      for (const auto& d : it->second)
        if (d.cls != interaction::kHandClass) present.insert(d.cls);
    label_frames.push_back({f.ctx, std::move(present)});
    load_errors.push_back(f.error);
  }
  labelgen::GenerateParams params;
  params.sigma_px = sigma;
  params.tau = tau;
  params.occlusion_margin_m = occlusion_margin;
  params.workers = worker_count(threads);
  auto results = labelgen::generate_labels(history, label_frames, vocab, params);

  size_t out_of_view = 0, occluded = 0, frame_errors = 0;
  io::ojson error_list = io::ojson::array();
  for (size_t i = 0; i < results.size(); ++i) {
    labelgen::FrameLabels& r = results[i];
    if (load_errors[i] && !r.error) r.error = load_errors[i];  // scale failure wins
    if (r.error) {
      ++frame_errors;
      error_list.push_back({{"frame_id", r.frame_id}, {"error", *r.error}});
      r.mask = MultiLabelMask::zeros(vocab.classes(), camera.height, camera.width);
    }
    out_of_view += r.stats.behind_camera + r.stats.out_of_bounds;
    occluded += r.stats.occluded;
    fs::path mask_path = fs::path(out_dir) / "masks" / frame_file(r.frame_id, "u8");
    io::write_mask(mask_path, r.mask, r.frame_id);
    if (rle)
      io::write_mask_rle(fs::path(out_dir) / "masks" / frame_file(r.frame_id, "rle.json"),
                         r.mask, r.frame_id);
  }

  io::ojson skipped = io::ojson::array();
  for (const auto& s : summary.skipped) skipped.push_back(s);
  for (const auto& s : lift_errors) skipped.push_back(s);
  io::write_json_file(fs::path(out_dir) / "summary.json",
                      io::ojson{{"narrations", narrations.size()},
                                {"events", summary.events},
                                {"missing_hand", summary.missing_hand},
                                {"missing_object", summary.missing_object},
                                {"no_intersection", summary.no_intersection},
                                {"skipped_lift", skipped_lift},
                                {"frames", frames.size()},
                                {"frame_errors", frame_errors},
                                {"out_of_view_reprojections", out_of_view},
                                {"occluded_reprojections", occluded},
                                {"frame_error_list", error_list},
                                {"skipped_events", skipped}});
  std::cout << "extract-labels: " << summary.events << " events, "
            << summary.missing_hand + summary.missing_object + summary.no_intersection +
                   skipped_lift
            << " skipped, " << frames.size() << " masks -> " << out_dir << "\n";
  return 0;
}

int cmd_postprocess(const std::string& in_path, const std::string& out_path,
                    const std::string& manifest, const std::string& heuristic_name, int k,
                    double theta, double theta_d) {
  multilabel::Heuristic h = multilabel::parse_heuristic(heuristic_name);
  double param = 0;
  switch (h) {
    case multilabel::Heuristic::topk: param = k; break;
    case multilabel::Heuristic::max_theta: param = theta; break;
    case multilabel::Heuristic::dyn_theta: param = theta_d; break;
    case multilabel::Heuristic::bernoulli: break;
  }
  std::vector<std::pair<std::string, std::string>> jobs;
  if (!manifest.empty()) {
    require_file(manifest, "manifest");
    fs::path base = fs::path(manifest).parent_path();
    for (const io::json& row : io::read_jsonl(manifest))
      jobs.emplace_back((base / row.at("in").get<std::string>()).string(),
                        (base / row.at("out").get<std::string>()).string());
  } else {
    require_file(in_path, "probability field");
    if (out_path.empty()) fail(errc::usage_error, "missing --out path");
    jobs.emplace_back(in_path, out_path);
  }
  for (const auto& [src, dst] : jobs) {
    multilabel::ProbabilityField field = io::read_probability_field(src);
    field.validate();
    io::write_label_field(dst, multilabel::apply_heuristic(field, h, param));
  }
  std::cout << "postprocess: " << jobs.size() << " field(s) via " << heuristic_name << "\n";
  return 0;
}

int cmd_build_map(const BundleInputs& in, const std::string& masks_dir,
                  const std::string& history_path, const std::string& out_dir, int stride,
                  double cell_size, int min_points, double band_min, double band_max,
                  const std::string& plane_name, double height_ref_flag,
                  const std::string& env_id, const std::string& scale_method, int threads) {
  require_file(masks_dir, "masks directory");
  require_file(in.cloud, "point cloud");
  std::vector<LoadedFrame> frames = load_frames(in, parse_scale_method(scale_method));
  std::vector<Vec3> cloud = io::read_cloud(in.cloud);
  mapping::GroundPlane plane = mapping::parse_ground_plane(plane_name);

  mapping::AffordanceMap3D map;
  map.environment_id = env_id;

  // Sequential mask reads, parallel lifts; batches merge in manifest order.
  std::vector<MultiLabelMask> masks(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].error) continue;
    fs::path mask_path = fs::path(masks_dir) / frame_file(frames[i].ctx.frame_id, "u8");
    require_file(mask_path.string(), "mask");
    masks[i] = io::read_mask(mask_path).first;
    if (map.classes.empty()) map.classes = masks[i].classes;
    else if (masks[i].classes != map.classes)
      fail(errc::vocab_mismatch, "mask vocabularies differ across frames");
  }
  std::vector<std::vector<mapping::MapPoint>> batches(frames.size());
  std::vector<mapping::LiftStats> stats(frames.size());
  parallel_for(frames.size(), worker_count(threads), [&](size_t i) {
    if (frames[i].error) return;
    batches[i] = mapping::lift_mask(masks[i], frames[i].ctx, stride, &stats[i]);
  });
  for (const auto& batch : batches) mapping::accumulate(map, batch);

  size_t history_points = 0;
  if (!history_path.empty()) {
    require_file(history_path, "history");
    Vocabulary vocab{map.classes};
    for (const auto& i : io::read_history(history_path).interactions) {
      int k = vocab.index_of(i.verb);
      if (k < 0) fail(errc::vocab_mismatch, "history verb '" + i.verb + "' not in mask classes");
      mapping::MapPoint p;
      p.position = i.world_point;
      p.class_mask = std::uint64_t{1} << k;
      p.source_frame = i.source_frame;
      p.object_id = map.object_id(i.object);
      map.points.push_back(p);
      ++history_points;
    }
  }

  mapping::OccupancyConfig cfg;
  cfg.cell_size = cell_size;
  cfg.min_points = min_points;
  cfg.band_min = band_min;
  cfg.band_max = band_max;
  cfg.plane = plane;
  if (height_ref_flag != std::numeric_limits<double>::infinity()) {
    cfg.height_reference = height_ref_flag;
  } else {
    // Default reference: the lowest camera along the up axis.
    double lowest = std::numeric_limits<double>::infinity();
    for (const LoadedFrame& f : frames) {
      double h = plane == mapping::GroundPlane::xz ? f.ctx.pose.translation.y()
                                                   : f.ctx.pose.translation.z();
      lowest = std::min(lowest, h);
    }
    cfg.height_reference = frames.empty() ? 0.0 : lowest;
  }
  mapping::OccupancyGrid grid = mapping::to_occupancy(map, cloud, cfg);

  io::write_map_ply(fs::path(out_dir) / "map.ply", map);
  io::write_occupancy(fs::path(out_dir) / "occupancy.json", grid);
  io::write_pgm(fs::path(out_dir) / "occupancy.pgm", io::occupancy_to_image(grid));
  size_t lifted = 0, skipped = 0;
  for (const auto& s : stats) {
    lifted += s.lifted;
    skipped += s.skipped_invalid_depth;
  }
  io::write_json_file(fs::path(out_dir) / "summary.json",
                      io::ojson{{"map_points", map.points.size()},
                                {"lifted_pixels", lifted},
                                {"history_points", history_points},
                                {"skipped_invalid_depth", skipped},
                                {"grid_rows", grid.rows},
                                {"grid_cols", grid.cols},
                                {"height_reference", cfg.height_reference}});
  std::cout << "build-map: " << map.points.size() << " points, grid " << grid.rows << "x"
            << grid.cols << " -> " << out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& manifest, const std::string& pred_path,
                 const std::string& gt_path, const std::string& scores_path,
                 const std::string& out_json, const std::string& out_table,
                 const std::string& loss_name, double gamma_plus, double gamma_minus,
                 const std::string& weights_path) {
  // Loss mode: print the scalar and stop.
  if (!loss_name.empty()) {
    require_file(pred_path, "prediction field");
    require_file(gt_path, "label field");
    multilabel::ProbabilityField P = io::read_probability_field(pred_path);
    LabelField Y = io::read_label_field(gt_path);
    losses::LossConfig cfg;
    cfg.gamma_plus = gamma_plus;
    cfg.gamma_minus = gamma_minus;
    if (!weights_path.empty()) {
      require_file(weights_path, "weights");
      cfg.class_weights = io::read_json_file(weights_path).get<std::vector<double>>();
    }
    double value;
    if (loss_name == "asym") {
      value = losses::asym_loss(P, Y, cfg);
    } else if (loss_name == "bce") {
      value = losses::weighted_bce(P, Y, cfg.class_weights, cfg.epsilon);
    } else {
      fail(errc::usage_error, "--loss must be asym or bce");
    }
    std::cout.precision(17);
    std::cout << value << "\n";
    return 0;
  }

  struct Row {
    std::string labels, gt, scores;
  };
  std::vector<Row> rows;
  if (!manifest.empty()) {
    require_file(manifest, "manifest");
    fs::path base = fs::path(manifest).parent_path();
    for (const io::json& r : io::read_jsonl(manifest)) {
      Row row;
      row.labels = (base / r.at("labels").get<std::string>()).string();
      row.gt = (base / r.at("gt").get<std::string>()).string();
      if (r.contains("scores")) row.scores = (base / r.at("scores").get<std::string>()).string();
      rows.push_back(row);
    }
  } else {
    require_file(pred_path, "prediction");
    require_file(gt_path, "ground truth");
    rows.push_back({pred_path, gt_path, scores_path});
  }
  if (rows.empty()) fail(errc::io_error, "evaluation manifest is empty");

  std::optional<metrics::SegAccumulator> seg;
  std::optional<metrics::APAccumulator> ap;
  metrics::SaliencyAccumulator saliency;
  for (const Row& row : rows) {
    auto [pred, pred_frame] = io::read_mask(row.labels);
    auto [gt, gt_frame] = io::read_mask(row.gt);
    if (pred.classes != gt.classes)
      fail(errc::vocab_mismatch, "prediction and ground truth vocabularies differ");
    if (!seg) {
      seg.emplace(gt.classes);
      ap.emplace(gt.classes);
    }
    seg->add(pred, gt);

    multilabel::ProbabilityField scores;
    if (!row.scores.empty()) {
      scores = io::read_probability_field(row.scores);
      if (scores.planes.classes != gt.classes)
        fail(errc::vocab_mismatch, "score and ground truth vocabularies differ");
    } else {
      scores.mode = multilabel::ProbabilityMode::bernoulli;
      scores.planes = ClassPlanes<float>::zeros(pred.classes, pred.height, pred.width);
      for (size_t i = 0; i < pred.values.size(); ++i)
        scores.planes.values[i] = pred.values[i] ? 1.f : 0.f;
    }
    ap->add(scores, gt);
    for (int k = 0; k < gt.num_classes(); ++k) saliency.add(scores.planes.plane(k), gt.plane(k));
  }

  metrics::EvalReport report;
  report.classes = seg->classes();
  report.per_class_iou = seg->per_class_iou();
  report.per_class_f1 = seg->per_class_f1();
  report.miou = seg->miou();
  report.f1 = seg->f1_macro();
  metrics::APResult ap_result = ap->finalize();
  report.per_class_ap = ap_result.per_class_ap;
  report.map = ap_result.map;
  report.ap50 = ap_result.ap50;
  report.kld = saliency.mean_kld();
  report.sim = saliency.mean_sim();
  report.auc_j = saliency.mean_auc();

  std::string table = io::format_report_table(report);
  std::cout << table;
  if (!out_json.empty()) io::write_json_file(out_json, io::report_to_json(report));
  if (!out_table.empty()) {
    auto out = io::open_output(out_table);
    out << table;
  }
  return 0;
}

int cmd_plan(const std::string& map_path, const std::string& grid_path, const std::string& verb,
             const std::string& object, const std::string& start, const std::string& start_cell,
             const std::string& plane_name, const std::string& out_dir) {
  require_file(map_path, "map");
  require_file(grid_path, "occupancy grid");
  mapping::AffordanceMap3D map = io::read_map_ply(map_path);
  mapping::OccupancyGrid grid =
      io::read_occupancy(grid_path, mapping::parse_ground_plane(plane_name));
  mapping::attach_points(grid, map);

  bool verb_known = false;
  for (const auto& c : map.classes) verb_known |= c == verb;
  if (!verb_known) fail(errc::usage_error, "verb '" + verb + "' not in the map vocabulary");

  planner::NavQuery query;
  query.verb = verb;
  if (!object.empty()) query.object = object;

  auto parse_pair = [](const std::string& s, const char* what) {
    auto comma = s.find(',');
    if (comma == std::string::npos)
      fail(errc::usage_error, std::string(what) + " must be 'a,b'");
    return std::pair<double, double>{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  };
  if (!start_cell.empty()) {
    auto [r, c] = parse_pair(start_cell, "--start-cell");
    query.start = {static_cast<int>(r), static_cast<int>(c)};
  } else if (!start.empty()) {
    auto [x, y] = parse_pair(start, "--start");
    auto [row, col] = grid.cell_of(Vec2(x, y));
    query.start = {row, col};
  } else {
    fail(errc::usage_error, "plan needs --start \"x,y\" or --start-cell \"r,c\"");
  }

  planner::NavResult nav = planner::navigate(grid, map, query);

  io::ojson cells = io::ojson::array();
  for (const auto& c : nav.path.cells) cells.push_back({c.row, c.col});
  io::write_json_file(fs::path(out_dir) / "path.json",
                      io::ojson{{"cells", cells}, {"cost_m", nav.path.cost_m}});
  io::write_json_file(
      fs::path(out_dir) / "trace.json",
      io::ojson{{"verb", verb},
                {"object", object.empty() ? io::ojson(nullptr) : io::ojson(object)},
                {"start", {query.start.row, query.start.col}},
                {"affordance_cell", {nav.affordance_cell.row, nav.affordance_cell.col}},
                {"goal", {nav.goal.row, nav.goal.col}},
                {"cells", cells},
                {"cost_m", nav.path.cost_m}});

  Image<std::uint8_t> overlay = io::occupancy_to_image(grid);
  for (const auto& c : nav.path.cells) overlay.at(c.row, c.col) = 160;
  overlay.at(query.start.row, query.start.col) = 64;
  overlay.at(nav.goal.row, nav.goal.col) = 208;
  io::write_pgm(fs::path(out_dir) / "overlay.pgm", overlay);

  std::cout << "plan: " << nav.path.cells.size() << " cells, cost " << nav.path.cost_m
            << " m -> " << out_dir << "\n";
  return 0;
}

// Splices `--key=value` pairs from a JSON config right after the subcommand
// token; explicit command-line flags still win through TakeLast.
std::vector<std::string> splice_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  require_file(config_path, "config");
  io::json cfg = io::read_json_file(config_path);
  if (!cfg.is_object()) fail(errc::usage_error, "config must be a JSON object");
  if (args.size() < 2 || args[1].rfind("-", 0) == 0)
    fail(errc::usage_error, "--config requires a subcommand");
  std::vector<std::string> spliced(args.begin(), args.begin() + 2);
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    if (value.is_array() || value.is_object())
      fail(errc::usage_error, "config key '" + key + "' must be a scalar");
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    spliced.push_back("--" + key + "=" + text);
  }
  spliced.insert(spliced.end(), args.begin() + 2, args.end());
  return spliced;
}

int run(int argc, char** argv) {
  CLI::App app{"egocentric affordance labelling, mapping and planning toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;  // consumed by splice_config; declared so CLI11 accepts it

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic ground-truth bundle");
  std::string synth_spec, synth_out, synth_demo;
  std::int64_t synth_seed = -1;
  synth_cmd->add_option("--spec", synth_spec, "scene spec JSON");
  synth_cmd->add_option("--out", synth_out, "output bundle directory");
  synth_cmd->add_option("--demo-spec", synth_demo, "write the built-in demo scene spec here");
  synth_cmd->add_option("--seed", synth_seed, "override the scene seed");
  synth_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  // extract-labels
  auto* extract_cmd = app.add_subcommand("extract-labels",
                                         "narrations + detections + geometry -> affordance masks");
  BundleInputs extract_in;
  extract_in.add_flags(extract_cmd, true, false);
  std::string extract_vocab = "easy", extract_out, extract_scale_method = "ratio-of-medians";
  double extract_sigma = 0.0, extract_tau = 0.25, extract_occlusion = 0.0;
  bool extract_rle = false;
  int extract_threads = 0;
  extract_cmd->add_option("--vocab", extract_vocab, "easy|complex|classes JSON");
  extract_cmd->add_option("--out", extract_out, "output directory")->required();
  extract_cmd->add_option("--sigma", extract_sigma, "heatmap sigma px (0 = 3% of diagonal)");
  extract_cmd->add_option("--tau", extract_tau, "mask threshold");
  extract_cmd->add_option("--occlusion-margin", extract_occlusion,
                          "drop reprojections whose depth disagrees with the frame by more "
                          "than this margin in meters (0 = disabled)");
  extract_cmd->add_option("--scale-method", extract_scale_method,
                          "ratio-of-medians|median-of-ratios");
  extract_cmd->add_flag("--rle", extract_rle, "also write RLE JSON masks");
  extract_cmd->add_option("--threads", extract_threads, "worker threads (0 = hardware)");
  extract_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  // postprocess
  auto* post_cmd = app.add_subcommand("postprocess",
                                      "probability fields -> multi-label decisions");
  std::string post_in, post_out, post_manifest, post_heuristic = "bernoulli";
  int post_k = 3;
  double post_theta = 0.25, post_theta_d = 0.1;
  post_cmd->add_option("--in", post_in, "probability field file");
  post_cmd->add_option("--out", post_out, "label field output file");
  post_cmd->add_option("--manifest", post_manifest, "JSONL {in, out} batch manifest");
  post_cmd->add_option("--heuristic", post_heuristic, "topk|max|dyn|bernoulli");
  post_cmd->add_option("--k", post_k, "top-k selection count");
  post_cmd->add_option("--theta", post_theta, "max-theta threshold");
  post_cmd->add_option("--theta-d", post_theta_d, "dyn-theta gap");
  post_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  // build-map
  auto* map_cmd = app.add_subcommand("build-map", "masks + geometry -> 3D map and occupancy");
  BundleInputs map_in;
  map_in.add_flags(map_cmd, false, true);
  std::string map_masks, map_history, map_out, map_plane = "xz", map_env = "env";
  std::string map_scale_method = "ratio-of-medians";
  int map_stride = 4, map_min_points = 3, map_threads = 0;
  double map_cell = 0.10, map_band_min = 0.1, map_band_max = 2.0;
  double map_height_ref = std::numeric_limits<double>::infinity();
  map_cmd->add_option("--masks", map_masks, "directory with per-frame mask tensors")->required();
  map_cmd->add_option("--history", map_history, "optional interaction history JSONL");
  map_cmd->add_option("--out", map_out, "output directory")->required();
  map_cmd->add_option("--stride", map_stride, "mask lift stride px");
  map_cmd->add_option("--cell-size", map_cell, "occupancy cell size m");
  map_cmd->add_option("--min-points", map_min_points, "cloud points per occupied cell");
  map_cmd->add_option("--band-min", map_band_min, "height band lower bound m");
  map_cmd->add_option("--band-max", map_band_max, "height band upper bound m");
  map_cmd->add_option("--plane", map_plane, "ground plane: xz|xy");
  map_cmd->add_option("--height-ref", map_height_ref,
                      "height reference (default: lowest camera)");
  map_cmd->add_option("--env", map_env, "environment id");
  map_cmd->add_option("--scale-method", map_scale_method,
                      "ratio-of-medians|median-of-ratios");
  map_cmd->add_option("--threads", map_threads, "worker threads (0 = hardware)");
  map_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "metric suite / loss kernels over files");
  std::string eval_manifest, eval_pred, eval_gt, eval_scores, eval_json, eval_table, eval_loss;
  std::string eval_weights;
  double eval_gamma_plus = 4.0, eval_gamma_minus = 1.0;
  eval_cmd->add_option("--manifest", eval_manifest, "JSONL {labels, gt[, scores]} manifest");
  eval_cmd->add_option("--pred", eval_pred, "prediction tensor (labels, or field for --loss)");
  eval_cmd->add_option("--gt", eval_gt, "ground-truth mask tensor");
  eval_cmd->add_option("--scores", eval_scores, "probability field for saliency/AP metrics");
  eval_cmd->add_option("--out", eval_json, "EvalReport JSON output");
  eval_cmd->add_option("--table", eval_table, "aligned text table output");
  eval_cmd->add_option("--loss", eval_loss, "loss mode: asym|bce");
  eval_cmd->add_option("--gamma-plus", eval_gamma_plus, "asymmetric focusing exponent (pos)");
  eval_cmd->add_option("--gamma-minus", eval_gamma_minus, "asymmetric focusing exponent (neg)");
  eval_cmd->add_option("--weights", eval_weights, "class weights JSON array");
  eval_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "task-oriented navigation on the occupancy grid");
  std::string plan_map, plan_grid, plan_verb, plan_object, plan_start, plan_start_cell;
  std::string plan_plane = "xz", plan_out;
  plan_cmd->add_option("--map", plan_map, "affordance map PLY")->required();
  plan_cmd->add_option("--grid", plan_grid, "occupancy grid JSON")->required();
  plan_cmd->add_option("--verb", plan_verb, "queried affordance class")->required();
  plan_cmd->add_option("--object", plan_object, "optional object filter");
  plan_cmd->add_option("--start", plan_start, "start position \"x,y\" in ground-plane meters");
  plan_cmd->add_option("--start-cell", plan_start_cell, "start cell \"row,col\"");
  plan_cmd->add_option("--plane", plan_plane, "ground plane: xz|xy");
  plan_cmd->add_option("--out", plan_out, "output directory")->required();
  plan_cmd->add_option("--config", config_path, "JSON config with flag defaults");

  std::vector<std::string> args = splice_config(argc, argv);
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth_cmd->parsed()) return cmd_synth(synth_spec, synth_out, synth_demo, synth_seed);
  if (extract_cmd->parsed()) {
    extract_in.resolve();
    return cmd_extract_labels(extract_in, extract_vocab, extract_out, extract_sigma, extract_tau,
                              extract_occlusion, extract_scale_method, extract_rle,
                              extract_threads);
  }
  if (post_cmd->parsed())
    return cmd_postprocess(post_in, post_out, post_manifest, post_heuristic, post_k, post_theta,
                           post_theta_d);
  if (map_cmd->parsed()) {
    map_in.resolve();
    return cmd_build_map(map_in, map_masks, map_history, map_out, map_stride, map_cell,
                         map_min_points, map_band_min, map_band_max, map_plane, map_height_ref,
                         map_env, map_scale_method, map_threads);
  }
  if (eval_cmd->parsed())
    return cmd_evaluate(eval_manifest, eval_pred, eval_gt, eval_scores, eval_json, eval_table,
                        eval_loss, eval_gamma_plus, eval_gamma_minus, eval_weights);
  if (plan_cmd->parsed())
    return cmd_plan(plan_map, plan_grid, plan_verb, plan_object, plan_start, plan_start_cell,
                    plan_plane, plan_out);
  fail(errc::usage_error, "no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == errc::usage_error ? 1 : 2;
  } catch (const io::json::exception& e) {
    // missing or mistyped fields in otherwise well-formed input files
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
