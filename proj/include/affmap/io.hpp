#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affmap/core.hpp"
#include "affmap/geometry.hpp"
#include "affmap/interaction.hpp"
#include "affmap/labelgen.hpp"
#include "affmap/mapping.hpp"
#include "affmap/metrics.hpp"
#include "affmap/multilabel.hpp"

namespace affmap::io {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Basic file helpers

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot open '" + path.string() + "' for writing");
  return out;
}

inline json parse_json(const std::string& text, const fs::path& path, size_t line_no = 0) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    std::string where = path.string();
    if (line_no > 0) where += ":" + std::to_string(line_no);
    fail(errc::io_error, "malformed JSON at " + where);
  }
  return j;
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

inline void write_json_file(const fs::path& path, const ojson& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

inline std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<json> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    rows.push_back(parse_json(line, path, line_no));
  }
  return rows;
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path) : out_(open_output(path)) {}
  void write(const ojson& row) { out_ << row.dump() << "\n"; }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Tensor container: one JSON header line followed by the raw row-major
// payload. Every tensor in the toolkit shares this layout.

inline void write_tensor(const fs::path& path, const ojson& header, const void* data,
                         size_t bytes) {
  std::ofstream out = open_output(path);
  out << header.dump() << "\n";
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) fail(errc::io_error, "short write to '" + path.string() + "'");
}

struct RawTensor {
  json header;
  std::vector<char> payload;
};

inline RawTensor read_tensor(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string header_line;
  if (!std::getline(in, header_line)) fail(errc::io_error, "missing tensor header in '" + path.string() + "'");
  RawTensor t;
  t.header = parse_json(header_line, path, 1);
  t.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return t;
}

inline void require_payload(const RawTensor& t, size_t expected_bytes, const fs::path& path) {
  if (t.payload.size() != expected_bytes)
    fail(errc::io_error, "tensor payload of '" + path.string() + "' has " +
                             std::to_string(t.payload.size()) + " bytes, expected " +
                             std::to_string(expected_bytes));
}

// ---------------------------------------------------------------------------
// Camera / poses / depth / sparse depths

inline void write_camera(const fs::path& path, const CameraIntrinsics& k) {
  ojson j{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
          {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  write_json_file(path, j);
}

inline CameraIntrinsics camera_from_json(const json& j) {
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  k.validate();
  return k;
}

inline CameraIntrinsics read_camera(const fs::path& path) {
  return camera_from_json(read_json_file(path));
}

inline void write_poses(const fs::path& path, const std::map<std::int64_t, Pose>& poses) {
  JsonlWriter w(path);
  for (const auto& [frame_id, pose] : poses) {
    Eigen::Quaterniond q(pose.rotation);
    if (q.w() < 0) q.coeffs() *= -1.0;  // canonical sign for byte-stable output
    w.write({{"frame_id", frame_id},
             {"qw", q.w()},
             {"qx", q.x()},
             {"qy", q.y()},
             {"qz", q.z()},
             {"tx", pose.translation.x()},
             {"ty", pose.translation.y()},
             {"tz", pose.translation.z()}});
  }
}

inline std::map<std::int64_t, Pose> read_poses(const fs::path& path) {
  std::map<std::int64_t, Pose> poses;
  for (const json& row : read_jsonl(path)) {
    Eigen::Quaterniond q(row.at("qw").get<double>(), row.at("qx").get<double>(),
                         row.at("qy").get<double>(), row.at("qz").get<double>());
    std::int64_t frame_id = row.at("frame_id").get<std::int64_t>();
    if (std::abs(q.norm() - 1.0) > 1e-6)
      std::fprintf(stderr, "warning: pose of frame %lld re-normalized (|q| = %.9f)\n",
                   static_cast<long long>(frame_id), q.norm());
    poses[frame_id] = Pose::from_quaternion(
        q.w(), q.x(), q.y(), q.z(),
        Vec3(row.at("tx").get<double>(), row.at("ty").get<double>(), row.at("tz").get<double>()));
  }
  return poses;
}

inline void write_depth_image(const fs::path& path, const Image<float>& img) {
  ojson header{{"height", img.height}, {"width", img.width}, {"dtype", "f32"}};
  write_tensor(path, header, img.values.data(), img.values.size() * sizeof(float));
}

inline Image<float> read_depth_image(const fs::path& path) {
  RawTensor t = read_tensor(path);
  Image<float> img;
  img.height = t.header.at("height").get<int>();
  img.width = t.header.at("width").get<int>();
  if (t.header.value("dtype", "f32") != std::string("f32"))
    fail(errc::io_error, "depth tensor must be f32: '" + path.string() + "'");
  size_t count = static_cast<size_t>(img.height) * img.width;
  require_payload(t, count * sizeof(float), path);
  img.values.resize(count);
  std::memcpy(img.values.data(), t.payload.data(), t.payload.size());
  return img;
}

inline void write_sparse_depths(const fs::path& path,
                                const std::map<std::int64_t, std::vector<SparseDepth>>& sparse) {
  JsonlWriter w(path);
  for (const auto& [frame_id, list] : sparse)
    for (const SparseDepth& s : list)
      w.write({{"frame_id", frame_id},
               {"u", s.pixel.x()},
               {"v", s.pixel.y()},
               {"depth_m", s.depth_m}});
}

inline std::map<std::int64_t, std::vector<SparseDepth>> read_sparse_depths(const fs::path& path) {
  std::map<std::int64_t, std::vector<SparseDepth>> out;
  for (const json& row : read_jsonl(path)) {
    out[row.at("frame_id").get<std::int64_t>()].push_back(
        {Vec2(row.at("u").get<double>(), row.at("v").get<double>()),
         row.at("depth_m").get<double>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Narrations / detections / events / history / cloud

inline void write_narrations(const fs::path& path,
                             const std::vector<interaction::NarrationRecord>& narrations) {
  JsonlWriter w(path);
  for (const auto& n : narrations)
    w.write({{"frame_id", n.frame_id}, {"verb", n.verb}, {"object", n.object}});
}

inline std::vector<interaction::NarrationRecord> read_narrations(const fs::path& path) {
  std::vector<interaction::NarrationRecord> out;
  for (const json& row : read_jsonl(path))
    out.push_back({row.at("frame_id").get<std::int64_t>(), row.at("verb").get<std::string>(),
                   row.at("object").get<std::string>()});
  return out;
}

inline void write_detections(
    const fs::path& path,
    const std::map<std::int64_t, std::vector<interaction::Detection>>& detections) {
  JsonlWriter w(path);
  for (const auto& [frame_id, dets] : detections)
    for (const auto& d : dets)
      w.write({{"frame_id", frame_id},
               {"class", d.cls},
               {"x_min", d.box.x_min},
               {"y_min", d.box.y_min},
               {"x_max", d.box.x_max},
               {"y_max", d.box.y_max}});
}

// Boxes are clamped to image bounds on load.
inline std::map<std::int64_t, std::vector<interaction::Detection>> read_detections(
    const fs::path& path, int width, int height) {
  std::map<std::int64_t, std::vector<interaction::Detection>> out;
  for (const json& row : read_jsonl(path)) {
    interaction::BBox box{row.at("x_min").get<double>(), row.at("y_min").get<double>(),
                          row.at("x_max").get<double>(), row.at("y_max").get<double>()};
    if (!box.valid()) fail(errc::io_error, "invalid box in '" + path.string() + "'");
    out[row.at("frame_id").get<std::int64_t>()].push_back(
        {row.at("class").get<std::string>(), box.clamped(width, height)});
  }
  return out;
}

inline void write_events(const fs::path& path,
                         const std::vector<interaction::InteractionEvent>& events) {
  JsonlWriter w(path);
  for (const auto& e : events)
    w.write({{"frame_id", e.frame_id},
             {"verb", e.verb},
             {"object", e.object},
             {"u", e.center.x()},
             {"v", e.center.y()}});
}

inline std::vector<interaction::InteractionEvent> read_events(const fs::path& path) {
  std::vector<interaction::InteractionEvent> out;
  for (const json& row : read_jsonl(path))
    out.push_back({row.at("frame_id").get<std::int64_t>(), row.at("verb").get<std::string>(),
                   row.at("object").get<std::string>(),
                   Vec2(row.at("u").get<double>(), row.at("v").get<double>())});
  return out;
}

inline void write_history(const fs::path& path, const labelgen::AffordanceHistory& history) {
  JsonlWriter w(path);
  for (const auto& i : history.interactions)
    w.write({{"x", i.world_point.x()},
             {"y", i.world_point.y()},
             {"z", i.world_point.z()},
             {"verb", i.verb},
             {"object", i.object},
             {"source_frame", i.source_frame}});
}

inline labelgen::AffordanceHistory read_history(const fs::path& path,
                                                const std::string& environment_id = "") {
  labelgen::AffordanceHistory h;
  h.environment_id = environment_id;
  for (const json& row : read_jsonl(path))
    h.append({Vec3(row.at("x").get<double>(), row.at("y").get<double>(),
                   row.at("z").get<double>()),
              row.at("verb").get<std::string>(), row.at("object").get<std::string>(),
              row.at("source_frame").get<std::int64_t>()});
  return h;
}

inline void write_cloud(const fs::path& path, const std::vector<Vec3>& cloud) {
  JsonlWriter w(path);
  for (const Vec3& p : cloud) w.write({{"x", p.x()}, {"y", p.y()}, {"z", p.z()}});
}

inline std::vector<Vec3> read_cloud(const fs::path& path) {
  std::vector<Vec3> out;
  for (const json& row : read_jsonl(path))
    out.emplace_back(row.at("x").get<double>(), row.at("y").get<double>(),
                     row.at("z").get<double>());
  return out;
}

// ---------------------------------------------------------------------------
// Masks, probability fields, label fields

inline void write_mask(const fs::path& path, const MultiLabelMask& mask, std::int64_t frame_id) {
  ojson header{{"frame_id", frame_id},
               {"classes", mask.classes},
               {"height", mask.height},
               {"width", mask.width},
               {"dtype", "u8"}};
  write_tensor(path, header, mask.values.data(), mask.values.size());
}

inline std::pair<MultiLabelMask, std::int64_t> read_mask(const fs::path& path) {
  RawTensor t = read_tensor(path);
  MultiLabelMask m;
  m.classes = t.header.at("classes").get<std::vector<std::string>>();
  m.height = t.header.at("height").get<int>();
  m.width = t.header.at("width").get<int>();
  size_t count = m.classes.size() * static_cast<size_t>(m.height) * m.width;
  require_payload(t, count, path);
  m.values.assign(t.payload.begin(), t.payload.end());
  return {std::move(m), t.header.value("frame_id", std::int64_t{0})};
}

// Compact JSON form: per class plane, row-major [count, value] runs.
inline void write_mask_rle(const fs::path& path, const MultiLabelMask& mask,
                           std::int64_t frame_id) {
  ojson planes = ojson::array();
  for (int k = 0; k < mask.num_classes(); ++k) {
    ojson runs = ojson::array();
    auto plane = mask.plane(k);
    size_t i = 0;
    while (i < plane.size()) {
      size_t j = i;
      while (j < plane.size() && plane[j] == plane[i]) ++j;
      runs.push_back({j - i, plane[i] != 0 ? 1 : 0});
      i = j;
    }
    planes.push_back(std::move(runs));
  }
  write_json_file(path, ojson{{"frame_id", frame_id},
                              {"classes", mask.classes},
                              {"height", mask.height},
                              {"width", mask.width},
                              {"encoding", "rle"},
                              {"planes", planes}});
}

inline std::pair<MultiLabelMask, std::int64_t> read_mask_rle(const fs::path& path) {
  json j = read_json_file(path);
  MultiLabelMask m = MultiLabelMask::zeros(j.at("classes").get<std::vector<std::string>>(),
                                           j.at("height").get<int>(), j.at("width").get<int>());
  const json& planes = j.at("planes");
  if (planes.size() != m.classes.size()) fail(errc::io_error, "rle plane count mismatch");
  for (size_t k = 0; k < planes.size(); ++k) {
    size_t pos = 0;
    for (const json& run : planes[k]) {
      size_t count = run.at(0).get<size_t>();
      std::uint8_t value = run.at(1).get<int>() != 0 ? 1 : 0;
      if (pos + count > m.plane_size()) fail(errc::io_error, "rle overrun");
      std::fill_n(m.plane(static_cast<int>(k)).data() + pos, count, value);
      pos += count;
    }
    if (pos != m.plane_size()) fail(errc::io_error, "rle underrun");
  }
  return {std::move(m), j.value("frame_id", std::int64_t{0})};
}

inline void write_probability_field(const fs::path& path,
                                    const multilabel::ProbabilityField& field) {
  ojson header{{"classes", field.planes.classes},
               {"height", field.planes.height},
               {"width", field.planes.width},
               {"mode", multilabel::mode_name(field.mode)},
               {"dtype", "f32"}};
  write_tensor(path, header, field.planes.values.data(),
               field.planes.values.size() * sizeof(float));
}

inline multilabel::ProbabilityField read_probability_field(const fs::path& path) {
  RawTensor t = read_tensor(path);
  multilabel::ProbabilityField f;
  f.mode = multilabel::parse_mode(t.header.at("mode").get<std::string>());
  f.planes.classes = t.header.at("classes").get<std::vector<std::string>>();
  f.planes.height = t.header.at("height").get<int>();
  f.planes.width = t.header.at("width").get<int>();
  size_t count = f.planes.classes.size() * f.planes.plane_size();
  require_payload(t, count * sizeof(float), path);
  f.planes.values.resize(count);
  std::memcpy(f.planes.values.data(), t.payload.data(), t.payload.size());
  return f;
}

inline void write_label_field(const fs::path& path, const LabelField& labels) {
  ojson header{{"classes", labels.classes},
               {"height", labels.height},
               {"width", labels.width},
               {"mode", "binary"},
               {"dtype", "u8"}};
  write_tensor(path, header, labels.values.data(), labels.values.size());
}

inline LabelField read_label_field(const fs::path& path) {
  RawTensor t = read_tensor(path);
  LabelField l;
  l.classes = t.header.at("classes").get<std::vector<std::string>>();
  l.height = t.header.at("height").get<int>();
  l.width = t.header.at("width").get<int>();
  size_t count = l.classes.size() * l.plane_size();
  require_payload(t, count, path);
  l.values.assign(t.payload.begin(), t.payload.end());
  return l;
}

// ---------------------------------------------------------------------------
// PLY map export: position, dominant-class color, class bitmask, object id,
// source frame. A single uint mask property is used up to 32 classes, a
// lo/hi pair beyond that.

inline void write_map_ply(const fs::path& path, const mapping::AffordanceMap3D& map) {
  bool wide = map.classes.size() > 32;
  std::ofstream out = open_output(path);
  out << "ply\nformat ascii 1.0\n";
  out << "comment environment " << map.environment_id << "\n";
  for (size_t k = 0; k < map.classes.size(); ++k)
    out << "comment class " << k << " " << map.classes[k] << "\n";
  for (size_t i = 0; i < map.objects.size(); ++i)
    out << "comment object " << i << " " << map.objects[i] << "\n";
  out << "element vertex " << map.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (wide)
    out << "property uint class_mask_lo\nproperty uint class_mask_hi\n";
  else
    out << "property uint class_mask\n";
  out << "property int object_id\nproperty int source_frame\nend_header\n";

  out << std::setprecision(9);
  for (const mapping::MapPoint& p : map.points) {
    auto color = mapping::class_color(mapping::dominant_class(p.class_mask));
    out << static_cast<float>(p.position.x()) << " " << static_cast<float>(p.position.y()) << " "
        << static_cast<float>(p.position.z()) << " " << int(color[0]) << " " << int(color[1])
        << " " << int(color[2]) << " ";
    if (wide)
      out << static_cast<std::uint32_t>(p.class_mask & 0xffffffffu) << " "
          << static_cast<std::uint32_t>(p.class_mask >> 32) << " ";
    else
      out << static_cast<std::uint32_t>(p.class_mask) << " ";
    out << p.object_id << " " << p.source_frame << "\n";
  }
}

inline mapping::AffordanceMap3D read_map_ply(const fs::path& path) {
  std::ifstream in = open_input(path);
  mapping::AffordanceMap3D map;
  std::string line;
  size_t vertex_count = 0;
  bool wide = false;
  std::vector<std::string> properties;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "end_header") break;
    if (tok == "comment") {
      std::string kind;
      ss >> kind;
      if (kind == "environment") {
        std::getline(ss, map.environment_id);
        if (!map.environment_id.empty() && map.environment_id.front() == ' ')
          map.environment_id.erase(0, 1);
      } else if (kind == "class" || kind == "object") {
        size_t index;
        std::string name;
        ss >> index >> name;
        auto& vocab = kind == "class" ? map.classes : map.objects;
        if (vocab.size() <= index) vocab.resize(index + 1);
        vocab[index] = name;
      }
    } else if (tok == "element") {
      std::string kind;
      ss >> kind >> vertex_count;
      if (kind != "vertex") fail(errc::io_error, "unsupported PLY element in '" + path.string() + "'");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      properties.push_back(name);
      if (name == "class_mask_hi") wide = true;
    }
  }
  for (size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) fail(errc::io_error, "truncated PLY '" + path.string() + "'");
    std::istringstream ss(line);
    double x, y, z;
    int r, g, b;
    ss >> x >> y >> z >> r >> g >> b;
    mapping::MapPoint p;
    p.position = Vec3(x, y, z);
    if (wide) {
      std::uint32_t lo, hi;
      ss >> lo >> hi;
      p.class_mask = (static_cast<std::uint64_t>(hi) << 32) | lo;
    } else {
      std::uint32_t m;
      ss >> m;
      p.class_mask = m;
    }
    ss >> p.object_id >> p.source_frame;
    if (!ss) fail(errc::io_error, "malformed PLY vertex in '" + path.string() + "'");
    map.points.push_back(p);
  }
  return map;
}

// ---------------------------------------------------------------------------
// Occupancy grid JSON (run-length encoded states) and PGM rendering

inline const char* cell_state_name(mapping::CellState s) {
  switch (s) {
    case mapping::CellState::free: return "free";
    case mapping::CellState::occupied: return "occupied";
    case mapping::CellState::unknown: return "unknown";
  }
  return "unknown";
}

inline mapping::CellState parse_cell_state(const std::string& s) {
  if (s == "free") return mapping::CellState::free;
  if (s == "occupied") return mapping::CellState::occupied;
  if (s == "unknown") return mapping::CellState::unknown;
  fail(errc::io_error, "unknown cell state '" + s + "'");
}

inline void write_occupancy(const fs::path& path, const mapping::OccupancyGrid& grid) {
  ojson runs = ojson::array();
  size_t i = 0;
  while (i < grid.states.size()) {
    size_t j = i;
    while (j < grid.states.size() && grid.states[j] == grid.states[i]) ++j;
    runs.push_back({j - i, cell_state_name(grid.states[i])});
    i = j;
  }
  write_json_file(path, ojson{{"origin", {grid.origin.x(), grid.origin.y()}},
                              {"cell_size", grid.cell_size},
                              {"rows", grid.rows},
                              {"cols", grid.cols},
                              {"cells", runs}});
}

inline mapping::OccupancyGrid read_occupancy(const fs::path& path,
                                             mapping::GroundPlane plane = mapping::GroundPlane::xz) {
  json j = read_json_file(path);
  mapping::OccupancyGrid grid;
  grid.origin = Vec2(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>());
  grid.cell_size = j.at("cell_size").get<double>();
  grid.rows = j.at("rows").get<int>();
  grid.cols = j.at("cols").get<int>();
  grid.plane = plane;
  grid.states.reserve(static_cast<size_t>(grid.rows) * grid.cols);
  for (const json& run : j.at("cells")) {
    size_t count = run.at(0).get<size_t>();
    mapping::CellState state = parse_cell_state(run.at(1).get<std::string>());
    for (size_t i = 0; i < count; ++i) grid.states.push_back(state);
  }
  if (grid.states.size() != static_cast<size_t>(grid.rows) * grid.cols)
    fail(errc::io_error, "occupancy run lengths do not cover the grid");
  grid.cell_class_masks.assign(grid.states.size(), 0);
  return grid;
}

inline void write_pgm(const fs::path& path, const Image<std::uint8_t>& img) {
  std::ofstream out = open_output(path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.values.data()),
            static_cast<std::streamsize>(img.values.size()));
}

inline Image<std::uint8_t> occupancy_to_image(const mapping::OccupancyGrid& grid) {
  Image<std::uint8_t> img = Image<std::uint8_t>::zeros(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      switch (grid.state(r, c)) {
        case mapping::CellState::free: img.at(r, c) = 255; break;
        case mapping::CellState::occupied: img.at(r, c) = 0; break;
        case mapping::CellState::unknown: img.at(r, c) = 127; break;
      }
    }
  return img;
}

// ---------------------------------------------------------------------------
// Evaluation report

inline ojson nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline ojson report_to_json(const metrics::EvalReport& r) {
  ojson per_class = ojson::object();
  ojson iou = ojson::array(), f1 = ojson::array(), ap = ojson::array();
  for (size_t k = 0; k < r.classes.size(); ++k) {
    iou.push_back(nan_to_null(r.per_class_iou[k]));
    f1.push_back(nan_to_null(r.per_class_f1[k]));
    ap.push_back(nan_to_null(r.per_class_ap[k]));
  }
  per_class["iou"] = iou;
  per_class["f1"] = f1;
  per_class["ap"] = ap;
  return ojson{{"classes", r.classes}, {"per_class", per_class},
               {"miou", nan_to_null(r.miou)}, {"f1", nan_to_null(r.f1)},
               {"kld", nan_to_null(r.kld)},   {"sim", nan_to_null(r.sim)},
               {"auc_j", nan_to_null(r.auc_j)}, {"map", nan_to_null(r.map)},
               {"ap50", nan_to_null(r.ap50)}};
}

// Aligned text table: classes as columns with per-class IoU/F1/AP rows in
// percent, then the aggregate metrics.
inline std::string format_report_table(const metrics::EvalReport& r) {
  std::ostringstream out;
  auto pct = [](double v) -> std::string {
    if (std::isnan(v)) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v * 100.0;
    return s.str();
  };
  std::vector<size_t> widths;
  for (const std::string& c : r.classes) widths.push_back(std::max<size_t>(c.size(), 5));

  out << std::left << std::setw(8) << "class";
  for (size_t k = 0; k < r.classes.size(); ++k)
    out << " " << std::setw(static_cast<int>(widths[k])) << r.classes[k];
  out << " | mean\n";
  auto row = [&](const char* name, const std::vector<double>& values, double mean) {
    out << std::left << std::setw(8) << name;
    for (size_t k = 0; k < values.size(); ++k)
      out << " " << std::setw(static_cast<int>(widths[k])) << pct(values[k]);
    out << " | " << pct(mean) << "\n";
  };
  row("IoU[%]", r.per_class_iou, r.miou);
  row("F1[%]", r.per_class_f1, r.f1);
  row("AP[%]", r.per_class_ap, r.map);
  out << std::setprecision(4) << std::fixed;
  out << "KLD " << r.kld << "  SIM " << r.sim << "  AUC-J " << r.auc_j << "  mIoU " << r.miou
      << "  F1 " << r.f1 << "  mAP " << r.map << "  AP50 " << r.ap50 << "\n";
  return out.str();
}

}  // namespace affmap::io
