#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "affmap/io.hpp"
#include "helpers.hpp"

using namespace affmap;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("affmap_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("camera json round trip", "[io]") {
  fs::path dir = temp_dir("camera");
  CameraIntrinsics k{123.5, 118.25, 80.125, 59.5, 160, 120};
  io::write_camera(dir / "camera.json", k);
  CameraIntrinsics back = io::read_camera(dir / "camera.json");
  CHECK(back.fx == k.fx);
  CHECK(back.fy == k.fy);
  CHECK(back.cx == k.cx);
  CHECK(back.cy == k.cy);
  CHECK(back.width == k.width);
  CHECK(back.height == k.height);
}

TEST_CASE("pose jsonl round trip", "[io]") {
  fs::path dir = temp_dir("poses");
  std::mt19937 rng(70);
  std::map<std::int64_t, Pose> poses;
  for (int i = 0; i < 20; ++i) poses[i] = test_helpers::random_pose(rng);
  io::write_poses(dir / "poses.jsonl", poses);
  auto back = io::read_poses(dir / "poses.jsonl");
  REQUIRE(back.size() == poses.size());
  for (const auto& [id, pose] : poses) {
    REQUIRE((back.at(id).rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((back.at(id).translation - pose.translation).norm() < 1e-12);
  }
}

TEST_CASE("depth tensor round trip", "[io]") {
  fs::path dir = temp_dir("depth");
  std::mt19937 rng(71);
  std::uniform_real_distribution<float> u(0.f, 9.f);
  Image<float> img = Image<float>::zeros(7, 5);
  for (auto& v : img.values) v = u(rng);
  io::write_depth_image(dir / "d.f32", img);
  Image<float> back = io::read_depth_image(dir / "d.f32");
  CHECK(back.height == 7);
  CHECK(back.width == 5);
  CHECK(back.values == img.values);

  SECTION("header is a single json line") {
    std::ifstream in(dir / "d.f32", std::ios::binary);
    std::string line;
    std::getline(in, line);
    io::json h = io::json::parse(line);
    CHECK(h.at("height") == 7);
    CHECK(h.at("width") == 5);
    CHECK(h.at("dtype") == "f32");
  }
}

TEST_CASE("truncated tensors are rejected", "[io]") {
  fs::path dir = temp_dir("trunc");
  Image<float> img = Image<float>::zeros(4, 4);
  io::write_depth_image(dir / "d.f32", img);
  fs::resize_file(dir / "d.f32", fs::file_size(dir / "d.f32") - 8);
  CHECK_THROWS_MATCHES(io::read_depth_image(dir / "d.f32"), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::io_error; }));
}

TEST_CASE("mask tensor and rle forms agree", "[io]") {
  fs::path dir = temp_dir("mask");
  std::mt19937 rng(72);
  LabelField mask = test_helpers::random_labels(rng, 4, 9, 6);
  io::write_mask(dir / "m.u8", mask, 42);
  auto [raw, raw_id] = io::read_mask(dir / "m.u8");
  CHECK(raw_id == 42);
  CHECK(raw.values == mask.values);
  CHECK(raw.classes == mask.classes);

  io::write_mask_rle(dir / "m.rle.json", mask, 42);
  auto [rle, rle_id] = io::read_mask_rle(dir / "m.rle.json");
  CHECK(rle_id == 42);
  CHECK(rle.values == mask.values);
  CHECK(rle.classes == mask.classes);
}

TEST_CASE("probability field round trip preserves mode and payload", "[io]") {
  fs::path dir = temp_dir("prob");
  std::mt19937 rng(73);
  auto field = test_helpers::random_bernoulli_field(rng, 3, 4, 5);
  io::write_probability_field(dir / "p.f32", field);
  auto back = io::read_probability_field(dir / "p.f32");
  CHECK(back.mode == field.mode);
  CHECK(back.planes.values == field.planes.values);
  CHECK(back.planes.classes == field.planes.classes);
}

TEST_CASE("label field round trip", "[io]") {
  fs::path dir = temp_dir("labels");
  std::mt19937 rng(74);
  LabelField labels = test_helpers::random_labels(rng, 3, 4, 4);
  io::write_label_field(dir / "l.u8", labels);
  LabelField back = io::read_label_field(dir / "l.u8");
  CHECK(back.values == labels.values);
}

TEST_CASE("narrations, detections, events, history, cloud round trips", "[io]") {
  fs::path dir = temp_dir("jsonl");

  std::vector<interaction::NarrationRecord> narrations{{1, "cut", "potato"}, {2, "wash", "plate"}};
  io::write_narrations(dir / "n.jsonl", narrations);
  auto n_back = io::read_narrations(dir / "n.jsonl");
  REQUIRE(n_back.size() == 2);
  CHECK(n_back[1].verb == "wash");

  std::map<std::int64_t, std::vector<interaction::Detection>> dets{
      {1, {{"hand", {0, 0, 10, 10}}, {"potato", {5.25, 5.5, 15, 15}}}}};
  io::write_detections(dir / "d.jsonl", dets);
  auto d_back = io::read_detections(dir / "d.jsonl", 160, 120);
  REQUIRE(d_back.at(1).size() == 2);
  CHECK(d_back.at(1)[1].box.x_min == 5.25);

  SECTION("detections clamp to image bounds on load") {
    std::map<std::int64_t, std::vector<interaction::Detection>> wild{
        {3, {{"pan", {-5, -5, 500, 500}}}}};
    io::write_detections(dir / "wild.jsonl", wild);
    auto clamped = io::read_detections(dir / "wild.jsonl", 160, 120);
    CHECK(clamped.at(3)[0].box.x_min == 0);
    CHECK(clamped.at(3)[0].box.x_max == 159);
    CHECK(clamped.at(3)[0].box.y_max == 119);
  }

  std::vector<interaction::InteractionEvent> events{{1, "cut", "potato", Vec2(7.5, 8.25)}};
  io::write_events(dir / "e.jsonl", events);
  auto e_back = io::read_events(dir / "e.jsonl");
  REQUIRE(e_back.size() == 1);
  CHECK(e_back[0].center.x() == 7.5);
  CHECK(e_back[0].center.y() == 8.25);

  labelgen::AffordanceHistory history;
  history.append({Vec3(0.125, -2.5, 3.75), "cut", "potato", 4});
  io::write_history(dir / "h.jsonl", history);
  auto h_back = io::read_history(dir / "h.jsonl");
  REQUIRE(h_back.interactions.size() == 1);
  CHECK(h_back.interactions[0].world_point == Vec3(0.125, -2.5, 3.75));
  CHECK(h_back.interactions[0].source_frame == 4);

  std::vector<Vec3> cloud{{1.5, 2.5, -3.5}, {0, 0, 0.25}};
  io::write_cloud(dir / "c.jsonl", cloud);
  auto c_back = io::read_cloud(dir / "c.jsonl");
  REQUIRE(c_back.size() == 2);
  CHECK(c_back[0] == cloud[0]);
}

TEST_CASE("map ply round trip", "[io]") {
  fs::path dir = temp_dir("ply");
  mapping::AffordanceMap3D map;
  map.environment_id = "kitchen-1";
  map.classes = {"wash", "dry", "cut"};
  map.objects = {"sink"};
  map.points.push_back({Vec3(1.25, -0.5, 2.0), 0b101, 7, 0});
  map.points.push_back({Vec3(0.0, 3.5, -1.0), 0b010, 8, -1});
  io::write_map_ply(dir / "map.ply", map);
  auto back = io::read_map_ply(dir / "map.ply");
  CHECK(back.environment_id == map.environment_id);
  CHECK(back.classes == map.classes);
  CHECK(back.objects == map.objects);
  REQUIRE(back.points.size() == 2);
  CHECK(back.points[0].class_mask == 0b101);
  CHECK(back.points[1].class_mask == 0b010);
  CHECK(back.points[0].object_id == 0);
  CHECK(back.points[1].object_id == -1);
  CHECK(back.points[0].source_frame == 7);
  CHECK((back.points[0].position - map.points[0].position).norm() < 1e-5);

  SECTION("wide masks use a lo/hi pair") {
    mapping::AffordanceMap3D wide;
    wide.classes.resize(43, "v");
    for (size_t i = 0; i < wide.classes.size(); ++i) wide.classes[i] = "v" + std::to_string(i);
    wide.points.push_back({Vec3(0, 0, 0), (std::uint64_t{1} << 42) | 0b11, 0, -1});
    io::write_map_ply(dir / "wide.ply", wide);
    auto wide_back = io::read_map_ply(dir / "wide.ply");
    REQUIRE(wide_back.points.size() == 1);
    CHECK(wide_back.points[0].class_mask == ((std::uint64_t{1} << 42) | 0b11));
  }
}

TEST_CASE("occupancy json round trip", "[io]") {
  fs::path dir = temp_dir("occ");
  mapping::OccupancyGrid grid;
  grid.origin = Vec2(-1.25, 0.5);
  grid.cell_size = 0.2;
  grid.rows = 3;
  grid.cols = 4;
  grid.states.assign(12, mapping::CellState::free);
  grid.states[5] = mapping::CellState::occupied;
  grid.states[6] = mapping::CellState::occupied;
  grid.states[11] = mapping::CellState::unknown;
  io::write_occupancy(dir / "o.json", grid);
  auto back = io::read_occupancy(dir / "o.json");
  CHECK(back.origin == grid.origin);
  CHECK(back.cell_size == grid.cell_size);
  CHECK(back.rows == grid.rows);
  CHECK(back.cols == grid.cols);
  REQUIRE(back.states.size() == grid.states.size());
  for (size_t i = 0; i < grid.states.size(); ++i) CHECK(back.states[i] == grid.states[i]);

  SECTION("the json layout matches the documented fields") {
    io::json j = io::read_json_file(dir / "o.json");
    CHECK(j.contains("origin"));
    CHECK(j.contains("cell_size"));
    CHECK(j.contains("rows"));
    CHECK(j.contains("cols"));
    CHECK(j.contains("cells"));
    CHECK(j.at("cells").is_array());
  }
}

TEST_CASE("pgm files carry the grid image", "[io]") {
  fs::path dir = temp_dir("pgm");
  Image<std::uint8_t> img = Image<std::uint8_t>::zeros(2, 3);
  img.at(0, 0) = 255;
  img.at(1, 2) = 7;
  io::write_pgm(dir / "g.pgm", img);
  std::ifstream in(dir / "g.pgm", std::ios::binary);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(maxval == 255);
  in.get();
  std::vector<char> data(6);
  in.read(data.data(), 6);
  CHECK(static_cast<std::uint8_t>(data[0]) == 255);
  CHECK(static_cast<std::uint8_t>(data[5]) == 7);
}

TEST_CASE("missing and malformed files fail cleanly", "[io]") {
  fs::path dir = temp_dir("bad");
  CHECK_THROWS_MATCHES(io::read_json_file(dir / "nope.json"), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::io_error; }));
  {
    std::ofstream out(dir / "broken.jsonl");
    out << "{\"frame_id\": 1,\n";
  }
  CHECK_THROWS_AS(io::read_jsonl(dir / "broken.jsonl"), Error);
}

TEST_CASE("eval report serialization", "[io]") {
  metrics::EvalReport r;
  r.classes = {"wash", "dry"};
  r.per_class_iou = {0.5, std::numeric_limits<double>::quiet_NaN()};
  r.per_class_f1 = {2.0 / 3.0, std::numeric_limits<double>::quiet_NaN()};
  r.per_class_ap = {1.0, std::numeric_limits<double>::quiet_NaN()};
  r.miou = 0.5;
  r.f1 = 2.0 / 3.0;
  r.kld = 0.0;
  r.sim = 1.0;
  r.auc_j = 1.0;
  r.map = 1.0;
  r.ap50 = 1.0;
  io::ojson j = io::report_to_json(r);
  CHECK(j.at("miou") == 0.5);
  CHECK(j.at("per_class").at("iou").at(1).is_null());  // degenerate class -> null

  std::string table = io::format_report_table(r);
  CHECK(table.find("wash") != std::string::npos);
  CHECK(table.find("50.0") != std::string::npos);  // percentages
  CHECK(table.find("mIoU") != std::string::npos);
}
