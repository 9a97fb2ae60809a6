#include <filesystem>
#include <fstream>
#include <functional>

#include <doctest.h>
#include <json.hpp>

#include "orrecon/calib.hpp"
#include "orrecon/config.hpp"
#include "orrecon/dataset.hpp"
#include "test_util.hpp"

using namespace orrecon;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "orrecon_dataset_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
  return path;
}

// One generated dataset shared by the loader tests (8 frames, corrupted).
const fs::path& shared_dataset() {
  static const fs::path dir = [] {
    const fs::path d = temp_dir("shared");
    sim::CorruptionConfig corruption;
    corruption.depth_sigma0_mm = 1.5;
    corruption.mask_jitter_radius_px = 1;
    sim::generate_dataset(testutil::small_scene(), testutil::small_rig(),
                          corruption, 0.8, d);
    return d;
  }();
  return dir;
}

void patch_manifest(const fs::path& src_root, const fs::path& dst_root,
                    const std::function<void(nlohmann::json&)>& edit) {
  fs::remove_all(dst_root);
  fs::copy(src_root, dst_root, fs::copy_options::recursive);
  std::ifstream in(dst_root / "manifest.json");
  auto j = nlohmann::json::parse(in);
  in.close();
  edit(j);
  write_text(dst_root / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

TEST_CASE("load_dataset accepts simulator output") {
  const auto dataset = io::load_dataset(shared_dataset());
  CHECK(dataset.frames == 8);
  CHECK(dataset.fps == 10.0);
  CHECK(dataset.cameras.size() == 2);
  CHECK(dataset.label_id("table") == sim::kLabelTable);
  CHECK(dataset.label_id("human") == sim::kLabelHuman);
  CHECK_THROWS_AS((void)dataset.label_id("nonexistent"), std::invalid_argument);
  CHECK(dataset.camera("base").intrinsics.width == 320);
  CHECK_THROWS_AS((void)dataset.camera("rear"), std::invalid_argument);
  CHECK(int(dataset.kinematics.size()) == dataset.frames);
  CHECK(!dataset.calibration_file.empty());
  CHECK(!dataset.calib_samples_file.empty());

  // Also loadable through the manifest path directly.
  const auto again = io::load_dataset(shared_dataset() / "manifest.json");
  CHECK(again.frames == dataset.frames);
}

TEST_CASE("load_frame returns consistent bundles") {
  const auto dataset = io::load_dataset(shared_dataset());
  const auto& base = dataset.camera("base");

  const FrameBundle frame = io::load_frame(dataset, base, 3);
  CHECK(frame.index == 3);
  CHECK(frame.timestamp_s == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(frame.depth.width == base.intrinsics.width);
  CHECK(frame.depth.height == base.intrinsics.height);
  frame.check_consistent();

  int valid = 0;
  for (const double z : frame.depth.mm) {
    valid += z > 0.0;
  }
  CHECK(valid > 1000);  // the table view is mostly in range

  const LabelMask gt = io::load_gt_mask(dataset, base, 3);
  CHECK(gt.width == base.intrinsics.width);

  CHECK_THROWS_AS(io::load_frame(dataset, base, 8), std::invalid_argument);
  CHECK_THROWS_AS(io::load_frame(dataset, base, -1), std::invalid_argument);
}

TEST_CASE("load_dataset names a missing depth file") {
  const fs::path root = temp_dir("missing_file");
  fs::copy(shared_dataset(), root, fs::copy_options::recursive);
  fs::remove(root / "op" / "depth" / "000004.png");
  try {
    io::load_dataset(root);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("000004.png") != std::string::npos);
  }
}

TEST_CASE("load_dataset rejects shuffled kinematics rows") {
  const fs::path root = temp_dir("shuffled");
  fs::copy(shared_dataset(), root, fs::copy_options::recursive);

  std::ifstream in(root / "kinematics.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    lines.push_back(line);
  }
  in.close();
  REQUIRE(lines.size() >= 4);
  std::swap(lines[2], lines[3]);  // swap two data rows
  std::string joined;
  for (const auto& line : lines) {
    joined += line + "\n";
  }
  write_text(root / "kinematics.csv", joined);

  CHECK_THROWS_AS(io::load_dataset(root), std::runtime_error);
}

TEST_CASE("load_dataset rejects schema violations") {
  const fs::path base = shared_dataset();

  SUBCASE("unknown top-level key") {
    const fs::path root = temp_dir("unknown_key");
    patch_manifest(base, root, [](nlohmann::json& j) { j["extra"] = 1; });
    try {
      io::load_dataset(root);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("extra") != std::string::npos);
    }
  }
  SUBCASE("duplicate label id") {
    const fs::path root = temp_dir("dup_label");
    patch_manifest(base, root, [](nlohmann::json& j) {
      j["label_map"]["ghost"] = int(sim::kLabelTable);
    });
    CHECK_THROWS_AS(io::load_dataset(root), std::runtime_error);
  }
  SUBCASE("missing required class") {
    const fs::path root = temp_dir("no_human");
    patch_manifest(base, root,
                   [](nlohmann::json& j) { j["label_map"].erase("human"); });
    CHECK_THROWS_AS(io::load_dataset(root), std::runtime_error);
  }
  SUBCASE("frame count mismatch") {
    const fs::path root = temp_dir("bad_count");
    patch_manifest(base, root, [](nlohmann::json& j) { j["frames"] = 9; });
    CHECK_THROWS_AS(io::load_dataset(root), std::runtime_error);
  }
  SUBCASE("bad format tag") {
    const fs::path root = temp_dir("bad_format");
    patch_manifest(base, root,
                   [](nlohmann::json& j) { j["format"] = "other-v9"; });
    CHECK_THROWS_AS(io::load_dataset(root), std::runtime_error);
  }
}

TEST_CASE("pipeline config: defaults, overrides, unknown keys") {
  const fs::path dir = temp_dir("pipeline_cfg");

  const auto defaults =
      io::load_pipeline_config(write_text(dir / "empty.json", "{}\n"));
  CHECK(defaults.opening_radius_px == 10);
  CHECK(defaults.icp.max_iterations == 10);
  CHECK(defaults.outlier_k == 100);
  CHECK(defaults.outlier_sigma == 3.0);
  CHECK(defaults.voxel_size_mm == 10.0);
  CHECK(defaults.keep_labels == std::vector<std::string>{"table"});
  CHECK(defaults.dynamic_labels == std::vector<std::string>{"human"});
  CHECK(defaults.keyframe_translation_mm == 50.0);
  CHECK(defaults.keyframe_rotation_deg == 5.0);
  CHECK(defaults.keyframe_max_gap == 30);
  CHECK(defaults.pose_source == PoseSource::kKinematics);
  CHECK(defaults.splat_radius_px == 2);

  const auto tuned = io::load_pipeline_config(write_text(
      dir / "tuned.json",
      R"({"voxel_size_mm": 25.0, "pose_source": "depth_odometry",
          "keep_labels": ["table", "floor"], "eval_stride": 2})"));
  CHECK(tuned.voxel_size_mm == 25.0);
  CHECK(tuned.pose_source == PoseSource::kDepthOdometry);
  CHECK(tuned.keep_labels == std::vector<std::string>({"table", "floor"}));
  CHECK(tuned.eval_stride == 2);

  try {
    io::load_pipeline_config(
        write_text(dir / "typo.json", R"({"voxel_size_m": 25.0})"));
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("voxel_size_m") != std::string::npos);
  }
  CHECK_THROWS(io::load_pipeline_config(
      write_text(dir / "bad.json", R"({"pose_source": "tarot"})")));
  CHECK_THROWS_AS(io::load_pipeline_config(
                      write_text(dir / "neg.json", R"({"outlier_k": 0})")),
                  std::invalid_argument);
}

TEST_CASE("simulate config parses presets and rejects bad rates") {
  const fs::path dir = temp_dir("simulate_cfg");
  const std::string text = R"({
    "scene": {
      "seed": 7,
      "humans": [{"waypoints_xy_mm": [[1500, -900], [1500, 900]],
                  "speed_mm_s": 250}]
    },
    "rig": {
      "fps": 5.0,
      "cam_base": "desk",
      "cam_op": "desk",
      "x": [[1,0,0,10],[0,1,0,-20],[0,0,1,30],[0,0,0,1]],
      "y": [[1,0,0,0],[0,1,0,0],[0,0,1,-400],[0,0,0,1]],
      "base_keyposes": [{"t": 0, "pose": [[1,0,0,0],[0,1,0,-2000],[0,0,1,1500],[0,0,0,1]]}],
      "kin_keyposes": [{"t": 0, "pose": [[1,0,0,0],[0,1,0,0],[0,0,1,500],[0,0,0,1]]}]
    },
    "corruption": {"depth_sigma0_mm": 2.0, "dropout_rate": 0.1},
    "duration_s": 2.0
  })";
  const auto cfg = io::load_simulate_config(write_text(dir / "sim.json", text));
  CHECK(cfg.scene.seed == 7);
  CHECK(cfg.scene.humans.size() == 1);
  CHECK(cfg.rig.fps == 5.0);
  CHECK(cfg.rig.cam_base.width == 320);
  CHECK(cfg.rig.x.translation().x() == doctest::Approx(10.0));
  CHECK(cfg.corruption.depth_sigma0_mm == 2.0);
  CHECK(cfg.duration_s == 2.0);

  const std::string bad = R"({
    "rig": {
      "x": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
      "y": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
      "base_keyposes": [{"t": 0, "pose": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}],
      "kin_keyposes": [{"t": 0, "pose": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}]
    },
    "corruption": {"dropout_rate": 1.5},
    "duration_s": 1.0
  })";
  CHECK_THROWS_AS(
      io::load_simulate_config(write_text(dir / "bad_rate.json", bad)),
      std::invalid_argument);
}

TEST_CASE("calibration file round trip") {
  const fs::path dir = temp_dir("calib_file");
  std::mt19937 rng(404);
  io::CalibrationFile out;
  out.x = testutil::random_transform(rng);
  out.y = testutil::random_transform(rng);
  out.hand_eye_mean_residual = 0.125;
  out.y_rotation_spread_deg = 0.01;
  io::save_calibration(dir / "calib.json", out);

  const auto in = io::load_calibration(dir / "calib.json");
  CHECK(in.x.is_approx(out.x, 1e-12, 1e-9));
  CHECK(in.y.is_approx(out.y, 1e-12, 1e-9));
  REQUIRE(in.hand_eye_mean_residual.has_value());
  CHECK(*in.hand_eye_mean_residual == 0.125);
  CHECK(!in.hand_eye_max_residual.has_value());

  // Simulator ground-truth files carry no residual block.
  io::CalibrationFile truth;
  truth.x = out.x;
  truth.y = out.y;
  io::save_calibration(dir / "truth.json", truth);
  const auto truth_in = io::load_calibration(dir / "truth.json");
  CHECK(!truth_in.hand_eye_mean_residual.has_value());

  CHECK_THROWS(io::load_calibration(
      write_text(dir / "bad_units.json",
                 R"({"units":"m","X":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
                     "Y":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]})")));
}

TEST_CASE("calib samples from a dataset feed the solvers") {
  const auto dataset = io::load_dataset(shared_dataset());
  const auto samples_file = io::load_calib_samples(dataset.calib_samples_file);
  const auto truth = io::load_calibration(dataset.calibration_file);

  const sim::RigConfig rig = testutil::small_rig();
  REQUIRE(int(samples_file.samples.size()) == rig.calib.num_samples);
  CHECK(samples_file.board.inner_cols == rig.calib.board.inner_cols);

  // JSON round trip must not disturb the recovered calibration.
  const auto hand_eye = calib::solve_ax_xb(samples_file.samples,
                                           dataset.camera("op").intrinsics);
  CHECK(hand_eye.x.is_approx(truth.x, 1e-6, 1e-3));
  const auto fixed_cam =
      calib::solve_y(hand_eye.x, samples_file.samples,
                     dataset.camera("base").intrinsics,
                     dataset.camera("op").intrinsics);
  CHECK(fixed_cam.y.is_approx(truth.y, 1e-6, 1e-3));
}
