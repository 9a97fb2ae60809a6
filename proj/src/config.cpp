#include "orrecon/config.hpp"

#include <fstream>

#include "json_util.hpp"

namespace orrecon {

void PipelineConfig::validate() const {
  if (opening_radius_px < 0 || splat_radius_px < 0 || dynamic_dilate_px < 0) {
    throw std::invalid_argument("PipelineConfig: radii must be >= 0");
  }
  if (icp.max_iterations < 1 || icp.correspondence_cutoff_mm <= 0.0) {
    throw std::invalid_argument("PipelineConfig: bad icp params");
  }
  if (outlier_k < 1 || outlier_sigma <= 0.0) {
    throw std::invalid_argument("PipelineConfig: bad outlier filter params");
  }
  if (voxel_size_mm <= 0.0 || odometry_model_voxel_mm <= 0.0) {
    throw std::invalid_argument("PipelineConfig: voxel sizes must be > 0");
  }
  if (keep_labels.empty()) {
    throw std::invalid_argument("PipelineConfig: keep_labels must not be empty");
  }
  if (keyframe_translation_mm <= 0.0 || keyframe_rotation_deg <= 0.0 ||
      keyframe_max_gap < 1) {
    throw std::invalid_argument("PipelineConfig: bad keyframe thresholds");
  }
  if (eval_stride < 1 || odometry_stride_px < 1) {
    throw std::invalid_argument("PipelineConfig: strides must be >= 1");
  }
}

}  // namespace orrecon

namespace orrecon::io {

namespace {

using jsonutil::as_int;
using jsonutil::as_number;
using jsonutil::as_pose;
using jsonutil::as_vec2;
using jsonutil::as_vec3;
using jsonutil::require_keys;

PoseSource parse_pose_source(const std::string& name, const std::string& ctx) {
  if (name == "kinematics") {
    return PoseSource::kKinematics;
  }
  if (name == "depth_odometry") {
    return PoseSource::kDepthOdometry;
  }
  if (name == "ground_truth") {
    return PoseSource::kGroundTruth;
  }
  throw std::runtime_error(ctx + ": unknown pose source \"" + name +
                           "\" (kinematics | depth_odometry | ground_truth)");
}

std::vector<std::string> parse_string_list(const nlohmann::json& j,
                                           const std::string& ctx) {
  if (!j.is_array()) {
    throw std::runtime_error(ctx + ": expected an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw std::runtime_error(ctx + ": expected an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

CameraIntrinsics parse_camera(const nlohmann::json& j, const std::string& ctx) {
  if (j.is_string()) {  // named preset
    const std::string preset = j.get<std::string>();
    if (preset == "default") {
      return sim::RigConfig::default_intrinsics();
    }
    if (preset == "desk") {
      return sim::RigConfig::desk_intrinsics();
    }
    throw std::runtime_error(ctx + ": unknown camera preset \"" + preset +
                             "\" (default | desk)");
  }
  require_keys(j, ctx, {"fx", "fy", "cx", "cy", "width", "height"},
               {"depth_scale"});
  CameraIntrinsics k;
  k.fx = as_number(j.at("fx"), ctx + ".fx");
  k.fy = as_number(j.at("fy"), ctx + ".fy");
  k.cx = as_number(j.at("cx"), ctx + ".cx");
  k.cy = as_number(j.at("cy"), ctx + ".cy");
  k.width = as_int(j.at("width"), ctx + ".width");
  k.height = as_int(j.at("height"), ctx + ".height");
  if (j.contains("depth_scale")) {
    k.depth_scale = as_number(j.at("depth_scale"), ctx + ".depth_scale");
  }
  k.validate();
  return k;
}

std::vector<TimedPose> parse_keyposes(const nlohmann::json& j,
                                      const std::string& ctx) {
  if (!j.is_array() || j.empty()) {
    throw std::runtime_error(ctx + ": expected a non-empty array of keyposes");
  }
  std::vector<TimedPose> out;
  for (const auto& kp : j) {
    require_keys(kp, ctx + "[]", {"t", "pose"});
    out.emplace_back(as_number(kp.at("t"), ctx + "[].t"),
                     as_pose(kp.at("pose"), ctx + "[].pose"));
  }
  return out;
}

sim::SceneConfig parse_scene(const nlohmann::json& j, const std::string& ctx) {
  require_keys(j, ctx, {}, {"table", "humans", "floor", "seed"});
  sim::SceneConfig scene;
  if (j.contains("table")) {
    const std::string tctx = ctx + ".table";
    require_keys(j.at("table"), tctx, {}, {"size_mm", "pose"});
    if (j.at("table").contains("size_mm")) {
      scene.table.size_mm = as_vec3(j.at("table").at("size_mm"),
                                    tctx + ".size_mm");
    }
    if (j.at("table").contains("pose")) {
      scene.table.pose = as_pose(j.at("table").at("pose"), tctx + ".pose");
    }
  }
  if (j.contains("humans")) {
    if (!j.at("humans").is_array()) {
      throw std::runtime_error(ctx + ".humans: expected an array");
    }
    for (const auto& hj : j.at("humans")) {
      const std::string hctx = ctx + ".humans[]";
      require_keys(hj, hctx, {"waypoints_xy_mm"},
                   {"speed_mm_s", "start_phase", "radius_mm", "height_mm"});
      sim::HumanConfig human;
      for (const auto& wp : hj.at("waypoints_xy_mm")) {
        human.waypoints_xy_mm.push_back(
            as_vec2(wp, hctx + ".waypoints_xy_mm[]"));
      }
      if (hj.contains("speed_mm_s")) {
        human.speed_mm_s = as_number(hj.at("speed_mm_s"), hctx + ".speed_mm_s");
      }
      if (hj.contains("start_phase")) {
        human.start_phase = as_number(hj.at("start_phase"),
                                      hctx + ".start_phase");
      }
      if (hj.contains("radius_mm")) {
        human.radius_mm = as_number(hj.at("radius_mm"), hctx + ".radius_mm");
      }
      if (hj.contains("height_mm")) {
        human.height_mm = as_number(hj.at("height_mm"), hctx + ".height_mm");
      }
      scene.humans.push_back(std::move(human));
    }
  }
  if (j.contains("floor")) {
    if (!j.at("floor").is_boolean()) {
      throw std::runtime_error(ctx + ".floor: expected a boolean");
    }
    scene.floor = j.at("floor").get<bool>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) {
      throw std::runtime_error(ctx + ".seed: expected an integer");
    }
    scene.seed = j.at("seed").get<std::uint64_t>();
  }
  scene.validate();
  return scene;
}

sim::RigConfig parse_rig(const nlohmann::json& j, const std::string& ctx) {
  require_keys(j, ctx, {"base_keyposes", "kin_keyposes", "x", "y"},
               {"cam_base", "cam_op", "fps", "calib"});
  sim::RigConfig rig;
  rig.base_keyposes = parse_keyposes(j.at("base_keyposes"),
                                     ctx + ".base_keyposes");
  rig.kin_keyposes = parse_keyposes(j.at("kin_keyposes"), ctx + ".kin_keyposes");
  rig.x = as_pose(j.at("x"), ctx + ".x");
  rig.y = as_pose(j.at("y"), ctx + ".y");
  if (j.contains("cam_base")) {
    rig.cam_base = parse_camera(j.at("cam_base"), ctx + ".cam_base");
  }
  if (j.contains("cam_op")) {
    rig.cam_op = parse_camera(j.at("cam_op"), ctx + ".cam_op");
  }
  if (j.contains("fps")) {
    rig.fps = as_number(j.at("fps"), ctx + ".fps");
  }
  if (j.contains("calib")) {
    const auto& cj = j.at("calib");
    const std::string cctx = ctx + ".calib";
    require_keys(cj, cctx, {},
                 {"board", "world_from_board", "num_samples", "corner_noise_px",
                  "orbit_radius_mm"});
    if (cj.contains("board")) {
      require_keys(cj.at("board"), cctx + ".board",
                   {"inner_cols", "inner_rows", "square_size_mm"});
      rig.calib.board.inner_cols =
          as_int(cj.at("board").at("inner_cols"), cctx + ".board.inner_cols");
      rig.calib.board.inner_rows =
          as_int(cj.at("board").at("inner_rows"), cctx + ".board.inner_rows");
      rig.calib.board.square_size_mm = as_number(
          cj.at("board").at("square_size_mm"), cctx + ".board.square_size_mm");
    }
    if (cj.contains("world_from_board")) {
      rig.calib.world_from_board =
          as_pose(cj.at("world_from_board"), cctx + ".world_from_board");
    }
    if (cj.contains("num_samples")) {
      rig.calib.num_samples = as_int(cj.at("num_samples"),
                                     cctx + ".num_samples");
    }
    if (cj.contains("corner_noise_px")) {
      rig.calib.corner_noise_px = as_number(cj.at("corner_noise_px"),
                                            cctx + ".corner_noise_px");
    }
    if (cj.contains("orbit_radius_mm")) {
      rig.calib.orbit_radius_mm = as_number(cj.at("orbit_radius_mm"),
                                            cctx + ".orbit_radius_mm");
    }
  }
  rig.validate();
  return rig;
}

sim::CorruptionConfig parse_corruption(const nlohmann::json& j,
                                       const std::string& ctx) {
  require_keys(j, ctx, {},
               {"depth_sigma0_mm", "depth_sigma1_per_mm", "dropout_rate",
                "mask_jitter_radius_px", "false_blob_rate",
                "false_blob_radius_px", "label_leak_prob"});
  sim::CorruptionConfig c;
  if (j.contains("depth_sigma0_mm")) {
    c.depth_sigma0_mm = as_number(j.at("depth_sigma0_mm"),
                                  ctx + ".depth_sigma0_mm");
  }
  if (j.contains("depth_sigma1_per_mm")) {
    c.depth_sigma1_per_mm = as_number(j.at("depth_sigma1_per_mm"),
                                      ctx + ".depth_sigma1_per_mm");
  }
  if (j.contains("dropout_rate")) {
    c.dropout_rate = as_number(j.at("dropout_rate"), ctx + ".dropout_rate");
  }
  if (j.contains("mask_jitter_radius_px")) {
    c.mask_jitter_radius_px = as_int(j.at("mask_jitter_radius_px"),
                                     ctx + ".mask_jitter_radius_px");
  }
  if (j.contains("false_blob_rate")) {
    c.false_blob_rate = as_number(j.at("false_blob_rate"),
                                  ctx + ".false_blob_rate");
  }
  if (j.contains("false_blob_radius_px")) {
    c.false_blob_radius_px = as_int(j.at("false_blob_radius_px"),
                                    ctx + ".false_blob_radius_px");
  }
  if (j.contains("label_leak_prob")) {
    c.label_leak_prob = as_number(j.at("label_leak_prob"),
                                  ctx + ".label_leak_prob");
  }
  c.validate();
  return c;
}

nlohmann::json matrix_json(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  }
  return rows;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  const std::string ctx = path.string();
  require_keys(j, ctx, {},
               {"opening_radius_px", "icp_max_iterations",
                "icp_correspondence_cutoff_mm", "outlier_k", "outlier_sigma",
                "voxel_size_mm", "keep_labels", "dynamic_labels",
                "keyframe_translation_mm", "keyframe_rotation_deg",
                "keyframe_max_gap", "pose_source", "splat_radius_px",
                "eval_stride", "odometry_stride_px", "odometry_model_voxel_mm",
                "dynamic_dilate_px"});

  PipelineConfig cfg;
  if (j.contains("opening_radius_px")) {
    cfg.opening_radius_px = as_int(j.at("opening_radius_px"),
                                   ctx + ".opening_radius_px");
  }
  if (j.contains("icp_max_iterations")) {
    cfg.icp.max_iterations = as_int(j.at("icp_max_iterations"),
                                    ctx + ".icp_max_iterations");
  }
  if (j.contains("icp_correspondence_cutoff_mm")) {
    cfg.icp.correspondence_cutoff_mm =
        as_number(j.at("icp_correspondence_cutoff_mm"),
                  ctx + ".icp_correspondence_cutoff_mm");
  }
  if (j.contains("outlier_k")) {
    cfg.outlier_k = as_int(j.at("outlier_k"), ctx + ".outlier_k");
  }
  if (j.contains("outlier_sigma")) {
    cfg.outlier_sigma = as_number(j.at("outlier_sigma"), ctx + ".outlier_sigma");
  }
  if (j.contains("voxel_size_mm")) {
    cfg.voxel_size_mm = as_number(j.at("voxel_size_mm"), ctx + ".voxel_size_mm");
  }
  if (j.contains("keep_labels")) {
    cfg.keep_labels = parse_string_list(j.at("keep_labels"),
                                        ctx + ".keep_labels");
  }
  if (j.contains("dynamic_labels")) {
    cfg.dynamic_labels = parse_string_list(j.at("dynamic_labels"),
                                           ctx + ".dynamic_labels");
  }
  if (j.contains("keyframe_translation_mm")) {
    cfg.keyframe_translation_mm = as_number(j.at("keyframe_translation_mm"),
                                            ctx + ".keyframe_translation_mm");
  }
  if (j.contains("keyframe_rotation_deg")) {
    cfg.keyframe_rotation_deg = as_number(j.at("keyframe_rotation_deg"),
                                          ctx + ".keyframe_rotation_deg");
  }
  if (j.contains("keyframe_max_gap")) {
    cfg.keyframe_max_gap = as_int(j.at("keyframe_max_gap"),
                                  ctx + ".keyframe_max_gap");
  }
  if (j.contains("pose_source")) {
    if (!j.at("pose_source").is_string()) {
      throw std::runtime_error(ctx + ".pose_source: expected a string");
    }
    cfg.pose_source = parse_pose_source(j.at("pose_source").get<std::string>(),
                                        ctx + ".pose_source");
  }
  if (j.contains("splat_radius_px")) {
    cfg.splat_radius_px = as_int(j.at("splat_radius_px"),
                                 ctx + ".splat_radius_px");
  }
  if (j.contains("eval_stride")) {
    cfg.eval_stride = as_int(j.at("eval_stride"), ctx + ".eval_stride");
  }
  if (j.contains("odometry_stride_px")) {
    cfg.odometry_stride_px = as_int(j.at("odometry_stride_px"),
                                    ctx + ".odometry_stride_px");
  }
  if (j.contains("odometry_model_voxel_mm")) {
    cfg.odometry_model_voxel_mm = as_number(j.at("odometry_model_voxel_mm"),
                                            ctx + ".odometry_model_voxel_mm");
  }
  if (j.contains("dynamic_dilate_px")) {
    cfg.dynamic_dilate_px = as_int(j.at("dynamic_dilate_px"),
                                   ctx + ".dynamic_dilate_px");
  }
  cfg.validate();
  return cfg;
}

SimulateConfig load_simulate_config(const std::filesystem::path& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  const std::string ctx = path.string();
  require_keys(j, ctx, {"rig", "duration_s"}, {"scene", "corruption"});

  SimulateConfig cfg;
  if (j.contains("scene")) {
    cfg.scene = parse_scene(j.at("scene"), ctx + ".scene");
  }
  cfg.rig = parse_rig(j.at("rig"), ctx + ".rig");
  if (j.contains("corruption")) {
    cfg.corruption = parse_corruption(j.at("corruption"), ctx + ".corruption");
  }
  cfg.duration_s = as_number(j.at("duration_s"), ctx + ".duration_s");
  if (cfg.duration_s <= 0.0) {
    throw std::runtime_error(ctx + ".duration_s: must be > 0");
  }
  return cfg;
}

CalibrationFile load_calibration(const std::filesystem::path& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  const std::string ctx = path.string();
  require_keys(j, ctx, {"units", "X", "Y"}, {"residuals"});
  if (j.at("units") != "mm") {
    throw std::runtime_error(ctx + ": units must be \"mm\"");
  }
  CalibrationFile calibration;
  calibration.x = as_pose(j.at("X"), ctx + ".X");
  calibration.y = as_pose(j.at("Y"), ctx + ".Y");
  if (j.contains("residuals")) {
    const auto& r = j.at("residuals");
    const std::string rctx = ctx + ".residuals";
    require_keys(r, rctx, {},
                 {"hand_eye_mean", "hand_eye_max", "y_rotation_spread_deg",
                  "y_translation_spread_mm"});
    if (r.contains("hand_eye_mean")) {
      calibration.hand_eye_mean_residual = as_number(r.at("hand_eye_mean"),
                                                     rctx + ".hand_eye_mean");
    }
    if (r.contains("hand_eye_max")) {
      calibration.hand_eye_max_residual = as_number(r.at("hand_eye_max"),
                                                    rctx + ".hand_eye_max");
    }
    if (r.contains("y_rotation_spread_deg")) {
      calibration.y_rotation_spread_deg = as_number(
          r.at("y_rotation_spread_deg"), rctx + ".y_rotation_spread_deg");
    }
    if (r.contains("y_translation_spread_mm")) {
      calibration.y_translation_spread_mm = as_number(
          r.at("y_translation_spread_mm"), rctx + ".y_translation_spread_mm");
    }
  }
  return calibration;
}

void save_calibration(const std::filesystem::path& path,
                      const CalibrationFile& calibration) {
  nlohmann::json j;
  j["units"] = "mm";
  j["X"] = matrix_json(calibration.x);
  j["Y"] = matrix_json(calibration.y);
  nlohmann::json residuals;
  if (calibration.hand_eye_mean_residual) {
    residuals["hand_eye_mean"] = *calibration.hand_eye_mean_residual;
  }
  if (calibration.hand_eye_max_residual) {
    residuals["hand_eye_max"] = *calibration.hand_eye_max_residual;
  }
  if (calibration.y_rotation_spread_deg) {
    residuals["y_rotation_spread_deg"] = *calibration.y_rotation_spread_deg;
  }
  if (calibration.y_translation_spread_mm) {
    residuals["y_translation_spread_mm"] = *calibration.y_translation_spread_mm;
  }
  if (!residuals.empty()) {
    j["residuals"] = residuals;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path.string() + ": cannot open for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error(path.string() + ": write failed");
  }
}

CalibSamplesFile load_calib_samples(const std::filesystem::path& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  const std::string ctx = path.string();
  require_keys(j, ctx, {"board", "samples"});
  require_keys(j.at("board"), ctx + ".board",
               {"inner_cols", "inner_rows", "square_size_mm"});

  CalibSamplesFile file;
  file.board.inner_cols = as_int(j.at("board").at("inner_cols"),
                                 ctx + ".board.inner_cols");
  file.board.inner_rows = as_int(j.at("board").at("inner_rows"),
                                 ctx + ".board.inner_rows");
  file.board.square_size_mm = as_number(j.at("board").at("square_size_mm"),
                                        ctx + ".board.square_size_mm");
  file.board.validate();
  const std::vector<Eigen::Vector3d> board_pts = file.board.corner_points();

  if (!j.at("samples").is_array()) {
    throw std::runtime_error(ctx + ".samples: expected an array");
  }
  for (const auto& sj : j.at("samples")) {
    const std::string sctx = ctx + ".samples[]";
    require_keys(sj, sctx, {"kinematics", "op_corners"}, {"base_corners"});
    calib::CalibrationSample sample;
    sample.kinematics = as_pose(sj.at("kinematics"), sctx + ".kinematics");

    const auto parse_corners = [&](const nlohmann::json& arr,
                                   const std::string& cctx) {
      if (!arr.is_array() || arr.size() != board_pts.size()) {
        throw std::runtime_error(cctx + ": expected " +
                                 std::to_string(board_pts.size()) +
                                 " corners in board order");
      }
      std::vector<calib::CornerCorrespondence> corners;
      corners.reserve(board_pts.size());
      for (size_t i = 0; i < board_pts.size(); ++i) {
        corners.emplace_back(as_vec2(arr[i], cctx + "[]"), board_pts[i]);
      }
      return corners;
    };
    sample.board_corners_op = parse_corners(sj.at("op_corners"),
                                            sctx + ".op_corners");
    if (sj.contains("base_corners")) {
      sample.board_corners_base = parse_corners(sj.at("base_corners"),
                                                sctx + ".base_corners");
    }
    file.samples.push_back(std::move(sample));
  }
  return file;
}

}  // namespace orrecon::io
