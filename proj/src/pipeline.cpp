#include "orrecon/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <stdexcept>

#include "orrecon/fusion.hpp"
#include "orrecon/metrics.hpp"
#include "orrecon/semrecon.hpp"
#include "orrecon/track.hpp"

namespace orrecon::pipeline {
namespace {

namespace fs = std::filesystem;

std::set<uint8_t> label_ids(const io::DatasetManifest& dataset,
                            const std::vector<std::string>& names) {
  std::set<uint8_t> ids;
  for (const auto& name : names) {
    ids.insert(dataset.label_id(name));
  }
  return ids;
}

semrecon::ReconConfig recon_config(const PipelineConfig& config,
                                   const std::set<uint8_t>& keep_ids) {
  semrecon::ReconConfig rc;
  rc.keep_labels = keep_ids;
  rc.opening_radius_px = config.opening_radius_px;
  rc.icp = config.icp;
  rc.outlier_k = config.outlier_k;
  rc.outlier_sigma = config.outlier_sigma;
  rc.voxel_mm = config.voxel_size_mm;
  rc.splat_radius_px = config.splat_radius_px;
  return rc;
}

track::TrackerConfig tracker_config(const PipelineConfig& config) {
  track::TrackerConfig tc;
  tc.icp = config.icp;
  tc.stride_px = config.odometry_stride_px;
  tc.model_voxel_mm = config.odometry_model_voxel_mm;
  tc.dynamic_dilate_px = config.dynamic_dilate_px;
  return tc;
}

/// What one frame reconstructs on its own: opened mask, kept labels,
/// unprojection, voxel grid. Feeds the single-frame curve.
std::size_t single_frame_size(const FrameBundle& frame,
                              const CameraIntrinsics& intrinsics,
                              const PipelineConfig& config,
                              const std::set<uint8_t>& keep_ids) {
  const LabelMask opened = open_mask(frame.mask, config.opening_radius_px);
  const LabeledPointCloud cloud =
      cloud_from_depth(frame.depth, opened, intrinsics, keep_ids, 1, "single");
  if (cloud.size() == 0) return 0;
  return voxel_resample(cloud, config.voxel_size_mm).size();
}

struct CamState {
  const io::CameraStream* stream;
  semrecon::CamId cam_id;
  track::KeyframeSelector selector;
  semrecon::CameraRecon recon;
  std::optional<track::PoseTracker> tracker;
  metrics::Trajectory est;
  RigidTransform pose;  // world_from_camera at the current frame
  bool pose_valid = false;
  std::vector<std::size_t> single_sizes;
  std::vector<std::size_t> slam_sizes;
  int keyframes = 0;
};

void write_curve_csv(const fs::path& path, const CamState& base,
                     const CamState& op,
                     const std::vector<std::size_t>& fused_sizes,
                     std::size_t benchmark) {
  const auto pct = [&](const std::vector<std::size_t>& series) {
    return metrics::recon_percentage(series, benchmark);
  };
  const auto single_base = pct(base.single_sizes);
  const auto single_op = pct(op.single_sizes);
  const auto slam_base = pct(base.slam_sizes);
  const auto slam_op = pct(op.slam_sizes);
  const auto fused = pct(fused_sizes);

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "frame,single_base,single_op,slam_base,slam_op,fused\n"
      << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < fused.size(); ++i) {
    out << i << ',' << single_base[i] << ',' << single_op[i] << ','
        << slam_base[i] << ',' << slam_op[i] << ',' << fused[i] << '\n';
  }
}

}  // namespace

RunSummary run_reconstruction(const io::DatasetManifest& dataset,
                              const io::CalibrationFile& calibration,
                              const PipelineConfig& config,
                              const RunOptions& options) {
  config.validate();
  const std::set<uint8_t> keep_ids = label_ids(dataset, config.keep_labels);
  const std::set<uint8_t> dynamic_ids =
      label_ids(dataset, config.dynamic_labels);

  const auto make_state = [&](const std::string& name, semrecon::CamId id) {
    const io::CameraStream& stream = dataset.camera(name);
    CamState state{
        &stream,
        id,
        track::KeyframeSelector(config.keyframe_translation_mm,
                                config.keyframe_rotation_deg,
                                config.keyframe_max_gap),
        semrecon::CameraRecon(id, stream.intrinsics,
                              recon_config(config, keep_ids)),
        std::nullopt,
        {},
        RigidTransform{},
        false,
        {},
        {},
        0};
    if (config.pose_source == PoseSource::kDepthOdometry) {
      state.tracker.emplace(stream.intrinsics, tracker_config(config));
    } else if (config.pose_source == PoseSource::kGroundTruth) {
      state.tracker.emplace(stream.intrinsics, tracker_config(config),
                            stream.gt_trajectory);
    }
    return state;
  };
  CamState base = make_state("base", semrecon::CamId::kBase);
  CamState op = make_state("op", semrecon::CamId::kOp);

  RunSummary summary;
  summary.frames = dataset.frames;

  const fs::path out = options.out_dir;
  fs::create_directories(out);
  for (const char* variant : {"single", "slam", "fused"}) {
    fs::create_directories(out / "masks" / variant / "base");
    fs::create_directories(out / "masks" / variant / "op");
  }
  if (options.keyframe_snapshots) {
    fs::create_directories(out / "snapshots" / "base");
    fs::create_directories(out / "snapshots" / "op");
  }

  std::ofstream fusion_log(out / "fusion_log.csv");
  if (!fusion_log) {
    throw std::runtime_error("cannot write " +
                             (out / "fusion_log.csv").string());
  }
  fusion_log << "frame,rms_residual_mm,iterations,correspondences,"
                "removed_outliers,global_size\n"
             << std::fixed << std::setprecision(4);

  LabeledPointCloud global_cloud;
  std::vector<std::size_t> fused_sizes;

  for (int i = 0; i < dataset.frames; ++i) {
    const double t = dataset.kinematics[i].first;
    const RigidTransform& kin = dataset.kinematics[i].second;
    bool any_keyframe = false;

    for (CamState* cam : {&base, &op}) {
      const FrameBundle frame = io::load_frame(dataset, *cam->stream, i);

      if (config.pose_source == PoseSource::kKinematics) {
        cam->pose = cam->cam_id == semrecon::CamId::kOp
                        ? (calibration.x * kin).inverse()
                        : calibration.y.inverse();
        cam->pose_valid = true;
      } else {
        try {
          cam->pose = cam->tracker->track_frame(frame, dynamic_ids);
          cam->pose_valid = true;
        } catch (const track::TrackingLost& e) {
          if (!cam->pose_valid) {
            throw std::runtime_error(cam->stream->name +
                                     " frame 0: " + e.what());
          }
          summary.warnings.push_back(cam->stream->name + " frame " +
                                     std::to_string(i) + ": " + e.what() +
                                     "; reusing the last pose");
        }
      }
      cam->est.push_back(t, cam->pose);

      const auto decision = cam->selector.decide(cam->pose);
      if (decision.is_keyframe) {
        ++cam->keyframes;
        any_keyframe = true;
        if (cam->recon.process_keyframe(frame, cam->pose) &&
            options.keyframe_snapshots) {
          char name[24];
          std::snprintf(name, sizeof name, "%06d.ply", i);
          io::write_ply(out / "snapshots" / cam->stream->name / name,
                        cam->recon.world_cloud());
        }
      }

      cam->single_sizes.push_back(single_frame_size(
          frame, cam->stream->intrinsics, config, keep_ids));
      cam->slam_sizes.push_back(cam->recon.world_cloud().size());
    }

    const fusion::AnchorTransforms anchors = fusion::anchor_world_frames(
        op.pose, base.pose, kin, calibration.x, calibration.y);

    if (any_keyframe && base.recon.world_cloud().size() > 0 &&
        op.recon.world_cloud().size() > 0) {
      fusion::FusionInputs inputs;
      inputs.p_op = op.recon.world_cloud();
      inputs.p_base = base.recon.world_cloud();
      inputs.t_c_kin = kin;
      inputs.x = calibration.x;
      inputs.y = calibration.y;
      inputs.op_world_from_cam = op.pose;
      inputs.base_world_from_cam = base.pose;
      inputs.op_intrinsics = op.stream->intrinsics;
      inputs.base_intrinsics = base.stream->intrinsics;
      fusion::FusionParams params;
      params.icp = config.icp;
      params.outlier_k = config.outlier_k;
      params.outlier_sigma = config.outlier_sigma;
      params.voxel_mm = config.voxel_size_mm;
      params.splat_radius_px = config.splat_radius_px;
      try {
        fusion::FusionResult result = fusion::fuse(inputs, params);
        global_cloud = std::move(result.p_global);
        ++summary.fusions;
        fusion_log << i << ',' << result.icp.rms_residual_mm << ','
                   << result.icp.iterations << ','
                   << result.icp.final_correspondences << ','
                   << result.removed_outliers << ',' << global_cloud.size()
                   << '\n';
      } catch (const NonOverlapError& e) {
        summary.warnings.push_back("frame " + std::to_string(i) +
                                   ": fusion skipped: " + e.what());
      }
    }
    fused_sizes.push_back(global_cloud.size());

    // Refined masks for evaluation, once there is a fused cloud to compare.
    if (i % config.eval_stride == 0 && global_cloud.size() > 0) {
      for (CamState* cam : {&base, &op}) {
        const FrameBundle frame = io::load_frame(dataset, *cam->stream, i);
        const fs::path name = io::frame_file_name(i);
        io::write_mask_png(out / "masks" / "single" / cam->stream->name / name,
                           frame.mask);
        io::write_mask_png(
            out / "masks" / "slam" / cam->stream->name / name,
            cam->recon.refine_mask(cam->pose, cam->stream->intrinsics));
        const RigidTransform base_from_world =
            cam->cam_id == semrecon::CamId::kOp ? anchors.base_from_op_world
                                                : anchors.base_from_base_world;
        const RigidTransform cam_from_base =
            (base_from_world * cam->pose).inverse();
        io::write_mask_png(
            out / "masks" / "fused" / cam->stream->name / name,
            reproject(global_cloud, cam_from_base, cam->stream->intrinsics,
                      config.splat_radius_px));
      }
      ++summary.eval_frames;
    }
  }

  io::write_tum(out / "trajectory_base.txt", base.est);
  io::write_tum(out / "trajectory_op.txt", op.est);
  io::write_ply(out / "cloud_base.ply", base.recon.world_cloud());
  io::write_ply(out / "cloud_op.ply", op.recon.world_cloud());
  io::write_ply(out / "cloud_global.ply", global_cloud);

  // Benchmark for the percentage curves: the final fused cloud; when no
  // fusion ever ran, fall back to the largest accumulated size so the CSV
  // is still well-formed.
  std::size_t benchmark = global_cloud.size();
  if (benchmark == 0) {
    for (const auto* series : {&base.slam_sizes, &op.slam_sizes}) {
      for (const std::size_t s : *series) benchmark = std::max(benchmark, s);
    }
    benchmark = std::max<std::size_t>(benchmark, 1);
    summary.warnings.push_back(
        "no fusion ran; recon_percentage.csv uses the largest single-camera "
        "cloud as the benchmark");
  }
  write_curve_csv(out / "recon_percentage.csv", base, op, fused_sizes,
                  benchmark);

  for (const CamState* cam : {&base, &op}) {
    for (const std::string& w : cam->recon.warnings()) {
      summary.warnings.push_back(cam->stream->name + ": " + w);
    }
  }
  summary.keyframes_base = base.keyframes;
  summary.keyframes_op = op.keyframes;
  summary.base_cloud_size = base.recon.world_cloud().size();
  summary.op_cloud_size = op.recon.world_cloud().size();
  summary.global_cloud_size = global_cloud.size();
  return summary;
}

}  // namespace orrecon::pipeline
