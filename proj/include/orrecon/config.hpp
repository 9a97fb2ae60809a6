#ifndef ORRECON_CONFIG_HPP
#define ORRECON_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orrecon/cloud.hpp"
#include "orrecon/sim.hpp"

namespace orrecon {

/// Where the per-frame camera poses come from during reconstruction.
enum class PoseSource {
  kKinematics,     // robot kinematics chained through the calibration
  kDepthOdometry,  // frame-to-model ICP on the depth stream
  kGroundTruth,    // dataset ground-truth playback (debug baseline)
};

/// Every pipeline tunable in one place. The defaults are the production
/// constants; config files only need to list what they override.
struct PipelineConfig {
  int opening_radius_px = 10;
  IcpParams icp;  // 10 iterations, 50 mm cutoff
  int outlier_k = 100;
  double outlier_sigma = 3.0;
  double voxel_size_mm = 10.0;
  std::vector<std::string> keep_labels = {"table"};
  std::vector<std::string> dynamic_labels = {"human"};
  double keyframe_translation_mm = 50.0;
  double keyframe_rotation_deg = 5.0;
  int keyframe_max_gap = 30;
  PoseSource pose_source = PoseSource::kKinematics;
  int splat_radius_px = 2;
  int eval_stride = 5;  // refined masks are emitted every Nth frame
  // depth odometry
  int odometry_stride_px = 4;
  double odometry_model_voxel_mm = 20.0;
  int dynamic_dilate_px = 5;

  void validate() const;
};

}  // namespace orrecon

namespace orrecon::io {

/// Strictly parsed JSON (unknown keys fail). All fields optional; defaults
/// are PipelineConfig's own.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Input for the `simulate` subcommand: scene + rig + corruption + length.
struct SimulateConfig {
  sim::SceneConfig scene;
  sim::RigConfig rig;
  sim::CorruptionConfig corruption;
  double duration_s = 1.0;
};

SimulateConfig load_simulate_config(const std::filesystem::path& path);

/// calib.json: the X/Y pair, with solver residuals when produced by the
/// calibrate subcommand (absent in simulator ground-truth files).
struct CalibrationFile {
  RigidTransform x;  // cam_from_op
  RigidTransform y;  // cambase_from_base
  std::optional<double> hand_eye_mean_residual;
  std::optional<double> hand_eye_max_residual;
  std::optional<double> y_rotation_spread_deg;
  std::optional<double> y_translation_spread_mm;
};

CalibrationFile load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path,
                      const CalibrationFile& calibration);

/// calib_samples.json written by the simulator: board spec + per-sample
/// kinematics and detected corners.
struct CalibSamplesFile {
  calib::CheckerboardSpec board;
  std::vector<calib::CalibrationSample> samples;
};

CalibSamplesFile load_calib_samples(const std::filesystem::path& path);

}  // namespace orrecon::io

#endif  // ORRECON_CONFIG_HPP
