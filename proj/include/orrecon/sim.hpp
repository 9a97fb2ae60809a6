#ifndef ORRECON_SIM_HPP
#define ORRECON_SIM_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "orrecon/calib.hpp"
#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"
#include "orrecon/io.hpp"

// Synthetic operating-room scenes: analytic depth/label rendering, sensor
// corruption, and full on-disk dataset generation for the reconstruction
// pipeline. World frame: z up, floor plane at z = 0, millimeters.
namespace orrecon::sim {

// Semantic class ids shared by every generated dataset.
inline constexpr std::uint8_t kLabelBackground = 0;
inline constexpr std::uint8_t kLabelTable = 1;
inline constexpr std::uint8_t kLabelHuman = 2;
inline constexpr std::uint8_t kLabelFloor = 3;

/// A person approximated by a vertical capsule that walks a closed
/// waypoint loop on the floor at constant speed. A single waypoint (or
/// zero speed) keeps the capsule static; height <= 2*radius degenerates
/// to a sphere resting on the floor.
struct HumanConfig {
  std::vector<Eigen::Vector2d> waypoints_xy_mm;
  double speed_mm_s = 0.0;
  double start_phase = 0.0;  // [0,1) fraction of the loop walked at t=0
  double radius_mm = 220.0;
  double height_mm = 1700.0;
};

/// Static operating-table box. `pose` maps the box-centered frame into
/// the world; the default puts a 2000 x 700 x 100 slab with its top
/// surface at z = 900.
struct TableConfig {
  Eigen::Vector3d size_mm{2000.0, 700.0, 100.0};
  RigidTransform pose{Eigen::Matrix3d::Identity(),
                      Eigen::Vector3d(0.0, 0.0, 850.0)};
};

struct SceneConfig {
  TableConfig table;
  std::vector<HumanConfig> humans;
  bool floor = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Hand-eye calibration capture baked into a generated dataset: the base
/// stays at its t=0 pose while the manipulator camera orbits a board.
struct CalibCaptureConfig {
  calib::CheckerboardSpec board;
  RigidTransform world_from_board{Eigen::Matrix3d::Identity(),
                                  Eigen::Vector3d(0.0, 0.0, 905.0)};
  int num_samples = 20;
  double corner_noise_px = 0.0;
  double orbit_radius_mm = 700.0;

  void validate() const;
};

/// Two-camera rig: a static base camera (offset Y from the robot base)
/// and a kinematically tracked camera (offset X from the end effector).
/// Keypose tracks are interpolated (slerp + lerp) over time.
struct RigConfig {
  std::vector<io::TimedPose> base_keyposes;  // world_from_base(t)
  std::vector<io::TimedPose> kin_keyposes;   // op_from_base(t)
  RigidTransform x;                          // cam_from_op
  RigidTransform y;                          // cambase_from_base
  CameraIntrinsics cam_base = default_intrinsics();
  CameraIntrinsics cam_op = default_intrinsics();
  double fps = 30.0;
  CalibCaptureConfig calib;

  static CameraIntrinsics default_intrinsics();  // 1280x720
  static CameraIntrinsics desk_intrinsics();     // 320x288, fast preset

  void validate() const;
};

/// Sensor degradation applied to rendered frames. All-default config is
/// the identity. Depth noise sigma grows quadratically with range:
/// sigma(z) = sigma0 + sigma1 * z^2.
struct CorruptionConfig {
  double depth_sigma0_mm = 0.0;
  double depth_sigma1_per_mm = 0.0;  // multiplies z^2 (mm)
  double dropout_rate = 0.0;         // valid depth pixel -> 0
  int mask_jitter_radius_px = 0;     // resample labels near class edges
  double false_blob_rate = 0.0;      // per-frame chance of a fake table disk
  int false_blob_radius_px = 12;
  double label_leak_prob = 0.0;      // human pixel relabeled as table

  void validate() const;
};

/// Piecewise pose interpolation over timestamped keyposes (strictly
/// increasing times; clamped outside the covered range).
RigidTransform interpolate_pose(const std::vector<io::TimedPose>& keyposes,
                                double t);

/// Floor-plane position (z=0) of a walking human at time t.
Eigen::Vector3d human_position(const HumanConfig& human, double t);

/// Analytic ray-cast render of the scene at time t from `world_from_cam`.
/// Depth is the exact camera-frame z in mm (0 = no hit), labels are the
/// nearest-surface class. unproject(u, v, depth) reproduces the hit point
/// in camera coordinates to machine precision.
FrameBundle render_frame(const SceneConfig& scene,
                         const RigidTransform& world_from_cam,
                         const CameraIntrinsics& intrinsics, double t);

/// Apply depth noise, dropout, mask jitter, false blobs and label leak in
/// that fixed order. Stages with zero-valued parameters draw no random
/// numbers, so the all-default config returns an identical frame.
FrameBundle corrupt_frame(const FrameBundle& frame,
                          const CorruptionConfig& corruption,
                          std::mt19937& rng);

/// Synthesize hand-eye samples consistent with the rig's true X and Y:
/// every sample sees the board from the orbiting camera and from the
/// static base camera. Throws if the board is out of view.
std::vector<calib::CalibrationSample> make_calib_samples(const RigConfig& rig,
                                                         std::uint64_t seed);

struct DatasetSummary {
  int frames = 0;
  std::filesystem::path manifest_path;
};

/// Render, corrupt and write a complete dataset under `out_dir`:
/// per-camera depth/, mask/ (corrupted) and gt_mask/ (clean) PNG streams,
/// ground-truth TUM trajectories, kinematics.csv, true calibration,
/// hand-eye samples and manifest.json. Deterministic for a fixed config.
DatasetSummary generate_dataset(const SceneConfig& scene, const RigConfig& rig,
                                const CorruptionConfig& corruption,
                                double duration_s,
                                const std::filesystem::path& out_dir);

}  // namespace orrecon::sim

#endif  // ORRECON_SIM_HPP
