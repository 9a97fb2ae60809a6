#ifndef ORRECON_CALIB_HPP
#define ORRECON_CALIB_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "orrecon/geom.hpp"

namespace orrecon::calib {

/// Planar calibration target, described by its inner-corner grid.
struct CheckerboardSpec {
  int inner_cols = 6;
  int inner_rows = 9;
  double square_size_mm = 30.0;

  void validate() const;
  /// Inner corners in the board frame (z = 0), row-major order.
  std::vector<Eigen::Vector3d> corner_points() const;
};

/// 2D pixel observation paired with its 3D point in the board frame.
using CornerCorrespondence = std::pair<Eigen::Vector2d, Eigen::Vector3d>;

/// One robot configuration: forward kinematics plus the detected board
/// corners in the wrist camera, optionally also in the static camera.
struct CalibrationSample {
  RigidTransform kinematics;  // op_from_base at capture time
  std::vector<CornerCorrespondence> board_corners_op;
  std::optional<std::vector<CornerCorrespondence>> board_corners_base;
};

class DegenerateMotionError : public std::runtime_error {
 public:
  explicit DegenerateMotionError(const std::string& what)
      : std::runtime_error(what) {}
};

struct PlanarPoseResult {
  RigidTransform cam_from_board;
  double mean_reprojection_px = 0.0;
};

/// Pose of a planar target from 2D-3D correspondences: plane-to-image
/// homography (normalized DLT), rotation extraction, then Gauss-Newton
/// refinement of the reprojection error.
PlanarPoseResult estimate_planar_pose(
    const CheckerboardSpec& spec,
    const std::vector<CornerCorrespondence>& corners,
    const CameraIntrinsics& k);

struct HandEyeResult {
  RigidTransform x;  // cam_from_op
  double mean_residual = 0.0;  // Frobenius norm of A·X − X·B per pair
  double max_residual = 0.0;
  int pairs_used = 0;
};

/// Wrist-camera hand-eye calibration. Builds relative motions A (from board
/// poses) and B (from kinematics) over all sample pairs and solves A·X = X·B
/// linearly: rotation from the stacked Kronecker system's null space,
/// translation by least squares.
HandEyeResult solve_ax_xb(const std::vector<CalibrationSample>& samples,
                          const CameraIntrinsics& k);

struct StaticCameraResult {
  RigidTransform y;  // cambase_from_base
  double rotation_spread_deg = 0.0;   // max deviation from the mean estimate
  double translation_spread_mm = 0.0;
  int samples_used = 0;
};

/// Static-camera extrinsics from samples where the board is visible in both
/// cameras: per-sample closed-form chain through X, averaged over samples
/// (quaternion eigen-averaging for rotation, arithmetic mean for
/// translation).
StaticCameraResult solve_y(const RigidTransform& x,
                           const std::vector<CalibrationSample>& samples,
                           const CameraIntrinsics& k_base,
                           const CameraIntrinsics& k_op);

}  // namespace orrecon::calib

#endif  // ORRECON_CALIB_HPP
