#ifndef ORRECON_FUSION_HPP
#define ORRECON_FUSION_HPP

#include <cstddef>
#include <optional>
#include <string>

#include "orrecon/cloud.hpp"
#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"

// Multi-camera fusion: carry both per-camera reconstructions into the robot
// base frame through the kinematic chain and the hand-eye calibration,
// ICP-align them, merge into one global cloud, and reproject that cloud back
// into both camera views.
namespace orrecon::fusion {

/// Frame tag of the fused cloud.
inline constexpr const char* kGlobalFrameTag = "robot_base";

struct FusionParams {
  IcpParams icp;
  int outlier_k = 100;
  double outlier_sigma = 3.0;
  double voxel_mm = 10.0;
  int splat_radius_px = 2;

  void validate() const;
};

/// Everything one fusion step consumes. Clouds are immutable snapshots of the
/// per-camera reconstructions, tagged "op_world" / "base_world". The poses
/// are each camera's current world-from-camera estimate in its own world
/// frame, and t_c_kin is the forward-kinematics sample for the same instant.
struct FusionInputs {
  LabeledPointCloud p_op;
  LabeledPointCloud p_base;
  RigidTransform t_c_kin;             // manipulator mount <- robot base
  RigidTransform x;                   // OP camera <- manipulator mount
  RigidTransform y;                   // BASE camera <- robot base
  RigidTransform op_world_from_cam;   // OP tracker pose
  RigidTransform base_world_from_cam; // BASE tracker pose
  CameraIntrinsics op_intrinsics;
  CameraIntrinsics base_intrinsics;
};

/// Robot-base-from-SLAM-world transforms for both cameras. Each camera's
/// world frame is its first camera frame, so at t0 (identity tracker poses)
/// these reduce to the bare calibration chains.
struct AnchorTransforms {
  RigidTransform base_from_op_world;
  RigidTransform base_from_base_world;
};

/// Relates both SLAM world frames to the robot base by closing the rig's
/// transform chain at one instant: base_from_op_world = t_kin⁻¹·x⁻¹·t_wc_op⁻¹
/// and base_from_base_world = y⁻¹·t_wc_base⁻¹. Pass the kinematics sample for
/// the same instant as the tracker poses; nullopt (no sample found) throws.
AnchorTransforms anchor_world_frames(const RigidTransform& op_world_from_cam,
                                     const RigidTransform& base_world_from_cam,
                                     const std::optional<RigidTransform>& t_kin,
                                     const RigidTransform& x,
                                     const RigidTransform& y);

struct FusionResult {
  LabeledPointCloud p_global;  // robot base frame
  LabelMask mask_op;           // fused cloud reprojected into the OP view
  LabelMask mask_base;         // fused cloud reprojected into the BASE view
  // Diagnostics for the fusion log.
  IcpResult icp;
  std::size_t removed_outliers = 0;
};

/// One fusion step: anchor both snapshots into the robot base frame using
/// the current chain, register the OP cloud onto the BASE cloud (the BASE
/// camera is rigid to the base, hence the stabler target), merge, reject
/// outliers, voxel-resample, then reproject the fused cloud into both camera
/// views. Empty snapshots or wrong frame tags are precondition errors;
/// ICP finding no overlap aborts the step with a NonOverlapError pointing at
/// calibration or tracking.
FusionResult fuse(const FusionInputs& inputs, const FusionParams& params);

}  // namespace orrecon::fusion

#endif  // ORRECON_FUSION_HPP
