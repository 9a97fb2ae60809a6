#include "orrecon/fusion.hpp"

#include <stdexcept>

#include "orrecon/semrecon.hpp"

namespace orrecon::fusion {

void FusionParams::validate() const {
  if (icp.max_iterations < 1 || icp.correspondence_cutoff_mm <= 0.0) {
    throw std::invalid_argument("FusionParams: bad icp params");
  }
  if (outlier_k < 1) {
    throw std::invalid_argument("FusionParams: outlier_k must be >= 1");
  }
  if (outlier_sigma <= 0.0) {
    throw std::invalid_argument("FusionParams: outlier_sigma must be > 0");
  }
  if (voxel_mm <= 0.0) {
    throw std::invalid_argument("FusionParams: voxel_mm must be > 0");
  }
  if (splat_radius_px < 0) {
    throw std::invalid_argument("FusionParams: splat_radius_px must be >= 0");
  }
}

AnchorTransforms anchor_world_frames(const RigidTransform& op_world_from_cam,
                                     const RigidTransform& base_world_from_cam,
                                     const std::optional<RigidTransform>& t_kin,
                                     const RigidTransform& x,
                                     const RigidTransform& y) {
  if (!t_kin.has_value()) {
    throw std::invalid_argument(
        "anchor_world_frames: no kinematics sample for the anchor instant");
  }
  AnchorTransforms anchors;
  anchors.base_from_op_world =
      t_kin->inverse() * x.inverse() * op_world_from_cam.inverse();
  anchors.base_from_base_world = y.inverse() * base_world_from_cam.inverse();
  return anchors;
}

namespace {

void check_snapshot(const LabeledPointCloud& cloud, semrecon::CamId id,
                    const char* name) {
  if (cloud.size() == 0) {
    throw std::invalid_argument(std::string("fuse: ") + name +
                                " snapshot is empty");
  }
  const std::string want = semrecon::world_frame_tag(id);
  if (cloud.frame_tag != want) {
    throw std::invalid_argument(std::string("fuse: ") + name +
                                " snapshot tagged '" + cloud.frame_tag +
                                "', expected '" + want + "'");
  }
}

}  // namespace

FusionResult fuse(const FusionInputs& inputs, const FusionParams& params) {
  params.validate();
  check_snapshot(inputs.p_op, semrecon::CamId::kOp, "OP");
  check_snapshot(inputs.p_base, semrecon::CamId::kBase, "BASE");

  const AnchorTransforms anchors = anchor_world_frames(
      inputs.op_world_from_cam, inputs.base_world_from_cam, inputs.t_c_kin,
      inputs.x, inputs.y);
  const LabeledPointCloud op_in_base =
      inputs.p_op.transformed(anchors.base_from_op_world, kGlobalFrameTag);
  const LabeledPointCloud base_in_base =
      inputs.p_base.transformed(anchors.base_from_base_world, kGlobalFrameTag);

  FusionResult result;
  try {
    result.icp = icp(base_in_base, op_in_base, params.icp);
  } catch (const NonOverlapError&) {
    throw NonOverlapError(
        "fuse: no overlap between the anchored BASE and OP clouds within the "
        "correspondence cutoff; check the calibration chain and tracking");
  }

  LabeledPointCloud merged = base_in_base;
  merged.append_cloud(
      op_in_base.transformed(result.icp.transform, kGlobalFrameTag));
  const OutlierFilterResult filtered =
      reject_outliers(merged, params.outlier_k, params.outlier_sigma);
  result.removed_outliers = filtered.removed;
  result.p_global = voxel_resample(filtered.cloud, params.voxel_mm);

  result.mask_base = reproject(result.p_global, inputs.y,
                               inputs.base_intrinsics, params.splat_radius_px);
  result.mask_op = reproject(result.p_global, inputs.x * inputs.t_c_kin,
                             inputs.op_intrinsics, params.splat_radius_px);
  return result;
}

}  // namespace orrecon::fusion
