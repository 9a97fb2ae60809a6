#include "orrecon/semrecon.hpp"

#include <stdexcept>
#include <string>

namespace orrecon::semrecon {

std::string world_frame_tag(CamId id) {
  return id == CamId::kOp ? "op_world" : "base_world";
}

void ReconConfig::validate() const {
  if (keep_labels.empty()) {
    throw std::invalid_argument("ReconConfig: keep_labels must not be empty");
  }
  if (opening_radius_px < 0) {
    throw std::invalid_argument("ReconConfig: opening radius must be >= 0");
  }
  if (icp.max_iterations < 1 || icp.correspondence_cutoff_mm <= 0.0) {
    throw std::invalid_argument("ReconConfig: bad icp params");
  }
  if (outlier_k < 1) {
    throw std::invalid_argument("ReconConfig: outlier k must be >= 1");
  }
  if (outlier_sigma <= 0.0) {
    throw std::invalid_argument("ReconConfig: outlier sigma must be > 0");
  }
  if (voxel_mm <= 0.0) {
    throw std::invalid_argument("ReconConfig: voxel size must be > 0");
  }
  if (splat_radius_px < 0) {
    throw std::invalid_argument("ReconConfig: splat radius must be >= 0");
  }
}

CameraRecon::CameraRecon(CamId id, const CameraIntrinsics& intrinsics,
                         const ReconConfig& config)
    : id_(id), intrinsics_(intrinsics), config_(config) {
  intrinsics_.validate();
  config_.validate();
}

bool CameraRecon::process_keyframe(const FrameBundle& frame,
                                   const RigidTransform& t_wk) {
  frame.check_consistent();

  const LabelMask opened = open_mask(frame.mask, config_.opening_radius_px);
  step_log_.push_back(ReconStep::kOpenMask);

  DepthImage filtered = frame.depth;
  for (size_t i = 0; i < filtered.mm.size(); ++i) {
    if (!config_.keep_labels.count(opened.labels[i])) {
      filtered.mm[i] = 0.0;
    }
  }
  step_log_.push_back(ReconStep::kFilterDepth);

  LabeledPointCloud p_k = cloud_from_depth(filtered, opened, intrinsics_,
                                           config_.keep_labels, 1, "camera");
  step_log_.push_back(ReconStep::kReconstruct);
  if (p_k.empty()) {
    warnings_.push_back("keyframe " + std::to_string(frame.index) +
                        ": no depth under the kept labels; skipped");
    return false;
  }

  const std::string tag = world_frame_tag(id_);
  p_k = p_k.transformed(t_wk, tag);
  step_log_.push_back(ReconStep::kTransformToWorld);

  if (keyframe_count_ == 0) {
    world_cloud_ = voxel_resample(p_k, config_.voxel_mm);
    step_log_.push_back(ReconStep::kVoxelResample);
    ++keyframe_count_;
    return true;
  }

  step_log_.push_back(ReconStep::kIcp);
  IcpResult registration;
  try {
    registration = icp(world_cloud_, p_k, config_.icp);
  } catch (const NonOverlapError& e) {
    warnings_.push_back("keyframe " + std::to_string(frame.index) + ": " +
                        e.what() + "; skipped");
    return false;
  }

  LabeledPointCloud merged = world_cloud_;
  merged.append_cloud(p_k.transformed(registration.transform, tag));
  step_log_.push_back(ReconStep::kAccumulate);

  const OutlierFilterResult inliers =
      reject_outliers(merged, config_.outlier_k, config_.outlier_sigma);
  step_log_.push_back(ReconStep::kRejectOutliers);

  world_cloud_ = voxel_resample(inliers.cloud, config_.voxel_mm);
  step_log_.push_back(ReconStep::kVoxelResample);

  ++keyframe_count_;
  return true;
}

LabelMask CameraRecon::refine_mask(const RigidTransform& t_wc,
                                   const CameraIntrinsics& intrinsics) {
  if (world_cloud_.empty()) {
    warnings_.push_back(
        "refine_mask: empty reconstruction; returning all-background");
    return LabelMask(intrinsics.width, intrinsics.height, 0);
  }
  return reproject(world_cloud_, t_wc.inverse(), intrinsics,
                   config_.splat_radius_px);
}

}  // namespace orrecon::semrecon
