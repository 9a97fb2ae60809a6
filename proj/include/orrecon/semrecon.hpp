#ifndef ORRECON_SEMRECON_HPP
#define ORRECON_SEMRECON_HPP

#include <set>
#include <string>
#include <vector>

#include "orrecon/cloud.hpp"
#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"

// Per-camera semantic dense reconstruction: accumulate a filtered cloud of
// the kept classes over keyframes, in the camera's own world frame, and
// reproject it to refine per-frame segmentation.
namespace orrecon::semrecon {

enum class CamId { kOp, kBase };

/// Frame tag carried by a camera's accumulated cloud ("op_world" /
/// "base_world"); fusion checks it to catch frame mix-ups.
std::string world_frame_tag(CamId id);

struct ReconConfig {
  std::set<uint8_t> keep_labels;  // classes kept in the reconstruction
  int opening_radius_px = 10;
  IcpParams icp;
  int outlier_k = 100;
  double outlier_sigma = 3.0;
  double voxel_mm = 10.0;
  int splat_radius_px = 2;

  void validate() const;
};

/// Steps of one keyframe update, in execution order. Exposed so tests and
/// diagnostics can check order conformance.
enum class ReconStep {
  kOpenMask,
  kFilterDepth,
  kReconstruct,
  kTransformToWorld,
  kIcp,
  kAccumulate,
  kRejectOutliers,
  kVoxelResample,
};

/// One camera's reconstruction state. Keyframe updates run, in order:
/// mask opening, depth filtering to the kept classes, unprojection,
/// transform into the world frame, then for the first keyframe a plain
/// voxel resample, and for later keyframes ICP onto the accumulated cloud,
/// accumulation, outlier rejection and voxel resampling. The accumulated
/// cloud holds at most one point per voxel after every update.
class CameraRecon {
 public:
  CameraRecon(CamId id, const CameraIntrinsics& intrinsics,
              const ReconConfig& config);

  /// One keyframe update; `t_wk` is world-from-camera of the keyframe.
  /// Returns false when the keyframe is skipped — no depth under the kept
  /// labels, or ICP non-overlap. The cloud and keyframe counter are
  /// unchanged then and a warning is recorded.
  bool process_keyframe(const FrameBundle& frame, const RigidTransform& t_wk);

  /// Reprojects the accumulated cloud into a camera at `t_wc`
  /// (world-from-camera): the refined segmentation of that view. An empty
  /// cloud yields an all-background mask and records a warning.
  LabelMask refine_mask(const RigidTransform& t_wc,
                        const CameraIntrinsics& intrinsics);

  CamId id() const { return id_; }
  const LabeledPointCloud& world_cloud() const { return world_cloud_; }
  int keyframe_count() const { return keyframe_count_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Step log across all updates, in call order.
  const std::vector<ReconStep>& step_log() const { return step_log_; }

 private:
  CamId id_;
  CameraIntrinsics intrinsics_;
  ReconConfig config_;
  LabeledPointCloud world_cloud_;
  int keyframe_count_ = 0;
  std::vector<std::string> warnings_;
  std::vector<ReconStep> step_log_;
};

}  // namespace orrecon::semrecon

#endif  // ORRECON_SEMRECON_HPP
