#ifndef ORRECON_TRACK_HPP
#define ORRECON_TRACK_HPP

#include <set>
#include <stdexcept>
#include <string>

#include "orrecon/cloud.hpp"
#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"
#include "orrecon/metrics.hpp"

// Per-frame camera pose sources: ground-truth playback and frame-to-model
// depth odometry with dynamic-pixel rejection, plus keyframe selection.
namespace orrecon::track {

enum class PoseSourceKind {
  kGroundTruthPlayback,
  kDepthOdometry,
};

enum class KeyframeReason {
  kNone,
  kFirst,
  kTranslation,
  kRotation,
  kFrameGap,
};

struct KeyframeDecision {
  bool is_keyframe = false;
  KeyframeReason reason = KeyframeReason::kNone;
};

/// Raised when odometry cannot register a frame (no static pixels, or ICP
/// reports non-overlap). The caller decides whether to skip or re-seed.
class TrackingLost : public std::runtime_error {
 public:
  explicit TrackingLost(const std::string& what) : std::runtime_error(what) {}
};

struct TrackerConfig {
  IcpParams icp;
  int stride_px = 4;            // pixel subsampling for odometry clouds
  double model_voxel_mm = 20.0;  // model cloud resolution
  int dynamic_dilate_px = 5;    // margin around dynamic-labeled pixels

  void validate() const;
};

/// Keyframe policy over a pose stream: the first pose is always a keyframe;
/// afterwards translation > 50 mm, rotation > 5 deg or a 30-frame gap since
/// the last keyframe triggers the next one. Call once per frame, in order.
class KeyframeSelector {
 public:
  explicit KeyframeSelector(double translation_mm = 50.0,
                            double rotation_deg = 5.0, int max_gap = 30);

  KeyframeDecision decide(const RigidTransform& pose);

 private:
  double translation_mm_;
  double rotation_rad_;
  int max_gap_;
  bool any_ = false;
  RigidTransform last_keyframe_;
  int since_keyframe_ = 0;
};

/// One camera's pose source. Feed frames strictly in stream order; not safe
/// for concurrent calls on one instance.
///
/// Ground-truth playback returns the dataset pose for frame.index verbatim.
/// Depth odometry registers the accumulated model cloud against each frame's
/// static depth pixels by projective point-to-plane ICP, seeded with a
/// constant-velocity motion model; its world frame is the first camera
/// frame. Pixels whose (dilated) label is dynamic are excluded before
/// registration and never enter the model.
class PoseTracker {
 public:
  /// Depth-odometry tracker.
  PoseTracker(const CameraIntrinsics& intrinsics, const TrackerConfig& config);
  /// Ground-truth playback over `gt` (world_from_camera per frame index).
  PoseTracker(const CameraIntrinsics& intrinsics, const TrackerConfig& config,
              metrics::Trajectory gt);

  PoseSourceKind kind() const { return kind_; }

  /// World-from-camera pose of this frame. Throws TrackingLost when
  /// odometry cannot register the frame (state is left unchanged).
  RigidTransform track_frame(const FrameBundle& frame,
                             const std::set<uint8_t>& dynamic_labels);

  /// Every pose returned so far, timestamped.
  const metrics::Trajectory& trajectory() const { return trajectory_; }

  /// Size of the odometry model cloud (0 under playback).
  size_t model_size() const { return model_.size(); }

 private:
  RigidTransform track_playback(const FrameBundle& frame) const;
  RigidTransform track_odometry(const FrameBundle& frame,
                                const std::set<uint8_t>& dynamic_labels);
  DepthImage masked_depth(const FrameBundle& frame,
                          const std::set<uint8_t>& dynamic_labels) const;

  PoseSourceKind kind_;
  CameraIntrinsics intrinsics_;
  TrackerConfig config_;
  metrics::Trajectory gt_;

  LabeledPointCloud model_;  // odometry world frame = first camera frame
  RigidTransform last_pose_;
  RigidTransform velocity_;  // last relative motion, constant-velocity seed
  bool initialized_ = false;
  metrics::Trajectory trajectory_;
};

}  // namespace orrecon::track

#endif  // ORRECON_TRACK_HPP
