#include "orrecon/track.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

namespace orrecon::track {

namespace {

constexpr const char* kOdomFrameTag = "odom_world";

// Camera-frame position and surface normal per pixel, from forward
// differences on the depth image. Normals are skipped across depth
// discontinuities and oriented toward the camera.
struct PixelGeometry {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> point;
  std::vector<Eigen::Vector3d> normal;
  std::vector<uint8_t> has_normal;
};

PixelGeometry pixel_geometry(const DepthImage& depth,
                             const CameraIntrinsics& k,
                             double discontinuity_mm) {
  PixelGeometry g;
  g.width = depth.width;
  g.height = depth.height;
  const size_t n = size_t(g.width) * g.height;
  g.point.assign(n, Eigen::Vector3d::Zero());
  g.normal.assign(n, Eigen::Vector3d::Zero());
  g.has_normal.assign(n, 0);
  for (int v = 0; v < g.height; ++v) {
    for (int u = 0; u < g.width; ++u) {
      const double d = depth.at(u, v);
      if (d <= 0.0) {
        continue;
      }
      g.point[size_t(v) * g.width + u] = k.unproject(u, v, d);
    }
  }
  for (int v = 0; v + 1 < g.height; ++v) {
    for (int u = 0; u + 1 < g.width; ++u) {
      const double d = depth.at(u, v);
      const double dr = depth.at(u + 1, v);
      const double dd = depth.at(u, v + 1);
      if (d <= 0.0 || dr <= 0.0 || dd <= 0.0 ||
          std::abs(dr - d) > discontinuity_mm ||
          std::abs(dd - d) > discontinuity_mm) {
        continue;
      }
      const size_t i = size_t(v) * g.width + u;
      const Eigen::Vector3d& p = g.point[i];
      Eigen::Vector3d n3 = (g.point[i + 1] - p).cross(g.point[i + g.width] - p);
      const double len = n3.norm();
      if (len < 1e-12) {
        continue;
      }
      n3 /= len;
      if (n3.dot(p) > 0.0) {
        n3 = -n3;  // face the camera
      }
      g.normal[i] = n3;
      g.has_normal[i] = 1;
    }
  }
  return g;
}

// Point-to-plane registration of the model cloud against one depth frame,
// with projective data association: each model point is projected into the
// camera and matched to the pixel it lands on. Point-to-point matching is
// unusable here — on planar regions it aligns the depth-sampling patterns
// (which move with the camera) instead of the surfaces, so in-plane motion
// reads as zero and oblique views pick up a spurious along-ray bias.
// Returns cam-from-world; directions the scene does not constrain stay at
// the seed thanks to a small LM damping term.
RigidTransform register_point_to_plane(
    const std::vector<Eigen::Vector3d>& model_world, const PixelGeometry& geo,
    const CameraIntrinsics& k, const RigidTransform& cam_from_world_seed,
    const IcpParams& params) {
  const double cutoff_sq = params.correspondence_cutoff_mm *
                           params.correspondence_cutoff_mm;
  RigidTransform t = cam_from_world_seed;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    size_t correspondences = 0;
    for (const Eigen::Vector3d& m : model_world) {
      const Eigen::Vector3d p = t * m;
      if (p.z() < 1e-9) {
        continue;
      }
      const long u = std::lround(k.fx * p.x() / p.z() + k.cx);
      const long v = std::lround(k.fy * p.y() / p.z() + k.cy);
      if (u < 0 || u >= geo.width || v < 0 || v >= geo.height) {
        continue;
      }
      const size_t i = size_t(v) * geo.width + u;
      if (!geo.has_normal[i]) {
        continue;
      }
      const Eigen::Vector3d diff = p - geo.point[i];
      if (diff.squaredNorm() > cutoff_sq) {
        continue;
      }
      const Eigen::Vector3d& n3 = geo.normal[i];
      Eigen::Matrix<double, 6, 1> j;
      j << p.cross(n3), n3;
      const double r = n3.dot(diff);
      a += j * j.transpose();
      b -= r * j;
      ++correspondences;
    }
    if (correspondences == 0) {
      if (iter == 0) {
        throw NonOverlapError(
            "odometry registration: no model point projects onto valid "
            "depth within the cutoff");
      }
      break;
    }
    // Marquardt damping: scaled per diagonal entry because the rotation
    // block (mm-scale lever arms, squared) dwarfs the translation block.
    // Keeps directions the scene does not constrain at the seed pose.
    a.diagonal() *= 1.0 + 1e-6;
    a.diagonal().array() += 1e-12;
    const Eigen::Matrix<double, 6, 1> delta = a.ldlt().solve(b);
    const Eigen::Vector3d omega = delta.head<3>();
    const Eigen::Vector3d shift = delta.tail<3>();
    const double angle = omega.norm();
    const RigidTransform step(
        angle < 1e-15
            ? Eigen::Matrix3d::Identity()
            : Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix(),
        shift);
    t = step * t;
    if (shift.norm() < params.translation_eps_mm &&
        angle < params.rotation_eps_rad) {
      break;
    }
  }
  return t;
}

}  // namespace

void TrackerConfig::validate() const {
  if (stride_px < 1) {
    throw std::invalid_argument("TrackerConfig: stride must be >= 1");
  }
  if (model_voxel_mm <= 0.0) {
    throw std::invalid_argument("TrackerConfig: model voxel must be > 0");
  }
  if (dynamic_dilate_px < 0) {
    throw std::invalid_argument("TrackerConfig: dilate radius must be >= 0");
  }
  if (icp.max_iterations < 1 || icp.correspondence_cutoff_mm <= 0.0) {
    throw std::invalid_argument("TrackerConfig: bad icp params");
  }
}

KeyframeSelector::KeyframeSelector(double translation_mm, double rotation_deg,
                                   int max_gap)
    : translation_mm_(translation_mm),
      rotation_rad_(rotation_deg * M_PI / 180.0),
      max_gap_(max_gap) {
  if (translation_mm <= 0.0 || rotation_deg <= 0.0 || max_gap < 1) {
    throw std::invalid_argument("KeyframeSelector: thresholds must be > 0");
  }
}

KeyframeDecision KeyframeSelector::decide(const RigidTransform& pose) {
  if (!any_) {
    any_ = true;
    last_keyframe_ = pose;
    since_keyframe_ = 0;
    return {true, KeyframeReason::kFirst};
  }
  ++since_keyframe_;
  const RigidTransform delta = last_keyframe_.inverse() * pose;
  KeyframeReason reason = KeyframeReason::kNone;
  if (delta.translation().norm() > translation_mm_) {
    reason = KeyframeReason::kTranslation;
  } else if (delta.rotation_angle() > rotation_rad_) {
    reason = KeyframeReason::kRotation;
  } else if (since_keyframe_ >= max_gap_) {
    reason = KeyframeReason::kFrameGap;
  }
  if (reason == KeyframeReason::kNone) {
    return {false, reason};
  }
  last_keyframe_ = pose;
  since_keyframe_ = 0;
  return {true, reason};
}

PoseTracker::PoseTracker(const CameraIntrinsics& intrinsics,
                         const TrackerConfig& config)
    : kind_(PoseSourceKind::kDepthOdometry),
      intrinsics_(intrinsics),
      config_(config) {
  intrinsics_.validate();
  config_.validate();
}

PoseTracker::PoseTracker(const CameraIntrinsics& intrinsics,
                         const TrackerConfig& config, metrics::Trajectory gt)
    : kind_(PoseSourceKind::kGroundTruthPlayback),
      intrinsics_(intrinsics),
      config_(config),
      gt_(std::move(gt)) {
  intrinsics_.validate();
  config_.validate();
  gt_.validate();
  if (gt_.samples.empty()) {
    throw std::invalid_argument("PoseTracker: playback needs a trajectory");
  }
}

RigidTransform PoseTracker::track_frame(const FrameBundle& frame,
                                        const std::set<uint8_t>& dynamic_labels) {
  frame.check_consistent();
  const RigidTransform pose = kind_ == PoseSourceKind::kGroundTruthPlayback
                                  ? track_playback(frame)
                                  : track_odometry(frame, dynamic_labels);
  trajectory_.push_back(frame.timestamp_s, pose);
  return pose;
}

RigidTransform PoseTracker::track_playback(const FrameBundle& frame) const {
  if (frame.index < 0 || frame.index >= int(gt_.size())) {
    throw std::invalid_argument("PoseTracker: frame index " +
                                std::to_string(frame.index) +
                                " outside the playback trajectory");
  }
  const auto& [t, pose] = gt_.samples[frame.index];
  if (std::abs(t - frame.timestamp_s) > 1e-6) {
    throw std::invalid_argument(
        "PoseTracker: frame timestamp disagrees with the playback trajectory");
  }
  return pose;
}

DepthImage PoseTracker::masked_depth(
    const FrameBundle& frame, const std::set<uint8_t>& dynamic_labels) const {
  DepthImage depth = frame.depth;
  if (dynamic_labels.empty()) {
    return depth;
  }
  // Blank depth under the dilated dynamic region so boundary-lagging mask
  // errors cannot leak moving points into registration or the model.
  const int w = frame.depth.width;
  const int h = frame.depth.height;
  std::vector<uint8_t> dynamic(size_t(w) * h, 0);
  bool any_dynamic = false;
  for (size_t i = 0; i < dynamic.size(); ++i) {
    if (dynamic_labels.count(frame.mask.labels[i])) {
      dynamic[i] = 1;
      any_dynamic = true;
    }
  }
  if (any_dynamic) {
    const std::vector<uint8_t> zone =
        config_.dynamic_dilate_px > 0
            ? binary_dilate(dynamic, w, h, config_.dynamic_dilate_px)
            : dynamic;
    for (size_t i = 0; i < zone.size(); ++i) {
      if (zone[i]) {
        depth.mm[i] = 0.0;
      }
    }
  }
  return depth;
}

RigidTransform PoseTracker::track_odometry(
    const FrameBundle& frame, const std::set<uint8_t>& dynamic_labels) {
  const DepthImage depth = masked_depth(frame, dynamic_labels);
  std::set<uint8_t> keep;
  for (const uint8_t label : frame.mask.labels) {
    if (!dynamic_labels.count(label)) {
      keep.insert(label);
    }
  }
  const LabeledPointCloud observed = cloud_from_depth(
      depth, frame.mask, intrinsics_, keep, config_.stride_px, "camera");
  if (observed.empty()) {
    throw TrackingLost("odometry: frame " + std::to_string(frame.index) +
                       " has no static depth pixels");
  }

  if (!initialized_) {
    // The first camera frame defines the odometry world frame.
    model_ = voxel_resample(observed.transformed(RigidTransform::Identity(),
                                                 kOdomFrameTag),
                            config_.model_voxel_mm);
    last_pose_ = RigidTransform::Identity();
    velocity_ = RigidTransform::Identity();
    initialized_ = true;
    return last_pose_;
  }

  const RigidTransform predicted = last_pose_ * velocity_;
  const PixelGeometry geo =
      pixel_geometry(depth, intrinsics_, config_.icp.correspondence_cutoff_mm);
  RigidTransform cam_from_world;
  try {
    cam_from_world = register_point_to_plane(
        model_.points, geo, intrinsics_, predicted.inverse(), config_.icp);
  } catch (const NonOverlapError& e) {
    throw TrackingLost("odometry: frame " + std::to_string(frame.index) +
                       ": " + e.what());
  }
  const RigidTransform pose = cam_from_world.inverse();

  LabeledPointCloud merged = model_;
  merged.append_cloud(observed.transformed(pose, kOdomFrameTag));
  model_ = voxel_resample(merged, config_.model_voxel_mm);

  velocity_ = last_pose_.inverse() * pose;
  last_pose_ = pose;
  return pose;
}

}  // namespace orrecon::track
