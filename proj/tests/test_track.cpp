#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "orrecon/sim.hpp"
#include "orrecon/track.hpp"
#include "test_util.hpp"

using namespace orrecon;

namespace {

FrameBundle render_indexed(const sim::SceneConfig& scene,
                           const RigidTransform& pose,
                           const CameraIntrinsics& k, int index, double dt) {
  FrameBundle frame = sim::render_frame(scene, pose, k, index * dt);
  frame.index = index;
  frame.timestamp_s = index * dt;
  return frame;
}

}  // namespace

TEST_CASE("keyframe selector policy") {
  track::KeyframeSelector selector;

  const auto first = selector.decide(RigidTransform::Identity());
  CHECK(first.is_keyframe);
  CHECK(first.reason == track::KeyframeReason::kFirst);

  // 1 mm later: below every threshold.
  const auto tiny = selector.decide(
      RigidTransform(Eigen::Matrix3d::Identity(), {1, 0, 0}));
  CHECK(!tiny.is_keyframe);
  CHECK(tiny.reason == track::KeyframeReason::kNone);

  const auto trans = selector.decide(
      RigidTransform(Eigen::Matrix3d::Identity(), {60, 0, 0}));
  CHECK(trans.is_keyframe);
  CHECK(trans.reason == track::KeyframeReason::kTranslation);

  // 6 degrees about the current keyframe location.
  const auto rot = selector.decide(RigidTransform::FromAxisAngle(
      Eigen::Vector3d::UnitZ(), 6.0 * M_PI / 180.0, {60, 0, 0}));
  CHECK(rot.is_keyframe);
  CHECK(rot.reason == track::KeyframeReason::kRotation);

  // No motion at all: the frame-gap rule fires on the 30th quiet frame.
  const RigidTransform still = RigidTransform::FromAxisAngle(
      Eigen::Vector3d::UnitZ(), 6.0 * M_PI / 180.0, {60, 0, 0});
  for (int i = 0; i < 29; ++i) {
    const auto quiet = selector.decide(still);
    CHECK(!quiet.is_keyframe);
  }
  const auto gap = selector.decide(still);
  CHECK(gap.is_keyframe);
  CHECK(gap.reason == track::KeyframeReason::kFrameGap);

  CHECK_THROWS_AS(track::KeyframeSelector(0.0, 5.0, 30), std::invalid_argument);
}

TEST_CASE("ground-truth playback is a bit-exact passthrough") {
  std::mt19937 rng(515);
  metrics::Trajectory gt;
  for (int i = 0; i < 6; ++i) {
    gt.push_back(0.1 * i, testutil::random_transform(rng));
  }

  track::PoseTracker tracker(sim::RigConfig::desk_intrinsics(), {}, gt);
  CHECK(tracker.kind() == track::PoseSourceKind::kGroundTruthPlayback);

  FrameBundle frame;
  frame.depth = DepthImage(1, 1, 500.0);
  frame.mask = LabelMask(1, 1, sim::kLabelHuman);  // dynamic labels are moot
  for (int i = 0; i < 6; ++i) {
    frame.index = i;
    frame.timestamp_s = 0.1 * i;
    const RigidTransform pose = tracker.track_frame(frame, {sim::kLabelHuman});
    CHECK(pose.matrix() == gt.samples[i].second.matrix());  // verbatim
  }
  CHECK(tracker.trajectory().size() == 6);
  CHECK(tracker.model_size() == 0);

  frame.index = 99;
  CHECK_THROWS_AS(tracker.track_frame(frame, {}), std::invalid_argument);
  frame.index = 2;
  frame.timestamp_s = 0.7;  // wrong clock
  CHECK_THROWS_AS(tracker.track_frame(frame, {}), std::invalid_argument);
}

TEST_CASE("depth odometry tracks a static scene within 2 mm") {
  sim::SceneConfig scene;  // table + floor, nothing moving
  const CameraIntrinsics k = sim::RigConfig::desk_intrinsics();

  // Fixed attitude, 10 mm forward per frame: an oblique view of a table
  // corner so both side walls, the top and the floor pin all six DOF.
  const RigidTransform initial =
      testutil::lookat({1900, -1300, 1500}, {0, 0, 700},
                       Eigen::Vector3d::UnitZ());
  std::vector<RigidTransform> gt_poses;
  for (int i = 0; i < 20; ++i) {
    gt_poses.emplace_back(initial.rotation(),
                          initial.translation() +
                              Eigen::Vector3d(-10.0 * i, 4.0 * i, 0.0));
  }

  track::PoseTracker tracker(k, {});
  CHECK(tracker.kind() == track::PoseSourceKind::kDepthOdometry);

  double worst_translation = 0.0;
  double worst_rotation = 0.0;
  for (int i = 0; i < 20; ++i) {
    const FrameBundle frame =
        render_indexed(scene, gt_poses[i], k, i, 0.1);
    const RigidTransform estimated = tracker.track_frame(frame, {});
    // The tracker's world frame is the first camera frame.
    const RigidTransform expected = gt_poses[0].inverse() * gt_poses[i];
    const RigidTransform err = expected.inverse() * estimated;
    worst_translation = std::max(worst_translation, err.translation().norm());
    worst_rotation = std::max(worst_rotation, err.rotation_angle());
  }
  CHECK(worst_translation < 2.0);
  CHECK(worst_rotation < 0.01);
  CHECK(tracker.model_size() > 1000);
  CHECK(tracker.trajectory().size() == 20);
}

TEST_CASE("depth odometry is deterministic") {
  sim::SceneConfig scene;
  const CameraIntrinsics k = sim::RigConfig::desk_intrinsics();
  const RigidTransform initial = testutil::lookat(
      {1600, -1500, 1700}, {0, 0, 600}, Eigen::Vector3d::UnitZ());

  track::PoseTracker a(k, {});
  track::PoseTracker b(k, {});
  for (int i = 0; i < 6; ++i) {
    const RigidTransform pose(initial.rotation(),
                              initial.translation() +
                                  Eigen::Vector3d(0, 8.0 * i, -6.0 * i));
    const FrameBundle frame = render_indexed(scene, pose, k, i, 0.1);
    const RigidTransform pa = a.track_frame(frame, {});
    const RigidTransform pb = b.track_frame(frame, {});
    CHECK(pa.matrix() == pb.matrix());
  }
}

TEST_CASE("dynamic-pixel rejection keeps odometry honest") {
  // A large person crosses right in front of the camera while it creeps
  // sideways. Without masking, ICP locks onto the moving surface.
  sim::SceneConfig scene;
  sim::HumanConfig crosser;
  crosser.waypoints_xy_mm = {{1100, -1200}, {1100, 1200}};
  crosser.speed_mm_s = 600.0;
  crosser.start_phase = 900.0 / 4800.0;  // begin near the view center
  crosser.radius_mm = 400.0;
  crosser.height_mm = 1750.0;
  scene.humans.push_back(crosser);

  const CameraIntrinsics k = sim::RigConfig::desk_intrinsics();
  const RigidTransform initial = testutil::lookat(
      {2300, 0, 1500}, {0, 0, 700}, Eigen::Vector3d::UnitZ());

  // The camera descends; with the walker masked out, the remaining scene
  // (floor, table top, table walls) pins that motion.
  std::vector<FrameBundle> frames;
  std::vector<RigidTransform> gt_poses;
  for (int i = 0; i < 12; ++i) {
    gt_poses.emplace_back(initial.rotation(),
                          initial.translation() +
                              Eigen::Vector3d(0, 0, -6.0 * i));
    frames.push_back(render_indexed(scene, gt_poses[i], k, i, 0.1));
  }
  // The fixture only means something if the person dominates the view.
  int human_pixels = 0;
  for (const auto label : frames[6].mask.labels) {
    human_pixels += label == sim::kLabelHuman;
  }
  CHECK(human_pixels > int(frames[6].mask.labels.size() / 5));

  const auto mean_error = [&](const std::set<uint8_t>& dynamic_labels) {
    track::PoseTracker tracker(k, {});
    double sum = 0.0;
    for (int i = 0; i < 12; ++i) {
      const RigidTransform estimated =
          tracker.track_frame(frames[i], dynamic_labels);
      const RigidTransform expected = gt_poses[0].inverse() * gt_poses[i];
      sum += (expected.inverse() * estimated).translation().norm();
    }
    return sum / 12.0;
  };

  const double masked = mean_error({sim::kLabelHuman});
  const double unmasked = mean_error({});
  CHECK(masked < 2.0);
  CHECK(masked <= unmasked + 1e-9);
}

TEST_CASE("tracking lost on frames with no static pixels") {
  const CameraIntrinsics k = sim::RigConfig::desk_intrinsics();
  sim::SceneConfig scene;

  // Frame 0 entirely dynamic: nothing to initialize from.
  FrameBundle all_dynamic;
  all_dynamic.index = 0;
  all_dynamic.depth = DepthImage(k.width, k.height, 1200.0);
  all_dynamic.mask = LabelMask(k.width, k.height, sim::kLabelHuman);
  track::PoseTracker cold(k, {});
  CHECK_THROWS_AS(cold.track_frame(all_dynamic, {sim::kLabelHuman}),
                  track::TrackingLost);

  // A depth blackout mid-stream loses tracking but leaves state usable.
  const RigidTransform pose = testutil::lookat(
      {1900, -1300, 1500}, {0, 0, 700}, Eigen::Vector3d::UnitZ());
  track::PoseTracker tracker(k, {});
  tracker.track_frame(render_indexed(scene, pose, k, 0, 0.1), {});

  FrameBundle blackout;
  blackout.index = 1;
  blackout.timestamp_s = 0.1;
  blackout.depth = DepthImage(k.width, k.height, 0.0);
  blackout.mask = LabelMask(k.width, k.height, sim::kLabelTable);
  CHECK_THROWS_AS(tracker.track_frame(blackout, {}), track::TrackingLost);
  CHECK(tracker.trajectory().size() == 1);

  // Recovery: the next good frame still registers.
  const RigidTransform recovered = tracker.track_frame(
      render_indexed(scene, pose, k, 2, 0.1), {});
  CHECK(recovered.translation().norm() < 1.0);
  CHECK(tracker.trajectory().size() == 2);
}
