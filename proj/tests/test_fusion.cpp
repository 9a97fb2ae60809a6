#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "orrecon/fusion.hpp"
#include "orrecon/semrecon.hpp"
#include "orrecon/sim.hpp"
#include "test_util.hpp"

using namespace orrecon;
using fusion::AnchorTransforms;
using fusion::FusionInputs;
using fusion::FusionParams;
using fusion::FusionResult;

namespace {

// Table lifted half a voxel so the top face sits mid-cell; the default
// height puts it exactly on a voxel wall, where fp-level jitter flips cells.
sim::SceneConfig fusion_scene() {
  sim::SceneConfig scene;
  scene.table.pose = RigidTransform(Eigen::Matrix3d::Identity(),
                                    Eigen::Vector3d(0.0, 0.0, 855.0));
  return scene;
}

// Ground-truth rig chains with the robot base placed at the scene origin:
// y is the BASE camera extrinsic, x a fixed hand-eye offset, and the
// kinematics sample closes the chain to the OP camera pose.
struct Rig {
  RigidTransform x;
  RigidTransform y;
  RigidTransform t_kin;
  RigidTransform op_pose;
  RigidTransform base_pose;
};

Rig make_rig(const RigidTransform& op_pose, const RigidTransform& base_pose) {
  Rig rig;
  rig.op_pose = op_pose;
  rig.base_pose = base_pose;
  rig.y = base_pose.inverse();
  rig.x = RigidTransform(
      Eigen::AngleAxisd(0.17, Eigen::Vector3d::UnitX()).toRotationMatrix(),
      Eigen::Vector3d(40.0, -25.0, 60.0));
  rig.t_kin = rig.x.inverse() * op_pose.inverse();
  return rig;
}

// Voxel-resampled table cloud in the camera's own frame, which doubles as
// that camera's world frame for a first-frame snapshot.
LabeledPointCloud camera_snapshot(const RigidTransform& pose,
                                  semrecon::CamId id) {
  const CameraIntrinsics k = sim::RigConfig::desk_intrinsics();
  const FrameBundle f = sim::render_frame(fusion_scene(), pose, k, 0.0);
  const LabeledPointCloud raw = cloud_from_depth(
      f.depth, f.mask, k, {sim::kLabelTable}, 1, semrecon::world_frame_tag(id));
  return voxel_resample(raw, 10.0);
}

FusionInputs make_inputs(const Rig& rig) {
  FusionInputs in;
  in.p_op = camera_snapshot(rig.op_pose, semrecon::CamId::kOp);
  in.p_base = camera_snapshot(rig.base_pose, semrecon::CamId::kBase);
  in.t_c_kin = rig.t_kin;
  in.x = rig.x;
  in.y = rig.y;
  in.op_intrinsics = sim::RigConfig::desk_intrinsics();
  in.base_intrinsics = sim::RigConfig::desk_intrinsics();
  return in;
}

double min_distance_to(const LabeledPointCloud& cloud,
                       const Eigen::Vector3d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : cloud.points) {
    best = std::min(best, (q - p).norm());
  }
  return best;
}

Eigen::Vector3d centroid(const LabeledPointCloud& cloud) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) {
    sum += p;
  }
  return sum / static_cast<double>(cloud.size());
}

std::vector<Eigen::Vector3d> sorted_points(const LabeledPointCloud& cloud) {
  std::vector<Eigen::Vector3d> pts = cloud.points;
  std::sort(pts.begin(), pts.end(),
            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
              return std::lexicographical_compare(a.data(), a.data() + 3,
                                                  b.data(), b.data() + 3);
            });
  return pts;
}

}  // namespace

TEST_CASE("fusion params validation") {
  FusionParams params;
  CHECK_NOTHROW(params.validate());
  params.outlier_k = 0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = FusionParams{};
  params.voxel_mm = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = FusionParams{};
  params.icp.max_iterations = 0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("anchors reduce to the bare calibration chain at the first frame") {
  const Rig rig = make_rig(
      testutil::lookat({900, -1500, 2000}, {0, 0, 900}, Eigen::Vector3d::UnitZ()),
      testutil::lookat({-900, -1500, 2000}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()));
  const RigidTransform identity;

  const AnchorTransforms anchors = fusion::anchor_world_frames(
      identity, identity, rig.t_kin, rig.x, rig.y);
  const RigidTransform want_op = rig.t_kin.inverse() * rig.x.inverse();
  CHECK(anchors.base_from_op_world.matrix().isApprox(want_op.matrix(), 1e-12));
  CHECK(anchors.base_from_base_world.matrix().isApprox(
      rig.y.inverse().matrix(), 1e-12));

  // The chain built from the ground-truth rig lands on the camera poses.
  CHECK(anchors.base_from_op_world.matrix().isApprox(rig.op_pose.matrix(),
                                                     1e-9));
  CHECK(anchors.base_from_base_world.matrix().isApprox(rig.base_pose.matrix(),
                                                       1e-9));

  CHECK_THROWS_AS(
      fusion::anchor_world_frames(identity, identity, std::nullopt, rig.x,
                                  rig.y),
      std::invalid_argument);
}

TEST_CASE("anchored snapshots of nearby views agree to within two voxels") {
  const Rig rig = make_rig(
      testutil::lookat({150, -1450, 2050}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()),
      testutil::lookat({0, -1600, 2000}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()));
  const FusionInputs in = make_inputs(rig);

  const AnchorTransforms anchors = fusion::anchor_world_frames(
      RigidTransform{}, RigidTransform{}, rig.t_kin, rig.x, rig.y);
  const Eigen::Vector3d c_op = centroid(
      in.p_op.transformed(anchors.base_from_op_world, "probe"));
  const Eigen::Vector3d c_base = centroid(
      in.p_base.transformed(anchors.base_from_base_world, "probe"));
  CHECK((c_op - c_base).norm() < 20.0);
}

TEST_CASE("two-view fusion covers the union of both table views") {
  const Rig rig = make_rig(
      testutil::lookat({900, -1500, 2000}, {0, 0, 900}, Eigen::Vector3d::UnitZ()),
      testutil::lookat({-900, -1500, 2000}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()));
  const FusionInputs in = make_inputs(rig);
  const FusionParams params;

  const FusionResult result = fusion::fuse(in, params);
  CHECK(result.p_global.frame_tag == fusion::kGlobalFrameTag);
  CHECK(result.icp.final_correspondences > 0);

  // Count bounds against the ground-truth-placed snapshots.
  const LabeledPointCloud op_in_base = in.p_op.transformed(rig.op_pose, "gt");
  const LabeledPointCloud base_in_base =
      in.p_base.transformed(rig.base_pose, "gt");
  const size_t n_op = voxel_resample(op_in_base, params.voxel_mm).size();
  const size_t n_base = voxel_resample(base_in_base, params.voxel_mm).size();
  CHECK(result.p_global.size() >= std::max(n_op, n_base));
  CHECK(result.p_global.size() <= n_op + n_base);

  // Every patch of the union oracle has fused points nearby. The oracle gets
  // the same sparse-fringe trim the pipeline applies, so it only demands
  // coverage of the retained surface.
  LabeledPointCloud both = op_in_base;
  both.append_cloud(base_in_base);
  const LabeledPointCloud union_oracle = voxel_resample(
      reject_outliers(both, params.outlier_k, params.outlier_sigma).cloud,
      params.voxel_mm);
  double worst = 0.0;
  for (size_t i = 0; i < union_oracle.size(); i += 8) {
    worst = std::max(worst,
                     min_distance_to(result.p_global, union_oracle.points[i]));
  }
  CHECK(worst < params.voxel_mm * std::sqrt(3.0));

  // Cloud-module invariants carry over to the fused cloud.
  for (const uint8_t label : result.p_global.labels) {
    CHECK(label == sim::kLabelTable);
  }
  CHECK(voxel_resample(result.p_global, params.voxel_mm).size() ==
        result.p_global.size());

  // Both reprojected masks see the table.
  const auto table_pixels = [](const LabelMask& m) {
    return std::count(m.labels.begin(), m.labels.end(), sim::kLabelTable);
  };
  CHECK(result.mask_op.width == in.op_intrinsics.width);
  CHECK(result.mask_base.width == in.base_intrinsics.width);
  CHECK(table_pixels(result.mask_op) > 1000);
  CHECK(table_pixels(result.mask_base) > 1000);
}

TEST_CASE("duplicate views fuse to either input") {
  const RigidTransform pose = testutil::lookat({0, -1600, 2000}, {0, 0, 900},
                                               Eigen::Vector3d::UnitZ());
  const Rig rig = make_rig(pose, pose);
  const FusionInputs in = make_inputs(rig);

  const FusionResult result = fusion::fuse(in, FusionParams{});

  // Identical anchored clouds pair up exactly, so ICP is the identity and
  // the merge collapses back onto the input cells, minus the usual
  // sparse-rim trim of outlier rejection.
  CHECK(result.icp.transform.translation().norm() < 1e-6);
  CHECK(Eigen::AngleAxisd(result.icp.transform.rotation()).angle() < 1e-9);
  CHECK(result.p_global.size() <= in.p_base.size());
  CHECK(result.p_global.size() >= in.p_base.size() * 95 / 100);
  CHECK(result.removed_outliers < in.p_base.size() / 10);

  // Same pose chain on both sides: the two reprojections are one view up to
  // fp rounding of the composed chain at pixel boundaries.
  REQUIRE(result.mask_op.labels.size() == result.mask_base.labels.size());
  size_t mismatched = 0, table_px = 0;
  for (size_t i = 0; i < result.mask_op.labels.size(); ++i) {
    mismatched += result.mask_op.labels[i] != result.mask_base.labels[i];
    table_px += result.mask_base.labels[i] == sim::kLabelTable;
  }
  CHECK(table_px > 1000);
  CHECK(mismatched <= table_px / 100);
}

TEST_CASE("fusion is invariant to swapping the camera roles") {
  const RigidTransform pose = testutil::lookat({0, -1600, 2000}, {0, 0, 900},
                                               Eigen::Vector3d::UnitZ());
  const Rig rig = make_rig(pose, pose);
  const FusionInputs in = make_inputs(rig);

  FusionInputs swapped = in;
  swapped.p_op = in.p_base.transformed(
      RigidTransform{}, semrecon::world_frame_tag(semrecon::CamId::kOp));
  swapped.p_base = in.p_op.transformed(
      RigidTransform{}, semrecon::world_frame_tag(semrecon::CamId::kBase));
  swapped.x = in.y;
  swapped.t_c_kin = RigidTransform{};
  swapped.y = in.x * in.t_c_kin;

  const FusionResult a = fusion::fuse(in, FusionParams{});
  const FusionResult b = fusion::fuse(swapped, FusionParams{});
  REQUIRE(a.p_global.size() == b.p_global.size());
  const auto pa = sorted_points(a.p_global);
  const auto pb = sorted_points(b.p_global);
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK((pa[i] - pb[i]).norm() < 1e-6);
  }
}

TEST_CASE("fusion rejects empty or mistagged snapshots") {
  const Rig rig = make_rig(
      testutil::lookat({900, -1500, 2000}, {0, 0, 900}, Eigen::Vector3d::UnitZ()),
      testutil::lookat({-900, -1500, 2000}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()));
  const FusionInputs good = make_inputs(rig);

  FusionInputs in = good;
  in.p_op = LabeledPointCloud{};
  in.p_op.frame_tag = semrecon::world_frame_tag(semrecon::CamId::kOp);
  CHECK_THROWS_AS(fusion::fuse(in, FusionParams{}), std::invalid_argument);

  in = good;
  in.p_base = LabeledPointCloud{};
  in.p_base.frame_tag = semrecon::world_frame_tag(semrecon::CamId::kBase);
  CHECK_THROWS_AS(fusion::fuse(in, FusionParams{}), std::invalid_argument);

  in = good;
  in.p_op = good.p_op.transformed(RigidTransform{}, "base_world");
  CHECK_THROWS_AS(fusion::fuse(in, FusionParams{}), std::invalid_argument);

  in = good;
  in.p_base = good.p_base.transformed(RigidTransform{}, "slam");
  CHECK_THROWS_AS(fusion::fuse(in, FusionParams{}), std::invalid_argument);
}

TEST_CASE("fusion aborts with a diagnostic when the views cannot overlap") {
  const Rig rig = make_rig(
      testutil::lookat({900, -1500, 2000}, {0, 0, 900}, Eigen::Vector3d::UnitZ()),
      testutil::lookat({-900, -1500, 2000}, {0, 0, 900},
                       Eigen::Vector3d::UnitZ()));
  FusionInputs in = make_inputs(rig);
  // A badly wrong hand-eye result strands the OP cloud five meters off,
  // beyond any chance overlap with the two-meter table.
  in.x = RigidTransform(Eigen::Matrix3d::Identity(),
                        Eigen::Vector3d(5000.0, 0.0, 0.0)) *
         in.x;

  try {
    fusion::fuse(in, FusionParams{});
    FAIL("expected NonOverlapError");
  } catch (const NonOverlapError& e) {
    CHECK(std::string(e.what()).find("calibration") != std::string::npos);
  }
}
