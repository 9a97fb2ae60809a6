#include "orrecon/calib.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace orrecon;
using namespace orrecon::calib;

namespace {

CameraIntrinsics test_camera() {
  CameraIntrinsics k;
  k.fx = 500.0;
  k.fy = 500.0;
  k.cx = 320.0;
  k.cy = 288.0;
  k.width = 640;
  k.height = 576;
  return k;
}

// Camera pose in the world from an eye point looking at a target.
RigidTransform lookat_cam_from_world(const Eigen::Vector3d& eye,
                                     const Eigen::Vector3d& target,
                                     const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d x = up.cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r_wc;
  r_wc.col(0) = x;
  r_wc.col(1) = y;
  r_wc.col(2) = z;
  return RigidTransform(r_wc, eye).inverse();
}

// Project board corners through a camera-from-board pose; requires every
// corner to land inside the image.
std::vector<CornerCorrespondence> synth_corners(
    const CheckerboardSpec& spec, const RigidTransform& cam_from_board,
    const CameraIntrinsics& k, std::mt19937* rng = nullptr,
    double noise_px = 0.0) {
  std::normal_distribution<double> noise(0.0, noise_px);
  std::vector<CornerCorrespondence> corners;
  for (const auto& bp : spec.corner_points()) {
    const auto px = k.project(cam_from_board * bp);
    REQUIRE(px.has_value());
    Eigen::Vector2d p = *px;
    if (rng && noise_px > 0) p += Eigen::Vector2d(noise(*rng), noise(*rng));
    corners.emplace_back(p, bp);
  }
  return corners;
}

// Camera poses surrounding the board (board frame == world frame here),
// varied in azimuth, elevation, range, and roll so relative rotations span
// well-separated axes.
std::vector<RigidTransform> orbit_poses(const CheckerboardSpec& spec, int n) {
  const Eigen::Vector3d center(spec.square_size_mm * (spec.inner_cols - 1) / 2.0,
                               spec.square_size_mm * (spec.inner_rows - 1) / 2.0,
                               0.0);
  std::vector<RigidTransform> poses;
  for (int i = 0; i < n; ++i) {
    const double az = 2.0 * M_PI * i / n;
    const double el = (30.0 + 20.0 * (i % 3)) * M_PI / 180.0;
    const double radius = 700.0 + 150.0 * (i % 4);
    const Eigen::Vector3d eye =
        center + radius * Eigen::Vector3d(std::cos(az) * std::cos(el),
                                          std::sin(az) * std::cos(el),
                                          -std::sin(el));
    const double roll = 0.3 * std::sin(3.1 * i);
    const Eigen::Vector3d up =
        (Eigen::Vector3d(std::sin(roll), std::cos(roll), 0.4 * std::cos(2 * i)))
            .normalized();
    poses.push_back(lookat_cam_from_world(eye, center, up));
  }
  return poses;
}

// Samples consistent with a chosen hand-eye X: the board sits at the world
// origin, the robot base frame equals the world frame, so the kinematics
// follow from each camera pose as X^-1 * cam_from_world.
std::vector<CalibrationSample> synth_samples(
    const RigidTransform& x, const CheckerboardSpec& spec,
    const CameraIntrinsics& k, int n, std::mt19937* rng = nullptr,
    double noise_px = 0.0) {
  std::vector<CalibrationSample> samples;
  for (const auto& cam_from_world : orbit_poses(spec, n)) {
    CalibrationSample s;
    s.kinematics = x.inverse() * cam_from_world;
    s.board_corners_op = synth_corners(spec, cam_from_world, k, rng, noise_px);
    samples.push_back(std::move(s));
  }
  return samples;
}

double rotation_error_deg(const RigidTransform& a, const RigidTransform& b) {
  return (a.inverse() * b).rotation_angle() * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("checkerboard spec validation and corner layout") {
  CheckerboardSpec spec;
  CHECK(spec.inner_cols == 6);
  CHECK(spec.inner_rows == 9);
  const auto pts = spec.corner_points();
  CHECK(pts.size() == 54);
  CHECK(pts[0] == Eigen::Vector3d(0, 0, 0));
  CHECK(pts[1] == Eigen::Vector3d(30, 0, 0));
  CHECK(pts[6] == Eigen::Vector3d(0, 30, 0));

  CheckerboardSpec bad = spec;
  bad.inner_cols = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.square_size_mm = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("planar pose: frontal board at 1000 mm") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  // Identity rotation, board origin 1 m straight ahead.
  const RigidTransform truth(Eigen::Matrix3d::Identity(),
                             Eigen::Vector3d(0, 0, 1000));
  const auto corners = synth_corners(spec, truth, k);
  const auto result = estimate_planar_pose(spec, corners, k);
  CHECK((result.cam_from_board.rotation() - Eigen::Matrix3d::Identity())
            .norm() < 1e-6);
  CHECK((result.cam_from_board.translation() - Eigen::Vector3d(0, 0, 1000))
            .norm() < 1e-3);
  CHECK(result.mean_reprojection_px < 1e-6);
}

TEST_CASE("planar pose: random poses recovered exactly from clean corners") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  for (const auto& truth : orbit_poses(spec, 25)) {
    const auto corners = synth_corners(spec, truth, k);
    const auto result = estimate_planar_pose(spec, corners, k);
    CHECK((result.cam_from_board.rotation() - truth.rotation()).norm() <
          1e-6);
    CHECK((result.cam_from_board.translation() - truth.translation()).norm() <
          1e-3);
  }
}

TEST_CASE("planar pose: degenerate inputs rejected") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  const RigidTransform pose(Eigen::Matrix3d::Identity(),
                            Eigen::Vector3d(0, 0, 800));
  auto corners = synth_corners(spec, pose, k);

  SUBCASE("three correspondences") {
    corners.resize(3);
    CHECK_THROWS_AS(estimate_planar_pose(spec, corners, k),
                    std::invalid_argument);
  }
  SUBCASE("collinear points: a single corner row") {
    std::vector<CornerCorrespondence> row(corners.begin(),
                                          corners.begin() + 6);
    CHECK_THROWS_AS(estimate_planar_pose(spec, row, k),
                    std::invalid_argument);
  }
  SUBCASE("off-plane board point") {
    corners[5].second.z() = 4.0;
    CHECK_THROWS_AS(estimate_planar_pose(spec, corners, k),
                    std::invalid_argument);
  }
}

TEST_CASE("hand-eye: noise-free recovery to numerical precision") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(71);
  const auto x_true = testutil::random_transform(rng, 0.8, 200.0);
  const auto samples = synth_samples(x_true, spec, k, 20);

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = solve_ax_xb(samples, k);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  CHECK((result.x.rotation() - x_true.rotation()).norm() < 1e-9);
  CHECK((result.x.translation() - x_true.translation()).norm() < 1e-6);
  CHECK(result.pairs_used == 190);
  CHECK(result.max_residual < 1e-6);
  CHECK(elapsed < 1.0);
}

TEST_CASE("hand-eye: identity fixpoint when camera and flange coincide") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  const auto samples = synth_samples(RigidTransform::Identity(), spec, k, 8);
  const auto result = solve_ax_xb(samples, k);
  CHECK(result.x.is_approx(RigidTransform::Identity(), 1e-9, 1e-6));
}

TEST_CASE("hand-eye: 0.5 px corner noise stays under 0.5 deg / 5 mm") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(73);
  const auto x_true = testutil::random_transform(rng, 0.8, 200.0);
  const auto samples = synth_samples(x_true, spec, k, 20, &rng, 0.5);
  const auto result = solve_ax_xb(samples, k);
  CHECK(rotation_error_deg(result.x, x_true) < 0.5);
  CHECK((result.x.translation() - x_true.translation()).norm() < 5.0);
}

TEST_CASE("hand-eye: residual bound covers every pair") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(79);
  const auto x_true = testutil::random_transform(rng, 0.8, 150.0);
  const auto samples = synth_samples(x_true, spec, k, 12, &rng, 0.3);
  const auto result = solve_ax_xb(samples, k);

  // Rebuild every pair independently and verify against the reported bound.
  std::vector<RigidTransform> p;
  for (const auto& s : samples) {
    p.push_back(estimate_planar_pose(spec, s.board_corners_op, k)
                    .cam_from_board);
  }
  Eigen::Matrix4d xm = Eigen::Matrix4d::Identity();
  xm.topLeftCorner<3, 3>() = result.x.rotation();
  xm.topRightCorner<3, 1>() = result.x.translation();
  for (size_t i = 0; i < samples.size(); ++i) {
    for (size_t j = i + 1; j < samples.size(); ++j) {
      const auto a = p[j] * p[i].inverse();
      const auto b = samples[j].kinematics * samples[i].kinematics.inverse();
      Eigen::Matrix4d am = Eigen::Matrix4d::Identity();
      am.topLeftCorner<3, 3>() = a.rotation();
      am.topRightCorner<3, 1>() = a.translation();
      Eigen::Matrix4d bm = Eigen::Matrix4d::Identity();
      bm.topLeftCorner<3, 3>() = b.rotation();
      bm.topRightCorner<3, 1>() = b.translation();
      CHECK((am * xm - xm * bm).norm() <= result.max_residual + 1e-12);
    }
  }
}

TEST_CASE("hand-eye: invariant to sample ordering") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(83);
  const auto x_true = testutil::random_transform(rng, 0.8, 150.0);
  auto samples = synth_samples(x_true, spec, k, 10);
  const auto forward = solve_ax_xb(samples, k);
  std::reverse(samples.begin(), samples.end());
  std::swap(samples[2], samples[7]);
  const auto shuffled = solve_ax_xb(samples, k);
  CHECK(forward.x.is_approx(shuffled.x, 1e-9, 1e-6));
}

TEST_CASE("hand-eye: error reporting") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  SUBCASE("fewer than 3 samples") {
    const auto samples =
        synth_samples(RigidTransform::Identity(), spec, k, 2);
    CHECK_THROWS_AS(solve_ax_xb(samples, k), std::invalid_argument);
  }
  SUBCASE("single-axis motion is degenerate") {
    // All cameras on one circle at fixed elevation and roll: every relative
    // rotation shares the same axis.
    const Eigen::Vector3d center(75, 120, 0);
    std::vector<CalibrationSample> samples;
    for (int i = 0; i < 6; ++i) {
      const double az = 0.25 * i;
      const Eigen::Vector3d eye =
          center + Eigen::Vector3d(900 * std::cos(az), 900 * std::sin(az),
                                   -650);
      const auto cam = lookat_cam_from_world(
          eye, center, Eigen::Vector3d(-std::sin(az), std::cos(az), 0));
      CalibrationSample s;
      s.kinematics = cam;  // X = I
      s.board_corners_op = synth_corners(spec, cam, k);
      samples.push_back(std::move(s));
    }
    CHECK_THROWS_AS(solve_ax_xb(samples, k), DegenerateMotionError);
  }
  SUBCASE("kinematics inconsistent with camera motion") {
    std::mt19937 rng(89);
    auto samples =
        synth_samples(testutil::random_transform(rng, 0.5, 100.0), spec, k,
                      6);
    samples[3].kinematics =
        samples[3].kinematics *
        RigidTransform::FromAxisAngle(Eigen::Vector3d::UnitZ(), 1.2,
                                      Eigen::Vector3d::Zero());
    CHECK_THROWS_AS(solve_ax_xb(samples, k), std::runtime_error);
  }
}

TEST_CASE("static camera: noise-free closed form recovers Y") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(97);
  const auto x_true = testutil::random_transform(rng, 0.8, 200.0);
  const auto y_true = lookat_cam_from_world(
      Eigen::Vector3d(1200, -400, -900), Eigen::Vector3d(75, 120, 0),
      Eigen::Vector3d(0, 1, 0.2).normalized());

  auto samples = synth_samples(x_true, spec, k, 10);
  // Static camera: its board view is the same in every sample.
  for (auto& s : samples) {
    s.board_corners_base = synth_corners(spec, y_true, k);
  }
  const auto result = solve_y(x_true, samples, k, k);
  CHECK((result.y.rotation() - y_true.rotation()).norm() < 1e-6);
  CHECK((result.y.translation() - y_true.translation()).norm() < 1e-3);
  CHECK(result.samples_used == 10);
  CHECK(result.rotation_spread_deg < 1e-6);
  CHECK(result.translation_spread_mm < 1e-3);
}

TEST_CASE("static camera: co-located cameras collapse the chain") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  // Both cameras see identical corners, so the relative camera term cancels
  // and Y reduces to the wrist camera's own pose: X * kinematics.
  const auto view = lookat_cam_from_world(Eigen::Vector3d(75, 120, -1000),
                                          Eigen::Vector3d(75, 120, 0),
                                          Eigen::Vector3d(0, 1, 0));
  CalibrationSample s;
  s.kinematics = view;  // with X = I this matches the OP camera pose
  s.board_corners_op = synth_corners(spec, view, k);
  s.board_corners_base = s.board_corners_op;
  const auto result =
      solve_y(RigidTransform::Identity(), {s, s, s}, k, k);
  CHECK(result.y.is_approx(view, 1e-9, 1e-6));
}

TEST_CASE("static camera: averaging with noise reports spread") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  std::mt19937 rng(101);
  const auto x_true = testutil::random_transform(rng, 0.8, 200.0);
  const auto y_true = lookat_cam_from_world(
      Eigen::Vector3d(-1100, 300, -800), Eigen::Vector3d(75, 120, 0),
      Eigen::Vector3d(0.1, 1, 0).normalized());
  auto samples = synth_samples(x_true, spec, k, 12, &rng, 0.5);
  for (auto& s : samples) {
    s.board_corners_base = synth_corners(spec, y_true, k, &rng, 0.5);
  }
  const auto result = solve_y(x_true, samples, k, k);
  CHECK(rotation_error_deg(result.y, y_true) < 0.5);
  CHECK((result.y.translation() - y_true.translation()).norm() < 5.0);
  CHECK(result.rotation_spread_deg > 0.0);
  CHECK(result.translation_spread_mm > 0.0);
}

TEST_CASE("static camera: requires a dual-visibility sample") {
  const auto k = test_camera();
  const CheckerboardSpec spec;
  const auto samples =
      synth_samples(RigidTransform::Identity(), spec, k, 5);
  CHECK_THROWS_AS(solve_y(RigidTransform::Identity(), samples, k, k),
                  std::invalid_argument);
}
