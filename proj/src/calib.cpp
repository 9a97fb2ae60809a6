#include "orrecon/calib.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace orrecon::calib {

namespace {

constexpr double kCoplanarTolMm = 1e-6;
constexpr int kRefineMaxIterations = 20;
constexpr double kRefineStepTol = 1e-10;
// A and B are similar matrices, so their rotation angles agree up to input
// noise; a large gap means the samples do not describe the same motions.
constexpr double kAngleConsistencyTolRad = 0.2;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

void check_corners(const std::vector<CornerCorrespondence>& corners) {
  if (corners.size() < 4) {
    throw std::invalid_argument(
        "estimate_planar_pose: need at least 4 correspondences, got " +
        std::to_string(corners.size()));
  }
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& [px, bp] : corners) {
    if (std::abs(bp.z()) > kCoplanarTolMm) {
      throw std::invalid_argument(
          "estimate_planar_pose: board points must lie in the z=0 plane");
    }
    mean += bp.head<2>();
  }
  mean /= double(corners.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& [px, bp] : corners) {
    const Eigen::Vector2d d = bp.head<2>() - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  if (eig.eigenvalues()(0) < 1e-9 * std::max(1.0, eig.eigenvalues()(1))) {
    throw std::invalid_argument(
        "estimate_planar_pose: correspondences are collinear");
  }
}

// Similarity normalization for DLT conditioning: centroid to origin, mean
// distance sqrt(2).
Eigen::Matrix3d normalizing_similarity(
    const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= double(pts.size());
  const double s = dist > 1e-12 ? std::sqrt(2.0) / dist : 1.0;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * mean.x();
  t(1, 2) = -s * mean.y();
  return t;
}

// Homography mapping board-plane (X,Y) to normalized image coordinates.
Eigen::Matrix3d plane_homography(
    const std::vector<CornerCorrespondence>& corners,
    const CameraIntrinsics& k) {
  std::vector<Eigen::Vector2d> board, image;
  board.reserve(corners.size());
  image.reserve(corners.size());
  for (const auto& [px, bp] : corners) {
    board.push_back(bp.head<2>());
    image.emplace_back((px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy);
  }
  const Eigen::Matrix3d tb = normalizing_similarity(board);
  const Eigen::Matrix3d ti = normalizing_similarity(image);

  const int n = int(corners.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d b = tb * Eigen::Vector3d(board[i].x(), board[i].y(), 1.0);
    const Eigen::Vector3d m = ti * Eigen::Vector3d(image[i].x(), image[i].y(), 1.0);
    const double bx = b.x() / b.z(), by = b.y() / b.z();
    const double mx = m.x() / m.z(), my = m.y() / m.z();
    a.row(2 * i) << bx, by, 1, 0, 0, 0, -mx * bx, -mx * by, -mx;
    a.row(2 * i + 1) << 0, 0, 0, bx, by, 1, -my * bx, -my * by, -my;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return ti.inverse() * hn * tb;
}

RigidTransform pose_from_homography(const Eigen::Matrix3d& h) {
  Eigen::Matrix3d hh = h;
  // The board must sit in front of the camera: the projection of the board
  // origin has positive depth, i.e. h(2,2) (w at X=Y=0) is positive.
  if (hh(2, 2) < 0) hh = -hh;
  const Eigen::Vector3d h1 = hh.col(0), h2 = hh.col(1), h3 = hh.col(2);
  const double lambda = 2.0 / (h1.norm() + h2.norm());
  Eigen::Matrix3d r_cols;
  r_cols.col(0) = lambda * h1;
  r_cols.col(1) = lambda * h2;
  r_cols.col(2) = (lambda * h1).cross(lambda * h2);
  return RigidTransform(nearest_rotation(r_cols), lambda * h3);
}

double mean_reprojection(const RigidTransform& pose,
                         const std::vector<CornerCorrespondence>& corners,
                         const CameraIntrinsics& k) {
  double sum = 0.0;
  for (const auto& [px, bp] : corners) {
    const Eigen::Vector3d pc = pose * bp;
    const Eigen::Vector2d proj(k.fx * pc.x() / pc.z() + k.cx,
                               k.fy * pc.y() / pc.z() + k.cy);
    sum += (proj - px).norm();
  }
  return sum / double(corners.size());
}

RigidTransform refine_pose(RigidTransform pose,
                           const std::vector<CornerCorrespondence>& corners,
                           const CameraIntrinsics& k) {
  const int n = int(corners.size());
  for (int iter = 0; iter < kRefineMaxIterations; ++iter) {
    Eigen::MatrixXd j(2 * n, 6);
    Eigen::VectorXd r(2 * n);
    for (int i = 0; i < n; ++i) {
      const auto& [px, bp] = corners[i];
      const Eigen::Vector3d pc = pose * bp;
      const double z = pc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << k.fx / z, 0, -k.fx * pc.x() / (z * z),
             0, k.fy / z, -k.fy * pc.y() / (z * z);
      // Left-multiplied increment: p' = exp(w)x(R p) + t + dt.
      Eigen::Matrix<double, 3, 6> dp;
      dp.leftCols<3>() = -skew(pc - pose.translation());
      dp.rightCols<3>() = Eigen::Matrix3d::Identity();
      j.middleRows<2>(2 * i) = dpi * dp;
      r.segment<2>(2 * i) =
          px - Eigen::Vector2d(k.fx * pc.x() / z + k.cx,
                               k.fy * pc.y() / z + k.cy);
    }
    const Eigen::Matrix<double, 6, 1> step =
        j.colPivHouseholderQr().solve(r);
    const Eigen::Vector3d w = step.head<3>();
    const Eigen::Matrix3d dr =
        w.norm() > 0
            ? Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix()
            : Eigen::Matrix3d::Identity();
    pose = RigidTransform(nearest_rotation(dr * pose.rotation()),
                          pose.translation() + step.tail<3>());
    if (step.norm() < kRefineStepTol) return pose;
  }
  throw std::runtime_error(
      "estimate_planar_pose: refinement did not converge");
}

struct MotionPair {
  RigidTransform a;
  RigidTransform b;
};

std::vector<MotionPair> build_motion_pairs(
    const std::vector<RigidTransform>& cam_from_board,
    const std::vector<CalibrationSample>& samples) {
  std::vector<MotionPair> pairs;
  const int n = int(samples.size());
  pairs.reserve(size_t(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      MotionPair p;
      p.a = cam_from_board[j] * cam_from_board[i].inverse();
      p.b = samples[j].kinematics * samples[i].kinematics.inverse();
      if (std::abs(p.a.rotation_angle() - p.b.rotation_angle()) >
          kAngleConsistencyTolRad) {
        throw std::runtime_error(
            "solve_ax_xb: rotation angles of camera and kinematics motions "
            "disagree for samples " + std::to_string(i) + "," +
            std::to_string(j) + "; inconsistent input data");
      }
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

void check_motion_rank(const std::vector<MotionPair>& pairs) {
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pairs) {
    if (p.b.rotation_angle() < 1e-8) continue;
    const Eigen::Vector3d axis = p.b.rotation_axis();
    scatter += axis * axis.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  if (eig.eigenvalues()(1) < 1e-8) {
    throw DegenerateMotionError(
        "solve_ax_xb: sample rotations span fewer than two independent "
        "axes; vary the robot orientation between captures");
  }
}

}  // namespace

void CheckerboardSpec::validate() const {
  if (inner_cols < 3 || inner_rows < 3) {
    throw std::invalid_argument(
        "CheckerboardSpec: need at least 3x3 inner corners");
  }
  if (square_size_mm <= 0) {
    throw std::invalid_argument("CheckerboardSpec: square size must be > 0");
  }
}

std::vector<Eigen::Vector3d> CheckerboardSpec::corner_points() const {
  validate();
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(size_t(inner_cols) * inner_rows);
  for (int r = 0; r < inner_rows; ++r) {
    for (int c = 0; c < inner_cols; ++c) {
      pts.emplace_back(c * square_size_mm, r * square_size_mm, 0.0);
    }
  }
  return pts;
}

PlanarPoseResult estimate_planar_pose(
    const CheckerboardSpec& spec,
    const std::vector<CornerCorrespondence>& corners,
    const CameraIntrinsics& k) {
  spec.validate();
  k.validate();
  check_corners(corners);
  const Eigen::Matrix3d h = plane_homography(corners, k);
  const RigidTransform initial = pose_from_homography(h);
  PlanarPoseResult result;
  result.cam_from_board = refine_pose(initial, corners, k);
  result.mean_reprojection_px =
      mean_reprojection(result.cam_from_board, corners, k);
  return result;
}

HandEyeResult solve_ax_xb(const std::vector<CalibrationSample>& samples,
                          const CameraIntrinsics& k) {
  if (samples.size() < 3) {
    throw std::invalid_argument(
        "solve_ax_xb: need at least 3 samples, got " +
        std::to_string(samples.size()));
  }
  std::vector<RigidTransform> cam_from_board;
  cam_from_board.reserve(samples.size());
  const CheckerboardSpec spec;
  for (const auto& s : samples) {
    cam_from_board.push_back(
        estimate_planar_pose(spec, s.board_corners_op, k).cam_from_board);
  }
  const auto pairs = build_motion_pairs(cam_from_board, samples);
  check_motion_rank(pairs);

  // Rotation: each pair contributes (I3 (x) Ra - Rb^T (x) I3) vec(Rx) = 0
  // with column-stacked vec; the solution is the null-space direction.
  const int np = int(pairs.size());
  Eigen::MatrixXd m(9 * np, 9);
  for (int p = 0; p < np; ++p) {
    const Eigen::Matrix3d& ra = pairs[p].a.rotation();
    const Eigen::Matrix3d& rb = pairs[p].b.rotation();
    Eigen::Matrix<double, 9, 9> block = Eigen::Matrix<double, 9, 9>::Zero();
    for (int i = 0; i < 3; ++i) {
      block.block<3, 3>(3 * i, 3 * i) += ra;
      for (int j = 0; j < 3; ++j) {
        block.block<3, 3>(3 * i, 3 * j) -=
            rb(j, i) * Eigen::Matrix3d::Identity();
      }
    }
    m.middleRows<9>(9 * p) = block;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  Eigen::VectorXd v = svd.matrixV().col(8);
  Eigen::Matrix3d rx_raw = Eigen::Map<Eigen::Matrix3d>(v.data());  // col-major
  if (rx_raw.determinant() < 0) rx_raw = -rx_raw;
  const Eigen::Matrix3d rx = nearest_rotation(rx_raw);

  // Translation: (Ra - I) tx = Rx tb - ta, stacked over pairs.
  Eigen::MatrixXd lhs(3 * np, 3);
  Eigen::VectorXd rhs(3 * np);
  for (int p = 0; p < np; ++p) {
    lhs.middleRows<3>(3 * p) =
        pairs[p].a.rotation() - Eigen::Matrix3d::Identity();
    rhs.segment<3>(3 * p) =
        rx * pairs[p].b.translation() - pairs[p].a.translation();
  }
  const Eigen::Vector3d tx = lhs.colPivHouseholderQr().solve(rhs);

  HandEyeResult result;
  result.x = RigidTransform(rx, tx);
  result.pairs_used = np;
  for (const auto& p : pairs) {
    Eigen::Matrix4d am = Eigen::Matrix4d::Identity();
    am.topLeftCorner<3, 3>() = p.a.rotation();
    am.topRightCorner<3, 1>() = p.a.translation();
    Eigen::Matrix4d bm = Eigen::Matrix4d::Identity();
    bm.topLeftCorner<3, 3>() = p.b.rotation();
    bm.topRightCorner<3, 1>() = p.b.translation();
    Eigen::Matrix4d xm = Eigen::Matrix4d::Identity();
    xm.topLeftCorner<3, 3>() = result.x.rotation();
    xm.topRightCorner<3, 1>() = result.x.translation();
    const double res = (am * xm - xm * bm).norm();
    result.mean_residual += res;
    result.max_residual = std::max(result.max_residual, res);
  }
  result.mean_residual /= double(np);
  return result;
}

StaticCameraResult solve_y(const RigidTransform& x,
                           const std::vector<CalibrationSample>& samples,
                           const CameraIntrinsics& k_base,
                           const CameraIntrinsics& k_op) {
  const CheckerboardSpec spec;
  std::vector<RigidTransform> estimates;
  for (const auto& s : samples) {
    if (!s.board_corners_base) continue;
    const auto p_op =
        estimate_planar_pose(spec, s.board_corners_op, k_op).cam_from_board;
    const auto p_base =
        estimate_planar_pose(spec, *s.board_corners_base, k_base)
            .cam_from_board;
    estimates.push_back(p_base * p_op.inverse() * x * s.kinematics);
  }
  if (estimates.empty()) {
    throw std::invalid_argument(
        "solve_y: no sample has the board visible in both cameras");
  }

  // Quaternion eigen-averaging: the mean rotation is the principal
  // eigenvector of the sum of q q^T (sign-invariant).
  Eigen::Matrix4d qsum = Eigen::Matrix4d::Zero();
  Eigen::Vector3d tsum = Eigen::Vector3d::Zero();
  for (const auto& e : estimates) {
    const Eigen::Quaterniond q(e.rotation());
    const Eigen::Vector4d qv(q.w(), q.x(), q.y(), q.z());
    qsum += qv * qv.transpose();
    tsum += e.translation();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(qsum);
  const Eigen::Vector4d qm = eig.eigenvectors().col(3);
  const Eigen::Quaterniond mean_q(qm(0), qm(1), qm(2), qm(3));
  StaticCameraResult result;
  result.y = RigidTransform(mean_q.normalized().toRotationMatrix(),
                            tsum / double(estimates.size()));
  result.samples_used = int(estimates.size());
  for (const auto& e : estimates) {
    const double ang =
        (result.y.inverse() * e).rotation_angle() * 180.0 / M_PI;
    result.rotation_spread_deg = std::max(result.rotation_spread_deg, ang);
    result.translation_spread_mm =
        std::max(result.translation_spread_mm,
                 (e.translation() - result.y.translation()).norm());
  }
  return result;
}

}  // namespace orrecon::calib
