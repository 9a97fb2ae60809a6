#include "orrecon/geom.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace orrecon {

namespace {

bool all_finite(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  return r.allFinite() && t.allFinite();
}

}  // namespace

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation_mm)
    : rotation_(rotation), translation_(translation_mm) {
  if (!all_finite(rotation, translation_mm)) {
    throw std::invalid_argument("RigidTransform: non-finite entries");
  }
  const double err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  if (err > 1e-6 || rotation.determinant() < 0.0) {
    throw std::invalid_argument(
        "RigidTransform: rotation is not orthonormal with det +1");
  }
}

RigidTransform RigidTransform::FromMatrix(const Eigen::Matrix4d& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-9) {
    throw std::invalid_argument(
        "RigidTransform: bottom row of homogeneous matrix must be (0,0,0,1)");
  }
  return RigidTransform(m.block<3, 3>(0, 0), m.block<3, 1>(0, 3));
}

RigidTransform RigidTransform::FromQuaternion(
    const Eigen::Quaterniond& q, const Eigen::Vector3d& translation_mm) {
  if (q.norm() < 1e-12) {
    throw std::invalid_argument("RigidTransform: zero quaternion");
  }
  return RigidTransform(q.normalized().toRotationMatrix(), translation_mm);
}

RigidTransform RigidTransform::FromAxisAngle(
    const Eigen::Vector3d& axis, double angle_rad,
    const Eigen::Vector3d& translation_mm) {
  if (axis.norm() < 1e-12) {
    throw std::invalid_argument("RigidTransform: zero rotation axis");
  }
  return RigidTransform(
      Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(),
      translation_mm);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = rotation_;
  m.block<3, 1>(0, 3) = translation_;
  return m;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  out.chain_length_ = std::max(chain_length_, other.chain_length_) + 1;
  if (out.chain_length_ >= kRenormalizeEvery) {
    out.renormalize();
  }
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  out.chain_length_ = chain_length_;
  return out;
}

double RigidTransform::rotation_angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

Eigen::Vector3d RigidTransform::rotation_axis() const {
  Eigen::AngleAxisd aa(rotation_);
  Eigen::Vector3d axis = aa.axis();
  if (!axis.allFinite() || axis.norm() < 1e-12) {
    return Eigen::Vector3d::UnitZ();
  }
  return axis.normalized();
}

void RigidTransform::renormalize() {
  rotation_ = nearest_rotation(rotation_);
  chain_length_ = 0;
}

double RigidTransform::orthonormality_error() const {
  return (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity())
      .norm();
}

bool RigidTransform::is_approx(const RigidTransform& other, double rot_tol,
                               double trans_tol_mm) const {
  return (rotation_ - other.rotation_).norm() <= rot_tol &&
         (translation_ - other.translation_).norm() <= trans_tol_mm;
}

RigidTransform best_rigid_transform(const std::vector<Eigen::Vector3d>& from,
                                    const std::vector<Eigen::Vector3d>& to) {
  if (from.size() != to.size() || from.size() < 3) {
    throw std::invalid_argument(
        "best_rigid_transform: need >= 3 point pairs of equal length");
  }
  const int n = static_cast<int>(from.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (int i = 0; i < n; ++i) {
    src.col(i) = from[i];
    dst.col(i) = to[i];
  }
  const Eigen::Matrix4d m = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  return RigidTransform(nearest_rotation(m.block<3, 3>(0, 0)),
                        m.block<3, 1>(0, 3));
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("CameraIntrinsics: focal lengths must be > 0");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("CameraIntrinsics: image size must be > 0");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw std::invalid_argument(
        "CameraIntrinsics: principal point outside image");
  }
  if (!(depth_scale > 0.0)) {
    throw std::invalid_argument("CameraIntrinsics: depth_scale must be > 0");
  }
}

std::optional<Eigen::Vector2d> CameraIntrinsics::project(
    const Eigen::Vector3d& p_mm) const {
  if (!(p_mm.z() > 0.0)) {
    return std::nullopt;
  }
  const double u = fx * p_mm.x() / p_mm.z() + cx;
  const double v = fy * p_mm.y() / p_mm.z() + cy;
  if (u < 0.0 || u >= width || v < 0.0 || v >= height) {
    return std::nullopt;
  }
  return Eigen::Vector2d(u, v);
}

Eigen::Vector3d CameraIntrinsics::unproject(double u, double v,
                                            double depth_mm) const {
  if (!(depth_mm > 0.0) || !std::isfinite(depth_mm)) {
    throw std::invalid_argument("unproject: depth must be finite and > 0");
  }
  return Eigen::Vector3d((u - cx) * depth_mm / fx, (v - cy) * depth_mm / fy,
                         depth_mm);
}

}  // namespace orrecon
