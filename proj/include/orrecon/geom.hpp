#ifndef ORRECON_GEOM_HPP
#define ORRECON_GEOM_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace orrecon {

/// Rigid body transform in SE(3). Rotations are stored as 3x3 matrices,
/// translations in millimeters. Immutable after construction.
///
/// Composition follows the column-vector convention: (a * b) * p == a * (b * p).
/// Long composition chains are re-orthonormalized automatically every
/// kRenormalizeEvery compositions to bound numeric drift.
class RigidTransform {
 public:
  static constexpr int kRenormalizeEvery = 50;

  RigidTransform()
      : rotation_(Eigen::Matrix3d::Identity()),
        translation_(Eigen::Vector3d::Zero()) {}

  /// Throws std::invalid_argument if `rotation` is not orthonormal with
  /// determinant +1 (tolerance 1e-6) or any entry is non-finite.
  RigidTransform(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation_mm);

  static RigidTransform Identity() { return RigidTransform(); }

  /// From a 4x4 homogeneous matrix with bottom row (0,0,0,1).
  static RigidTransform FromMatrix(const Eigen::Matrix4d& m);

  /// Quaternion does not need to be pre-normalized.
  static RigidTransform FromQuaternion(const Eigen::Quaterniond& q,
                                       const Eigen::Vector3d& translation_mm);

  static RigidTransform FromAxisAngle(const Eigen::Vector3d& axis,
                                      double angle_rad,
                                      const Eigen::Vector3d& translation_mm =
                                          Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Matrix4d matrix() const;
  Eigen::Quaterniond quaternion() const {
    return Eigen::Quaterniond(rotation_);
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

  /// Applies `other` first, then this transform.
  RigidTransform operator*(const RigidTransform& other) const;

  RigidTransform inverse() const;

  /// Rotation angle in radians, in [0, pi].
  double rotation_angle() const;

  /// Unit rotation axis; arbitrary (but finite) for near-identity rotations.
  Eigen::Vector3d rotation_axis() const;

  /// Projects the rotation block onto the nearest rotation matrix
  /// (polar decomposition via SVD) and resets the composition counter.
  void renormalize();

  /// Frobenius distance of rotation^T * rotation from identity.
  double orthonormality_error() const;

  bool is_approx(const RigidTransform& other, double rot_tol = 1e-9,
                 double trans_tol_mm = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
  int chain_length_ = 0;  // compositions since construction/renormalization
};

/// Nearest rotation matrix to `m` in Frobenius norm, det +1.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Closed-form least-squares rigid transform T with T * from[i] ~ to[i],
/// scale fixed at 1 (SVD of the cross-covariance). Requires >= 3 pairs.
RigidTransform best_rigid_transform(const std::vector<Eigen::Vector3d>& from,
                                    const std::vector<Eigen::Vector3d>& to);

/// Pinhole camera model. Focal lengths and principal point in pixels,
/// depth_scale converts native depth units to millimeters.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  double depth_scale = 1.0;  // native unit -> mm

  /// Throws std::invalid_argument when fx,fy <= 0 or the principal point
  /// lies outside the image.
  void validate() const;

  /// Projects a camera-frame point (mm). Returns std::nullopt when the point
  /// is behind the camera (z <= 0) or falls outside [0,width) x [0,height).
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& p_mm) const;

  /// Back-projects pixel (u,v) at depth (mm) into the camera frame.
  /// Throws std::invalid_argument for depth <= 0 or non-finite depth.
  Eigen::Vector3d unproject(double u, double v, double depth_mm) const;
};

}  // namespace orrecon

#endif  // ORRECON_GEOM_HPP
