#ifndef ORRECON_CLOUD_HPP
#define ORRECON_CLOUD_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"

namespace orrecon {

/// 3D points (mm) with one class label per point. frame_tag names the
/// coordinate frame the points live in; operations that mix clouds check it.
struct LabeledPointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<uint8_t> labels;
  std::string frame_tag;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void append(const Eigen::Vector3d& p, uint8_t label) {
    points.push_back(p);
    labels.push_back(label);
  }

  /// Throws when points/labels lengths differ or a coordinate is non-finite.
  void validate() const;

  /// Returns a copy with every point mapped through `t` and frame_tag set
  /// to `new_tag`.
  LabeledPointCloud transformed(const RigidTransform& t,
                                const std::string& new_tag) const;

  void append_cloud(const LabeledPointCloud& other);
};

struct IcpParams {
  int max_iterations = 10;
  double correspondence_cutoff_mm = 50.0;
  // Convergence on the per-iteration transform delta.
  double translation_eps_mm = 1e-3;
  double rotation_eps_rad = 1e-6;
};

struct IcpResult {
  RigidTransform transform;  // maps source toward target
  double rms_residual_mm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // rms per iteration, non-increasing
  size_t final_correspondences = 0;
};

/// Thrown when ICP finds no correspondences within the cutoff at iteration 0.
class NonOverlapError : public std::runtime_error {
 public:
  explicit NonOverlapError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Per-class binary opening (erode then dilate) with a disk structuring
/// element. Pixels evacuated by the opening become background. Opening is
/// anti-extensive, so per-class outputs never overlap.
LabelMask open_mask(const LabelMask& mask, int radius_px);

/// Morphological closing (dilate then erode) of a single class against
/// everything else; used for densifying reprojected masks.
/// Exposed for reuse and testing.
std::vector<uint8_t> binary_close(const std::vector<uint8_t>& in, int width,
                                  int height, int radius_px);
std::vector<uint8_t> binary_dilate(const std::vector<uint8_t>& in, int width,
                                   int height, int radius_px);
std::vector<uint8_t> binary_erode(const std::vector<uint8_t>& in, int width,
                                  int height, int radius_px);

/// Unprojects every pixel with depth > 0 and label in keep_labels into a
/// camera-frame cloud via the pinhole model. `pixel_stride` samples every
/// n-th pixel in both directions (1 = dense).
LabeledPointCloud cloud_from_depth(const DepthImage& depth,
                                   const LabelMask& mask,
                                   const CameraIntrinsics& intrinsics,
                                   const std::set<uint8_t>& keep_labels,
                                   int pixel_stride = 1,
                                   const std::string& frame_tag = "camera");

/// Point-to-point ICP over mutual-nearest correspondences within the cutoff.
/// Returns the rigid transform mapping `source` toward `target`.
/// Throws NonOverlapError when no correspondences exist at iteration 0.
IcpResult icp(const LabeledPointCloud& target, const LabeledPointCloud& source,
              const IcpParams& params = {});

struct OutlierFilterResult {
  LabeledPointCloud cloud;
  bool skipped_small_input = false;  // cloud.size() <= k, returned unchanged
  size_t removed = 0;
};

/// Statistical outlier rejection: removes points whose mean k-nearest-neighbor
/// distance exceeds mean + sigma * std over the whole cloud.
OutlierFilterResult reject_outliers(const LabeledPointCloud& cloud, int k = 100,
                                    double sigma = 3.0);

/// Voxel-grid resampling: one point per occupied voxel at the centroid of the
/// voxel's points; label by majority vote, ties to the lowest id. Output
/// voxels appear in first-seen order, which makes the result deterministic.
LabeledPointCloud voxel_resample(const LabeledPointCloud& cloud,
                                 double voxel_mm);

/// Z-buffered splatting of a cloud into a label mask: each point stamps a
/// disk of splat_radius pixels, nearer points win per pixel. A per-class
/// closing with the same radius fills inter-point holes afterwards; pixels a
/// splat claimed directly are never overwritten by the closing.
LabelMask reproject(const LabeledPointCloud& cloud,
                    const RigidTransform& cam_from_world,
                    const CameraIntrinsics& intrinsics, int splat_radius_px);

}  // namespace orrecon

#endif  // ORRECON_CLOUD_HPP
