#ifndef ORRECON_METRICS_HPP
#define ORRECON_METRICS_HPP

#include <utility>
#include <vector>

#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"

namespace orrecon::metrics {

/// Time-stamped pose sequence; timestamps strictly increasing, seconds.
struct Trajectory {
  std::vector<std::pair<double, RigidTransform>> samples;

  void validate() const;
  size_t size() const { return samples.size(); }
  void push_back(double t, const RigidTransform& pose) {
    samples.emplace_back(t, pose);
  }
};

/// Greedy nearest-timestamp matching; each sample used at most once and
/// |dt| <= max_dt. Returns (est index, gt index) pairs in match order.
std::vector<std::pair<int, int>> associate(const Trajectory& est,
                                           const Trajectory& gt,
                                           double max_dt_s = 0.02);

struct AteResult {
  double rmse_mm = 0.0;
  double mean_mm = 0.0;
  double median_mm = 0.0;
  int matched_pairs = 0;
};

/// Absolute trajectory error: rigid (scale-1) least-squares alignment of the
/// estimate onto ground truth over associated pairs, then stats over the
/// translational residuals.
AteResult ate(const Trajectory& est, const Trajectory& gt,
              double max_dt_s = 0.02);

struct RpeResult {
  double mean_deg_per_s = 0.0;
  double median_deg_per_s = 0.0;
  int pairs = 0;
};

/// Relative pose error, rotation component: over associated sample pairs
/// separated by ~delta seconds (sliding window, all pairs), the angle of
/// (gt_i^-1 gt_j)^-1 (est_i^-1 est_j) divided by delta.
RpeResult rpe_rotation(const Trajectory& est, const Trajectory& gt,
                       double delta_s = 1.0, double max_dt_s = 0.02);

/// Combined report for one sequence.
struct TrajectoryError {
  double ate_rmse = 0.0;
  double ate_mean = 0.0;
  double ate_median = 0.0;
  double rpe_mean = 0.0;
  double rpe_median = 0.0;
  int matched_pairs = 0;
};

TrajectoryError evaluate_trajectory(const Trajectory& est,
                                    const Trajectory& gt,
                                    double max_dt_s = 0.02,
                                    double rpe_delta_s = 1.0);

/// DICE overlap of one class between two masks: 2|A∩B| / (|A|+|B|),
/// 1.0 when both masks are empty for the class.
double dice(const LabelMask& pred, const LabelMask& gt, uint8_t class_id);

/// Per-frame completeness: 100 * size / benchmark for each entry.
std::vector<double> recon_percentage(const std::vector<size_t>& series,
                                     size_t benchmark_size);

}  // namespace orrecon::metrics

#endif  // ORRECON_METRICS_HPP
