#include "orrecon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace orrecon::metrics {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void Trajectory::validate() const {
  for (size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].first <= samples[i - 1].first) {
      throw std::invalid_argument(
          "Trajectory: timestamps must be strictly increasing (index " +
          std::to_string(i) + ")");
    }
  }
}

std::vector<std::pair<int, int>> associate(const Trajectory& est,
                                           const Trajectory& gt,
                                           double max_dt_s) {
  if (max_dt_s <= 0) {
    throw std::invalid_argument("associate: max_dt must be > 0");
  }
  est.validate();
  gt.validate();

  // Candidates sorted by |dt| with index tie-breaks keep matching greedy
  // and deterministic.
  std::vector<std::tuple<double, int, int>> candidates;
  for (int i = 0; i < int(est.size()); ++i) {
    for (int j = 0; j < int(gt.size()); ++j) {
      const double dt =
          std::abs(est.samples[i].first - gt.samples[j].first);
      if (dt <= max_dt_s) candidates.emplace_back(dt, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<char> est_used(est.size(), 0), gt_used(gt.size(), 0);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [dt, i, j] : candidates) {
    if (est_used[i] || gt_used[j]) continue;
    est_used[i] = gt_used[j] = 1;
    pairs.emplace_back(i, j);
  }
  if (pairs.empty()) {
    throw std::runtime_error(
        "associate: no timestamp matches within tolerance");
  }
  return pairs;
}

AteResult ate(const Trajectory& est, const Trajectory& gt, double max_dt_s) {
  const auto pairs = associate(est, gt, max_dt_s);
  if (pairs.size() < 3) {
    throw std::invalid_argument("ate: need at least 3 associated pairs, got " +
                                std::to_string(pairs.size()));
  }
  std::vector<Eigen::Vector3d> p, q;
  p.reserve(pairs.size());
  q.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    p.push_back(est.samples[i].second.translation());
    q.push_back(gt.samples[j].second.translation());
  }
  const auto spread = [](const std::vector<Eigen::Vector3d>& v) {
    double s = 0.0;
    for (const auto& x : v) s = std::max(s, (x - v.front()).norm());
    return s;
  };
  if (spread(p) < 1e-9 || spread(q) < 1e-9) {
    throw std::runtime_error(
        "ate: degenerate alignment, all positions identical");
  }
  const RigidTransform align = best_rigid_transform(p, q);

  std::vector<double> residuals;
  residuals.reserve(pairs.size());
  double sq_sum = 0.0, sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double r = (align * p[i] - q[i]).norm();
    residuals.push_back(r);
    sq_sum += r * r;
    sum += r;
  }
  AteResult out;
  out.rmse_mm = std::sqrt(sq_sum / double(residuals.size()));
  out.mean_mm = sum / double(residuals.size());
  out.median_mm = median_of(residuals);
  out.matched_pairs = int(pairs.size());
  return out;
}

RpeResult rpe_rotation(const Trajectory& est, const Trajectory& gt,
                       double delta_s, double max_dt_s) {
  if (delta_s <= 0) {
    throw std::invalid_argument("rpe_rotation: delta must be > 0");
  }
  auto pairs = associate(est, gt, max_dt_s);
  std::sort(pairs.begin(), pairs.end());  // time order via est index order

  std::vector<double> errors;
  for (size_t a = 0; a < pairs.size(); ++a) {
    for (size_t b = a + 1; b < pairs.size(); ++b) {
      const double dt = gt.samples[pairs[b].second].first -
                        gt.samples[pairs[a].second].first;
      if (std::abs(dt - delta_s) > max_dt_s) continue;
      const auto& [ia, ja] = pairs[a];
      const auto& [ib, jb] = pairs[b];
      const RigidTransform gt_rel =
          gt.samples[ja].second.inverse() * gt.samples[jb].second;
      const RigidTransform est_rel =
          est.samples[ia].second.inverse() * est.samples[ib].second;
      const double angle_rad =
          (gt_rel.inverse() * est_rel).rotation_angle();
      errors.push_back(angle_rad * 180.0 / M_PI / delta_s);
    }
  }
  if (errors.empty()) {
    throw std::runtime_error(
        "rpe_rotation: no associated pairs at the requested time spacing");
  }
  RpeResult out;
  double sum = 0.0;
  for (double e : errors) sum += e;
  out.mean_deg_per_s = sum / double(errors.size());
  out.median_deg_per_s = median_of(errors);
  out.pairs = int(errors.size());
  return out;
}

TrajectoryError evaluate_trajectory(const Trajectory& est,
                                    const Trajectory& gt, double max_dt_s,
                                    double rpe_delta_s) {
  const auto a = ate(est, gt, max_dt_s);
  const auto r = rpe_rotation(est, gt, rpe_delta_s, max_dt_s);
  TrajectoryError out;
  out.ate_rmse = a.rmse_mm;
  out.ate_mean = a.mean_mm;
  out.ate_median = a.median_mm;
  out.rpe_mean = r.mean_deg_per_s;
  out.rpe_median = r.median_deg_per_s;
  out.matched_pairs = a.matched_pairs;
  return out;
}

double dice(const LabelMask& pred, const LabelMask& gt, uint8_t class_id) {
  if (!pred.same_size(gt)) {
    throw std::invalid_argument("dice: mask dimensions differ");
  }
  size_t a = 0, b = 0, both = 0;
  for (size_t i = 0; i < pred.labels.size(); ++i) {
    const bool in_a = pred.labels[i] == class_id;
    const bool in_b = gt.labels[i] == class_id;
    a += in_a;
    b += in_b;
    both += in_a && in_b;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * double(both) / double(a + b);
}

std::vector<double> recon_percentage(const std::vector<size_t>& series,
                                     size_t benchmark_size) {
  if (benchmark_size == 0) {
    throw std::invalid_argument("recon_percentage: benchmark size must be > 0");
  }
  std::vector<double> out;
  out.reserve(series.size());
  for (size_t s : series) {
    out.push_back(100.0 * double(s) / double(benchmark_size));
  }
  return out;
}

}  // namespace orrecon::metrics
