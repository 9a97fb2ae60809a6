#include "orrecon/cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "orrecon/kdtree.hpp"

namespace orrecon {

void LabeledPointCloud::validate() const {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("LabeledPointCloud: points/labels mismatch");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw std::invalid_argument("LabeledPointCloud: non-finite coordinate");
    }
  }
}

LabeledPointCloud LabeledPointCloud::transformed(
    const RigidTransform& t, const std::string& new_tag) const {
  LabeledPointCloud out;
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(t * p);
  out.labels = labels;
  out.frame_tag = new_tag;
  return out;
}

void LabeledPointCloud::append_cloud(const LabeledPointCloud& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

namespace {

// Half-width of a disk of radius r at vertical offset dy.
std::vector<int> disk_half_widths(int radius) {
  std::vector<int> hw(2 * radius + 1, 0);
  for (int dy = -radius; dy <= radius; ++dy) {
    hw[dy + radius] =
        static_cast<int>(std::floor(std::sqrt(double(radius) * radius -
                                              double(dy) * dy)));
  }
  return hw;
}

// Row-wise prefix sums: row_prefix[y][x+1] - row_prefix[y][a] = count in [a,x].
std::vector<std::vector<int>> row_prefix_sums(const std::vector<uint8_t>& in,
                                              int width, int height) {
  std::vector<std::vector<int>> prefix(height, std::vector<int>(width + 1, 0));
  for (int y = 0; y < height; ++y) {
    const uint8_t* row = in.data() + size_t(y) * width;
    auto& p = prefix[y];
    for (int x = 0; x < width; ++x) p[x + 1] = p[x] + (row[x] ? 1 : 0);
  }
  return prefix;
}

}  // namespace

std::vector<uint8_t> binary_erode(const std::vector<uint8_t>& in, int width,
                                  int height, int radius_px) {
  if (radius_px <= 0) return in;
  const auto hw = disk_half_widths(radius_px);
  const auto prefix = row_prefix_sums(in, width, height);
  std::vector<uint8_t> out(in.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool keep = true;
      for (int dy = -radius_px; keep && dy <= radius_px; ++dy) {
        const int yy = y + dy;
        const int w = hw[dy + radius_px];
        const int x0 = x - w, x1 = x + w;
        if (yy < 0 || yy >= height || x0 < 0 || x1 >= width) {
          keep = false;  // element leaves the image; outside counts as unset
          break;
        }
        if (prefix[yy][x1 + 1] - prefix[yy][x0] != x1 - x0 + 1) keep = false;
      }
      if (keep) out[size_t(y) * width + x] = 1;
    }
  }
  return out;
}

std::vector<uint8_t> binary_dilate(const std::vector<uint8_t>& in, int width,
                                   int height, int radius_px) {
  if (radius_px <= 0) return in;
  const auto hw = disk_half_widths(radius_px);
  const auto prefix = row_prefix_sums(in, width, height);
  std::vector<uint8_t> out(in.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool set = false;
      for (int dy = -radius_px; dy <= radius_px; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= height) continue;
        const int w = hw[dy + radius_px];
        const int x0 = std::max(0, x - w), x1 = std::min(width - 1, x + w);
        if (prefix[yy][x1 + 1] - prefix[yy][x0] > 0) {
          set = true;
          break;
        }
      }
      if (set) out[size_t(y) * width + x] = 1;
    }
  }
  return out;
}

std::vector<uint8_t> binary_close(const std::vector<uint8_t>& in, int width,
                                  int height, int radius_px) {
  return binary_erode(binary_dilate(in, width, height, radius_px), width,
                      height, radius_px);
}

LabelMask open_mask(const LabelMask& mask, int radius_px) {
  if (radius_px < 1) {
    throw std::invalid_argument("open_mask: radius must be >= 1");
  }
  std::vector<uint8_t> present(256, 0);
  for (uint8_t l : mask.labels) present[l] = 1;

  LabelMask out(mask.width, mask.height, 0);
  const size_t n = mask.labels.size();
  std::vector<uint8_t> indicator(n);
  for (int cls = 1; cls < 256; ++cls) {
    if (!present[cls]) continue;
    for (size_t i = 0; i < n; ++i) {
      indicator[i] = mask.labels[i] == cls ? 1 : 0;
    }
    const auto eroded =
        binary_erode(indicator, mask.width, mask.height, radius_px);
    const auto opened =
        binary_dilate(eroded, mask.width, mask.height, radius_px);
    // Opening is anti-extensive per class, so classes cannot collide here.
    for (size_t i = 0; i < n; ++i) {
      if (opened[i]) out.labels[i] = static_cast<uint8_t>(cls);
    }
  }
  return out;
}

LabeledPointCloud cloud_from_depth(const DepthImage& depth,
                                   const LabelMask& mask,
                                   const CameraIntrinsics& intrinsics,
                                   const std::set<uint8_t>& keep_labels,
                                   int pixel_stride,
                                   const std::string& frame_tag) {
  if (depth.width != mask.width || depth.height != mask.height ||
      depth.width != intrinsics.width || depth.height != intrinsics.height) {
    throw std::invalid_argument(
        "cloud_from_depth: depth/mask/intrinsics dimension mismatch");
  }
  if (pixel_stride < 1) {
    throw std::invalid_argument("cloud_from_depth: stride must be >= 1");
  }
  std::array<bool, 256> keep{};
  for (uint8_t l : keep_labels) keep[l] = true;

  LabeledPointCloud cloud;
  cloud.frame_tag = frame_tag;
  for (int v = 0; v < depth.height; v += pixel_stride) {
    for (int u = 0; u < depth.width; u += pixel_stride) {
      const double d = depth.at(u, v);
      if (!(d > 0.f) || !std::isfinite(d)) continue;
      const uint8_t label = mask.at(u, v);
      if (!keep[label]) continue;
      cloud.append(intrinsics.unproject(u, v, d), label);
    }
  }
  return cloud;
}

IcpResult icp(const LabeledPointCloud& target, const LabeledPointCloud& source,
              const IcpParams& params) {
  if (target.empty() || source.empty()) {
    throw std::invalid_argument("icp: both clouds must be non-empty");
  }
  const KdTree3 target_tree(target.points);
  const KdTree3 source_tree(source.points);

  IcpResult result;
  RigidTransform current;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(source.size());

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const RigidTransform current_inv = current.inverse();
    pairs.clear();
    for (int i = 0; i < static_cast<int>(source.size()); ++i) {
      const Eigen::Vector3d q = current * source.points[i];
      const auto fwd = target_tree.nearest(q, params.correspondence_cutoff_mm);
      if (!fwd) continue;
      // Mutual-nearest check; rigid invariance lets us query the static
      // source tree with the back-transformed target point.
      const auto bwd = source_tree.nearest(
          current_inv * target.points[fwd->index],
          params.correspondence_cutoff_mm);
      if (bwd && bwd->index == i) pairs.emplace_back(i, fwd->index);
    }
    if (pairs.empty()) {
      if (iter == 0) {
        throw NonOverlapError(
            "icp: no correspondences within cutoff at iteration 0");
      }
      break;
    }

    std::vector<Eigen::Vector3d> from, to;
    from.reserve(pairs.size());
    to.reserve(pairs.size());
    for (const auto& [si, ti] : pairs) {
      from.push_back(source.points[si]);
      to.push_back(target.points[ti]);
    }
    const RigidTransform next = best_rigid_transform(from, to);

    double sq_sum = 0.0;
    for (size_t j = 0; j < from.size(); ++j) {
      sq_sum += (next * from[j] - to[j]).squaredNorm();
    }
    const double rms = std::sqrt(sq_sum / double(from.size()));
    result.residual_history.push_back(rms);
    result.rms_residual_mm = rms;
    result.final_correspondences = pairs.size();
    result.iterations = iter + 1;

    const RigidTransform delta = next * current.inverse();
    current = next;
    if (delta.rotation_angle() < params.rotation_eps_rad &&
        delta.translation().norm() < params.translation_eps_mm) {
      result.converged = true;
      break;
    }
  }
  result.transform = current;
  return result;
}

namespace {

// Mean k-NN distance per point. Distances are averaged in ascending
// (distance, index) order on every path so the brute-force and k-d tree
// routes agree bit for bit.
std::vector<double> mean_knn_distances(const std::vector<Eigen::Vector3d>& pts,
                                       int k) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> out(n, 0.0);
  constexpr int kBruteForceBelow = 512;
  if (n < kBruteForceBelow) {
    std::vector<std::pair<double, int>> d2(n - 1);
    for (int i = 0; i < n; ++i) {
      d2.clear();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        d2.emplace_back((pts[j] - pts[i]).squaredNorm(), j);
      }
      std::partial_sort(d2.begin(), d2.begin() + k, d2.end());
      double sum = 0.0;
      for (int m = 0; m < k; ++m) sum += std::sqrt(d2[m].first);
      out[i] = sum / k;
    }
  } else {
    const KdTree3 tree(pts);
    for (int i = 0; i < n; ++i) {
      const auto hits = tree.knn(pts[i], k, i);
      double sum = 0.0;
      for (const auto& h : hits) sum += std::sqrt(h.dist2);
      out[i] = sum / k;
    }
  }
  return out;
}

}  // namespace

OutlierFilterResult reject_outliers(const LabeledPointCloud& cloud, int k,
                                    double sigma) {
  if (k < 1) throw std::invalid_argument("reject_outliers: k must be >= 1");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("reject_outliers: sigma must be > 0");
  }
  OutlierFilterResult result;
  const int n = static_cast<int>(cloud.size());
  if (n <= k) {
    result.cloud = cloud;
    result.skipped_small_input = true;
    return result;
  }

  const std::vector<double> d = mean_knn_distances(cloud.points, k);
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= n;  // population variance
  const double threshold = mean + sigma * std::sqrt(var);

  result.cloud.frame_tag = cloud.frame_tag;
  result.cloud.points.reserve(cloud.size());
  result.cloud.labels.reserve(cloud.size());
  for (int i = 0; i < n; ++i) {
    if (d[i] > threshold) {
      ++result.removed;
      continue;
    }
    result.cloud.append(cloud.points[i], cloud.labels[i]);
  }
  return result;
}

LabeledPointCloud voxel_resample(const LabeledPointCloud& cloud,
                                 double voxel_mm) {
  if (!(voxel_mm > 0.0)) {
    throw std::invalid_argument("voxel_resample: voxel size must be > 0");
  }
  struct Key {
    int64_t x, y, z;
    bool operator==(const Key& o) const {
      return x == o.x && y == o.y && z == o.z;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = std::hash<int64_t>()(k.x);
      h = h * 0x9e3779b97f4a7c15ULL + std::hash<int64_t>()(k.y);
      h = h * 0x9e3779b97f4a7c15ULL + std::hash<int64_t>()(k.z);
      return h;
    }
  };
  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    std::map<uint8_t, int> label_counts;
  };

  std::unordered_map<Key, int, KeyHash> index;
  std::vector<Acc> cells;  // first-seen order
  index.reserve(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    const Key key{static_cast<int64_t>(std::floor(p.x() / voxel_mm)),
                  static_cast<int64_t>(std::floor(p.y() / voxel_mm)),
                  static_cast<int64_t>(std::floor(p.z() / voxel_mm))};
    auto [it, inserted] = index.try_emplace(key, int(cells.size()));
    if (inserted) cells.emplace_back();
    Acc& acc = cells[it->second];
    acc.sum += p;
    acc.count += 1;
    acc.label_counts[cloud.labels[i]] += 1;
  }

  LabeledPointCloud out;
  out.frame_tag = cloud.frame_tag;
  out.points.reserve(cells.size());
  out.labels.reserve(cells.size());
  for (const Acc& acc : cells) {
    uint8_t best_label = 0;
    int best_count = -1;
    for (const auto& [label, count] : acc.label_counts) {
      if (count > best_count) {  // map iterates ascending: ties keep lowest id
        best_count = count;
        best_label = label;
      }
    }
    out.append(acc.sum / double(acc.count), best_label);
  }
  return out;
}

LabelMask reproject(const LabeledPointCloud& cloud,
                    const RigidTransform& cam_from_world,
                    const CameraIntrinsics& intrinsics, int splat_radius_px) {
  if (splat_radius_px < 0) {
    throw std::invalid_argument("reproject: splat radius must be >= 0");
  }
  const int w = intrinsics.width, h = intrinsics.height;
  LabelMask out(w, h, 0);
  std::vector<float> zbuf(size_t(w) * h, std::numeric_limits<float>::infinity());

  std::vector<std::pair<int, int>> offsets;
  for (int dy = -splat_radius_px; dy <= splat_radius_px; ++dy) {
    for (int dx = -splat_radius_px; dx <= splat_radius_px; ++dx) {
      if (dx * dx + dy * dy <= splat_radius_px * splat_radius_px) {
        offsets.emplace_back(dx, dy);
      }
    }
  }

  for (size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d q = cam_from_world * cloud.points[i];
    const auto uv = intrinsics.project(q);
    if (!uv) continue;
    const int cu = static_cast<int>(std::lround(uv->x()));
    const int cv = static_cast<int>(std::lround(uv->y()));
    const float z = static_cast<float>(q.z());
    for (const auto& [dx, dy] : offsets) {
      const int x = cu + dx, y = cv + dy;
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      const size_t idx = size_t(y) * w + x;
      if (z < zbuf[idx]) {
        zbuf[idx] = z;
        out.labels[idx] = cloud.labels[i];
      }
    }
  }

  if (splat_radius_px > 0) {
    std::vector<uint8_t> present(256, 0);
    for (uint8_t l : out.labels) present[l] = 1;
    std::vector<uint8_t> indicator(out.labels.size());
    for (int cls = 1; cls < 256; ++cls) {
      if (!present[cls]) continue;
      for (size_t i = 0; i < out.labels.size(); ++i) {
        indicator[i] = out.labels[i] == cls ? 1 : 0;
      }
      const auto closed = binary_close(indicator, w, h, splat_radius_px);
      for (size_t i = 0; i < closed.size(); ++i) {
        // Fill only hole pixels: no direct splat and not claimed by a
        // lower class id.
        if (closed[i] && out.labels[i] == 0 && std::isinf(zbuf[i])) {
          out.labels[i] = static_cast<uint8_t>(cls);
        }
      }
    }
  }
  return out;
}

}  // namespace orrecon
