#ifndef ORRECON_KDTREE_HPP
#define ORRECON_KDTREE_HPP

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace orrecon {

/// Static 3D k-d tree over a point set, rebuilt per call site.
/// Neighbor queries break distance ties by ascending point index so results
/// are identical to a brute-force scan sorted by (distance, index).
class KdTree3 {
 public:
  struct Hit {
    int index = -1;
    double dist2 = std::numeric_limits<double>::infinity();
  };

  explicit KdTree3(const std::vector<Eigen::Vector3d>& points)
      : points_(points) {
    indices_.resize(points_.size());
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) indices_[i] = i;
    nodes_.reserve(points_.size() / kLeafSize * 2 + 2);
    if (!points_.empty()) {
      root_ = build(0, static_cast<int>(points_.size()));
    }
  }

  size_t size() const { return points_.size(); }

  /// Nearest neighbor within max_dist (mm, inclusive). nullopt when none.
  std::optional<Hit> nearest(const Eigen::Vector3d& q, double max_dist) const {
    if (points_.empty()) return std::nullopt;
    Hit best;
    best.dist2 = max_dist * max_dist;
    search_one(root_, q, best);
    if (best.index < 0) return std::nullopt;
    return best;
  }

  /// k nearest neighbors sorted ascending by (distance, index).
  /// `exclude_index` (if >= 0) is skipped, for self-queries.
  std::vector<Hit> knn(const Eigen::Vector3d& q, int k,
                       int exclude_index = -1) const {
    std::vector<Hit> heap;  // max-heap on (dist2, index)
    heap.reserve(k + 1);
    if (k > 0 && !points_.empty()) {
      search_knn(root_, q, k, exclude_index, heap);
    }
    std::sort(heap.begin(), heap.end(), [](const Hit& a, const Hit& b) {
      return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
    });
    return heap;
  }

 private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int axis = -1;           // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into indices_
  };

  int build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    Eigen::Vector3d lo = points_[indices_[begin]];
    Eigen::Vector3d hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[indices_[i]]);
      hi = hi.cwiseMax(points_[indices_[i]]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                     indices_.begin() + end, [&](int a, int b) {
                       return points_[a][axis] != points_[b][axis]
                                  ? points_[a][axis] < points_[b][axis]
                                  : a < b;
                     });
    node.axis = axis;
    node.split = points_[indices_[mid]][axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search_one(int node_id, const Eigen::Vector3d& q, Hit& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = indices_[i];
        const double d2 = (points_[idx] - q).squaredNorm();
        if (d2 < best.dist2 ||
            (d2 == best.dist2 && (best.index < 0 || idx < best.index))) {
          best.index = idx;
          best.dist2 = d2;
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search_one(near, q, best);
    if (delta * delta <= best.dist2) {  // equal distance may hold a lower index
      search_one(far, q, best);
    }
  }

  void search_knn(int node_id, const Eigen::Vector3d& q, int k,
                  int exclude_index, std::vector<Hit>& heap) const {
    const auto worse = [](const Hit& a, const Hit& b) {
      return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
    };
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = indices_[i];
        if (idx == exclude_index) continue;
        Hit hit{idx, (points_[idx] - q).squaredNorm()};
        if (static_cast<int>(heap.size()) < k) {
          heap.push_back(hit);
          std::push_heap(heap.begin(), heap.end(), worse);
        } else if (worse(hit, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), worse);
          heap.back() = hit;
          std::push_heap(heap.begin(), heap.end(), worse);
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search_knn(near, q, k, exclude_index, heap);
    if (static_cast<int>(heap.size()) < k ||
        delta * delta <= heap.front().dist2) {
      search_knn(far, q, k, exclude_index, heap);
    }
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> indices_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace orrecon

#endif  // ORRECON_KDTREE_HPP
