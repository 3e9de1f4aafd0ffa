#ifndef NLPF_KDTREE_HPP
#define NLPF_KDTREE_HPP

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "nlpf/point_cloud.hpp"

namespace nlpf {

/// Spatial index over an immutable point cloud. K-nearest queries return
/// exactly k indices sorted by nondecreasing Euclidean distance; equal
/// distances are broken by the smaller point index. Safe for concurrent
/// read-only queries.
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud) : points_(cloud) {
        if (cloud.empty()) throw std::invalid_argument("empty input");
        std::vector<int> order(cloud.size());
        std::iota(order.begin(), order.end(), 0);
        nodes_.reserve(cloud.size());
        root_ = build(order, 0, static_cast<int>(order.size()));
    }

    int size() const { return static_cast<int>(points_.size()); }

    /// Indices of the k nearest points to q.
    std::vector<int> knn(const Eigen::Vector3d& q, int k) const {
        if (k < 1 || k > size())
            throw std::invalid_argument("k out of range");
        std::vector<Candidate> heap;  // max-heap, worst candidate on top
        heap.reserve(static_cast<std::size_t>(k) + 1);
        search(root_, q, k, heap);
        std::sort_heap(heap.begin(), heap.end(), CandidateLess{});
        std::vector<int> out;
        out.reserve(heap.size());
        for (const auto& c : heap) out.push_back(c.index);
        return out;
    }

private:
    struct Node {
        int point;
        int axis;
        int left = -1;
        int right = -1;
    };
    struct Candidate {
        double dist2;
        int index;
    };
    // Total order: nearer first, then smaller index.
    struct CandidateLess {
        bool operator()(const Candidate& a, const Candidate& b) const {
            if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
            return a.index < b.index;
        }
    };

    int build(std::vector<int>& order, int begin, int end) {
        if (begin >= end) return -1;
        // Split along the widest axis of this subset.
        Eigen::Vector3d lo = points_[order[begin]];
        Eigen::Vector3d hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(points_[order[i]]);
            hi = hi.cwiseMax(points_[order[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);

        int mid = begin + (end - begin) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid,
                         order.begin() + end, [&](int a, int b) {
                             double ca = points_[a][axis];
                             double cb = points_[b][axis];
                             if (ca != cb) return ca < cb;
                             return a < b;
                         });
        Node node;
        node.point = order[mid];
        node.axis = axis;
        int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        int left = build(order, begin, mid);
        int right = build(order, mid + 1, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void search(int node_id, const Eigen::Vector3d& q, int k,
                std::vector<Candidate>& heap) const {
        if (node_id < 0) return;
        const Node& node = nodes_[node_id];
        Candidate c{(points_[node.point] - q).squaredNorm(), node.point};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), CandidateLess{});
        } else if (CandidateLess{}(c, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), CandidateLess{});
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), CandidateLess{});
        }
        double diff = q[node.axis] - points_[node.point][node.axis];
        int near = diff < 0 ? node.left : node.right;
        int far = diff < 0 ? node.right : node.left;
        search(near, q, k, heap);
        // Equal plane distance must still be explored: an equal-distance
        // point with a smaller index can displace the current worst.
        if (static_cast<int>(heap.size()) < k ||
            diff * diff <= heap.front().dist2) {
            search(far, q, k, heap);
        }
    }

    PointCloud points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace nlpf

#endif
