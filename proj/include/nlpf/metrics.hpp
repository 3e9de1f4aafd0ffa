#ifndef NLPF_METRICS_HPP
#define NLPF_METRICS_HPP

#include <stdexcept>

#include "nlpf/kdtree.hpp"
#include "nlpf/point_cloud.hpp"

namespace nlpf {

/// Chamfer Distance: bidirectional mean of squared nearest-neighbor
/// distances between the two sets.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty input");
    KdTree tree_a(a);
    KdTree tree_b(b);
    double sum_ab = 0.0;
    for (const auto& p : a) {
        int nn = tree_b.knn(p, 1).front();
        sum_ab += (p - b[nn]).squaredNorm();
    }
    double sum_ba = 0.0;
    for (const auto& q : b) {
        int nn = tree_a.knn(q, 1).front();
        sum_ba += (q - a[nn]).squaredNorm();
    }
    return sum_ab / static_cast<double>(a.size()) +
           sum_ba / static_cast<double>(b.size());
}

/// Mean Square Error: for each reference point, the mean squared distance
/// to its k nearest candidate points, averaged over the reference set.
inline double mse(const PointCloud& reference, const PointCloud& candidate,
                  int k = 10) {
    if (reference.empty() || candidate.empty())
        throw std::invalid_argument("empty input");
    if (k < 1 || k > static_cast<int>(candidate.size()))
        throw std::invalid_argument("candidate smaller than k");
    KdTree tree(candidate);
    double sum = 0.0;
    for (const auto& x : reference) {
        double local = 0.0;
        for (int j : tree.knn(x, k)) local += (x - candidate[j]).squaredNorm();
        sum += local / static_cast<double>(k);
    }
    return sum / static_cast<double>(reference.size());
}

}  // namespace nlpf

#endif
