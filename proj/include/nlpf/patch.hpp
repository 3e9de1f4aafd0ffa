#ifndef NLPF_PATCH_HPP
#define NLPF_PATCH_HPP

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "nlpf/kdtree.hpp"
#include "nlpf/point_cloud.hpp"

namespace nlpf {

/// A local patch: a center point and its K nearest neighbors (center
/// included), stored as a centered 3xK matrix. Columns follow nondecreasing
/// distance from the center, ties broken by smaller point index.
struct Patch {
    int center_index = -1;
    std::vector<int> neighbor_indices;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    Eigen::Matrix3Xd matrix;
    int center_column = 0;

    int size() const { return static_cast<int>(matrix.cols()); }

    /// Centered coordinate of the center point (column of the matrix).
    Eigen::Vector3d center_offset() const { return matrix.col(center_column); }
};

inline Patch extract_patch(const PointCloud& cloud, int center, int k,
                           const KdTree& index) {
    if (center < 0 || center >= static_cast<int>(cloud.size()))
        throw std::out_of_range("center index out of range");
    if (k > static_cast<int>(cloud.size()))
        throw std::invalid_argument("patch larger than cloud");

    Patch patch;
    patch.center_index = center;
    patch.neighbor_indices = index.knn(cloud[center], k);

    patch.centroid.setZero();
    for (int j : patch.neighbor_indices) patch.centroid += cloud[j];
    patch.centroid /= static_cast<double>(k);

    patch.matrix.resize(3, k);
    patch.center_column = 0;
    for (int col = 0; col < k; ++col) {
        int j = patch.neighbor_indices[col];
        patch.matrix.col(col) = cloud[j] - patch.centroid;
        if (j == center) patch.center_column = col;
    }
    return patch;
}

}  // namespace nlpf

#endif
