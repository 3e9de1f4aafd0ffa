#ifndef NLPF_SIMILARITY_HPP
#define NLPF_SIMILARITY_HPP

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "nlpf/kdtree.hpp"
#include "nlpf/parallel.hpp"
#include "nlpf/patch.hpp"
#include "nlpf/point_cloud.hpp"
#include "nlpf/rpca.hpp"

namespace nlpf {

/// Patch similarity signature: the sorted singular values of the patch's
/// low-rank part.
using Descriptor = Eigen::Vector3d;

/// One descriptor per point, computed once per filtering pass.
using DescriptorTable = std::vector<Descriptor>;

/// Indices of the patches similar to a query patch; the query is always a
/// member of its own set.
struct SimilarSet {
    int query_index = -1;
    std::vector<int> member_indices;
};

/// Euclidean distance between two descriptors.
inline double patch_distance(const Descriptor& a, const Descriptor& b) {
    return (a - b).norm();
}

/// Two patches are similar iff their descriptor distance is strictly below
/// the threshold.
inline bool is_similar(double d, double theta) { return d < theta; }

inline DescriptorTable build_descriptor_table(const PointCloud& cloud,
                                              int k, const KdTree& index,
                                              const RpcaParams& rpca = {}) {
    if (k > static_cast<int>(cloud.size()))
        throw std::invalid_argument("patch larger than cloud");
    DescriptorTable table(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t i) {
        Patch patch = extract_patch(cloud, static_cast<int>(i), k, index);
        Decomposition d = decompose(patch.matrix, rpca);
        table[i] = singular_value_descriptor(d.low_rank);
    });
    return table;
}

inline SimilarSet find_similar(int query_index, const DescriptorTable& table,
                               double theta) {
    if (query_index < 0 || query_index >= static_cast<int>(table.size()))
        throw std::out_of_range("query index out of range");
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    SimilarSet set;
    set.query_index = query_index;
    const Descriptor& v = table[query_index];
    for (int j = 0; j < static_cast<int>(table.size()); ++j) {
        if (j == query_index ||
            is_similar(patch_distance(v, table[j]), theta)) {
            set.member_indices.push_back(j);
        }
    }
    return set;
}

}  // namespace nlpf

#endif
