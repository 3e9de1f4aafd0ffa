#ifndef NLPF_POINT_CLOUD_HPP
#define NLPF_POINT_CLOUD_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace nlpf {

/// A point cloud is an ordered set of 3D positions in model units.
using PointCloud = std::vector<Eigen::Vector3d>;

/// Length of the axis-aligned bounding-box diagonal.
inline double bounding_box_diagonal(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("empty input");
    Eigen::Vector3d lo = cloud.front();
    Eigen::Vector3d hi = cloud.front();
    for (const auto& p : cloud) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

/// Perturb every coordinate with zero-mean Gaussian noise whose standard
/// deviation is sigma_fraction times the bounding-box diagonal.
/// Deterministic for a fixed seed.
inline PointCloud add_gaussian_noise(const PointCloud& cloud,
                                     double sigma_fraction,
                                     std::uint64_t seed) {
    if (cloud.empty()) throw std::invalid_argument("empty input");
    if (!(sigma_fraction >= 0.0))
        throw std::invalid_argument("negative sigma_fraction");
    if (sigma_fraction == 0.0) return cloud;

    double sigma = sigma_fraction * bounding_box_diagonal(cloud);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    PointCloud out;
    out.reserve(cloud.size());
    for (const auto& p : cloud) {
        Eigen::Vector3d q = p;
        q.x() += gauss(rng);
        q.y() += gauss(rng);
        q.z() += gauss(rng);
        out.push_back(q);
    }
    return out;
}

}  // namespace nlpf

#endif
