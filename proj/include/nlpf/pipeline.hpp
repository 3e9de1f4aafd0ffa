#ifndef NLPF_PIPELINE_HPP
#define NLPF_PIPELINE_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nlpf/alignment.hpp"
#include "nlpf/kdtree.hpp"
#include "nlpf/parallel.hpp"
#include "nlpf/patch.hpp"
#include "nlpf/point_cloud.hpp"
#include "nlpf/rpca.hpp"
#include "nlpf/similarity.hpp"

namespace nlpf {

/// Scheme 1 re-finds similar patches every iteration; scheme 2 searches
/// once and reuses the sets. Scheme 1 suits relatively larger noise.
enum class IterationScheme { kRefindEachIteration = 1, kReuseFirstSearch = 2 };

struct FilterParams {
    int k = 100;
    double theta = 0.05;
    int iterations = 1;
    IterationScheme scheme = IterationScheme::kReuseFirstSearch;
    RpcaParams rpca;
};

inline void validate(const FilterParams& p) {
    if (p.k < 3) throw std::invalid_argument("patch size must be >= 3");
    if (!(p.theta > 0.0))
        throw std::invalid_argument("theta must be positive");
    if (p.iterations < 1)
        throw std::invalid_argument("iterations must be >= 1");
}

struct IterationTiming {
    double step1_seconds = 0.0;  // similar-patch finding
    double step2_seconds = 0.0;  // position update
};

struct FilterReport {
    std::vector<IterationTiming> iterations;
    std::vector<int> similar_set_sizes;  // from the last search

    double total_step1() const {
        double t = 0.0;
        for (const auto& it : iterations) t += it.step1_seconds;
        return t;
    }
    double total_step2() const {
        double t = 0.0;
        for (const auto& it : iterations) t += it.step2_seconds;
        return t;
    }
};

struct PassResult {
    PointCloud cloud;
    std::vector<SimilarSet> sets;
    IterationTiming timing;
};

/// One filtering pass. When `cached` is null, step 1 builds the neighbor
/// index, descriptor table, and per-point similar sets; otherwise the sets
/// are reused and only patches/frames are recomputed on the current cloud.
/// All new positions are computed from the same input snapshot, so the
/// output is independent of point ordering and thread count.
inline PassResult filter_pass(const PointCloud& cloud,
                              const FilterParams& params,
                              const std::vector<SimilarSet>* cached) {
    validate(params);
    if (static_cast<int>(cloud.size()) < params.k)
        throw std::invalid_argument("patch larger than cloud");
    if (cached && cached->size() != cloud.size())
        throw std::invalid_argument("cached sets do not match cloud size");

    using Clock = std::chrono::steady_clock;
    auto seconds = [](Clock::time_point a, Clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    PassResult result;
    auto t0 = Clock::now();
    KdTree index(cloud);

    if (cached) {
        result.sets = *cached;
    } else {
        DescriptorTable table =
            build_descriptor_table(cloud, params.k, index, params.rpca);
        result.sets.resize(cloud.size());
        parallel_for(cloud.size(), [&](std::size_t i) {
            result.sets[i] =
                find_similar(static_cast<int>(i), table, params.theta);
        });
    }
    auto t1 = Clock::now();

    // Step 2: canonical frames and quadrant axes once per point, then a
    // Jacobi-style simultaneous update of every central point.
    std::vector<AlignmentCache> caches(cloud.size());
    std::vector<EigenFrame> frames(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t i) {
        Patch patch =
            extract_patch(cloud, static_cast<int>(i), params.k, index);
        frames[i] = eigen_frame(patch);
        caches[i] = make_alignment_cache(map_to_canonical(frames[i], patch));
    });

    result.cloud.resize(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t i) {
        const QuadrantAxes& ref_axes = caches[i].axes;
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        for (int j : result.sets[i].member_indices) {
            auto [signs, sigma] = best_flip_cached(caches[j], ref_axes);
            Eigen::Vector3d center = caches[j].center_canonical;
            for (int axis = 0; axis < 3; ++axis)
                if (signs[axis] < 0) center[axis] = -center[axis];
            sum += center;
        }
        Eigen::Vector3d mean =
            sum /
            static_cast<double>(result.sets[i].member_indices.size());
        result.cloud[i] = frames[i].inverse() * mean + frames[i].centroid;
    });
    auto t2 = Clock::now();

    if (cached) {
        result.timing.step1_seconds = 0.0;
        result.timing.step2_seconds = seconds(t0, t2);
    } else {
        result.timing.step1_seconds = seconds(t0, t1);
        result.timing.step2_seconds = seconds(t1, t2);
    }
    return result;
}

/// Full filtering run over the requested iterations and scheme.
inline std::pair<PointCloud, FilterReport> filter(const PointCloud& cloud,
                                                  const FilterParams& params) {
    validate(params);
    PointCloud current = cloud;
    FilterReport report;
    std::vector<SimilarSet> sets;
    for (int iter = 0; iter < params.iterations; ++iter) {
        bool reuse = iter > 0 &&
                     params.scheme == IterationScheme::kReuseFirstSearch;
        PassResult pass = filter_pass(current, params, reuse ? &sets : nullptr);
        current = std::move(pass.cloud);
        sets = std::move(pass.sets);
        report.iterations.push_back(pass.timing);
    }
    report.similar_set_sizes.reserve(sets.size());
    for (const auto& s : sets)
        report.similar_set_sizes.push_back(
            static_cast<int>(s.member_indices.size()));
    return {std::move(current), std::move(report)};
}

/// Uniform random selection without replacement. Returns the selected
/// points and their indices in the source cloud (ascending). fraction = 1
/// returns the identity selection.
inline std::pair<PointCloud, std::vector<int>> subsample(
    const PointCloud& cloud, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("fraction must be in (0, 1]");
    std::vector<int> selected(cloud.size());
    std::iota(selected.begin(), selected.end(), 0);
    if (fraction < 1.0) {
        std::size_t count = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(cloud.size())));
        count = std::max<std::size_t>(count, 1);
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(
                i, selected.size() - 1);
            std::swap(selected[i], selected[pick(rng)]);
        }
        selected.resize(count);
        std::sort(selected.begin(), selected.end());
    }
    PointCloud out;
    out.reserve(selected.size());
    for (int i : selected) out.push_back(cloud[i]);
    return {std::move(out), std::move(selected)};
}

}  // namespace nlpf

#endif
