#ifndef NLPF_ALIGNMENT_HPP
#define NLPF_ALIGNMENT_HPP

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nlpf/patch.hpp"
#include "nlpf/similarity.hpp"

namespace nlpf {

/// Orthogonal map into a patch's principal frame. Rows of `forward` are the
/// eigenvectors of the patch covariance M M^T, eigenvalue-descending, so
/// canonical coordinates are projections onto principal axes.
struct EigenFrame {
    Eigen::Matrix3d forward = Eigen::Matrix3d::Identity();
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();

    Eigen::Matrix3d inverse() const { return forward.transpose(); }
};

/// Deterministic sign convention: each eigenvector's largest-magnitude
/// component is made positive (magnitude ties resolved toward the lower
/// coordinate index); det is then forced to +1 by negating the last row.
inline EigenFrame eigen_frame(const Patch& patch) {
    Eigen::Matrix3d cov = patch.matrix * patch.matrix.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);

    EigenFrame frame;
    frame.centroid = patch.centroid;
    for (int row = 0; row < 3; ++row) {
        Eigen::Vector3d v = es.eigenvectors().col(2 - row);  // descending
        int dominant = 0;
        for (int c = 1; c < 3; ++c)
            if (std::abs(v[c]) > std::abs(v[dominant])) dominant = c;
        if (v[dominant] < 0.0) v = -v;
        frame.forward.row(row) = v.transpose();
    }
    if (frame.forward.determinant() < 0.0)
        frame.forward.row(2) = -frame.forward.row(2);
    return frame;
}

/// A patch expressed in canonical coordinates, plus the canonical position
/// of its central point (relative to the patch centroid).
struct CanonicalPatch {
    Eigen::Matrix3Xd matrix;
    Eigen::Vector3d source_center_canonical = Eigen::Vector3d::Zero();
};

inline CanonicalPatch map_to_canonical(const EigenFrame& frame,
                                       const Patch& patch) {
    CanonicalPatch c;
    c.matrix = frame.forward * patch.matrix;
    c.source_center_canonical = frame.forward * patch.center_offset();
    return c;
}

/// Column indices per quadrant. Quadrant bit layout: bit0 = x < 0,
/// bit1 = y < 0, bit2 = z < 0; a zero coordinate counts as positive.
inline std::array<std::vector<int>, 8> quadrant_split(
    const Eigen::Matrix3Xd& m) {
    std::array<std::vector<int>, 8> quadrants;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
        int q = (m(0, col) < 0.0 ? 1 : 0) | (m(1, col) < 0.0 ? 2 : 0) |
                (m(2, col) < 0.0 ? 4 : 0);
        quadrants[q].push_back(static_cast<int>(col));
    }
    return quadrants;
}

/// Dominant principal direction of a sub-patch (unit norm), about the
/// sub-patch mean. Absent when fewer than 3 points.
inline std::optional<Eigen::Vector3d> sub_axis(const Eigen::Matrix3Xd& m,
                                               const std::vector<int>& cols) {
    if (cols.size() < 3) return std::nullopt;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int c : cols) mean += m.col(c);
    mean /= static_cast<double>(cols.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int c : cols) {
        Eigen::Vector3d d = m.col(c) - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    return es.eigenvectors().col(2);  // largest eigenvalue
}

using QuadrantAxes = std::array<std::optional<Eigen::Vector3d>, 8>;

inline QuadrantAxes quadrant_axes(const Eigen::Matrix3Xd& m) {
    auto quadrants = quadrant_split(m);
    QuadrantAxes axes;
    for (int q = 0; q < 8; ++q) axes[q] = sub_axis(m, quadrants[q]);
    return axes;
}

/// Flip-alignment offset: sum over quadrants where both sub-axes exist of
/// min(|a - b|, |a + b|). Sign-insensitive by construction.
inline double alignment_offset(const QuadrantAxes& candidate,
                               const QuadrantAxes& reference) {
    double sigma = 0.0;
    for (int q = 0; q < 8; ++q) {
        if (!candidate[q] || !reference[q]) continue;
        const Eigen::Vector3d& a = *candidate[q];
        const Eigen::Vector3d& b = *reference[q];
        sigma += std::min((a - b).norm(), (a + b).norm());
    }
    return sigma;
}

inline double alignment_offset(const CanonicalPatch& candidate,
                               const CanonicalPatch& reference) {
    return alignment_offset(quadrant_axes(candidate.matrix),
                            quadrant_axes(reference.matrix));
}

using FlipSigns = std::array<int, 3>;

/// Candidate enumeration order; identity first, then lexicographic with
/// +1 before -1. Used as the tie-break order in best_flip.
inline const std::array<FlipSigns, 8>& flip_enumeration() {
    static const std::array<FlipSigns, 8> order = {{{+1, +1, +1},
                                                    {+1, +1, -1},
                                                    {+1, -1, +1},
                                                    {+1, -1, -1},
                                                    {-1, +1, +1},
                                                    {-1, +1, -1},
                                                    {-1, -1, +1},
                                                    {-1, -1, -1}}};
    return order;
}

struct FlipVariant {
    FlipSigns flip_signs{+1, +1, +1};
    CanonicalPatch patch;
    double offset = 0.0;
};

inline CanonicalPatch apply_flip(const CanonicalPatch& c,
                                 const FlipSigns& signs) {
    CanonicalPatch out = c;
    for (int axis = 0; axis < 3; ++axis) {
        if (signs[axis] < 0) {
            out.matrix.row(axis) = -out.matrix.row(axis);
            out.source_center_canonical[axis] =
                -out.source_center_canonical[axis];
        }
    }
    return out;
}

/// Among the 8 axis flips of o, the one whose quadrant sub-axes best match
/// the reference patch. Ties go to the earliest flip in flip_enumeration().
inline FlipVariant best_flip(const CanonicalPatch& o,
                             const CanonicalPatch& reference) {
    QuadrantAxes ref_axes = quadrant_axes(reference.matrix);
    FlipVariant best;
    bool first = true;
    for (const FlipSigns& signs : flip_enumeration()) {
        CanonicalPatch flipped = apply_flip(o, signs);
        double sigma = alignment_offset(quadrant_axes(flipped.matrix),
                                        ref_axes);
        if (first || sigma < best.offset) {
            best.flip_signs = signs;
            best.patch = std::move(flipped);
            best.offset = sigma;
            first = false;
        }
    }
    return best;
}

/// Per-point cache for the position-update step: the canonical central
/// point and the quadrant sub-axes of the point's canonical patch. Flip
/// variants are derived from these instead of re-splitting the patch:
/// flipping by signs s sends quadrant q to q XOR mask(s) and each sub-axis
/// v to diag(s) v. Identical to the explicit route except for points with
/// exactly-zero canonical coordinates (measure zero on noisy data).
struct AlignmentCache {
    Eigen::Vector3d center_canonical = Eigen::Vector3d::Zero();
    QuadrantAxes axes;
};

inline AlignmentCache make_alignment_cache(const CanonicalPatch& c) {
    return AlignmentCache{c.source_center_canonical,
                          quadrant_axes(c.matrix)};
}

/// Best flip of a cached member patch against reference axes; returns the
/// flip signs and the minimal offset.
inline std::pair<FlipSigns, double> best_flip_cached(
    const AlignmentCache& member, const QuadrantAxes& ref_axes) {
    FlipSigns best_signs{+1, +1, +1};
    double best_sigma = 0.0;
    bool first = true;
    for (const FlipSigns& signs : flip_enumeration()) {
        int mask = (signs[0] < 0 ? 1 : 0) | (signs[1] < 0 ? 2 : 0) |
                   (signs[2] < 0 ? 4 : 0);
        double sigma = 0.0;
        for (int q = 0; q < 8; ++q) {
            const auto& axis = member.axes[q ^ mask];
            if (!axis || !ref_axes[q]) continue;
            Eigen::Vector3d a = *axis;
            for (int i = 0; i < 3; ++i)
                if (signs[i] < 0) a[i] = -a[i];
            const Eigen::Vector3d& b = *ref_axes[q];
            sigma += std::min((a - b).norm(), (a + b).norm());
        }
        if (first || sigma < best_sigma) {
            best_signs = signs;
            best_sigma = sigma;
            first = false;
        }
    }
    return {best_signs, best_sigma};
}

/// New position for the query's central point: map every similar patch into
/// its own canonical frame, flip-align it against the query's canonical
/// patch, average the canonical central points, and map the mean back
/// through the query frame.
inline Eigen::Vector3d update_center(const PointCloud& cloud,
                                     const KdTree& index, int k,
                                     const Patch& query,
                                     const EigenFrame& query_frame,
                                     const SimilarSet& similar) {
    CanonicalPatch query_canonical = map_to_canonical(query_frame, query);
    QuadrantAxes ref_axes = quadrant_axes(query_canonical.matrix);

    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int j : similar.member_indices) {
        Patch member = extract_patch(cloud, j, k, index);
        EigenFrame frame = eigen_frame(member);
        CanonicalPatch canonical = map_to_canonical(frame, member);
        QuadrantAxes member_axes = quadrant_axes(canonical.matrix);

        FlipSigns best_signs{+1, +1, +1};
        double best_sigma = 0.0;
        bool first = true;
        for (const FlipSigns& signs : flip_enumeration()) {
            CanonicalPatch flipped = apply_flip(canonical, signs);
            double sigma =
                alignment_offset(quadrant_axes(flipped.matrix), ref_axes);
            if (first || sigma < best_sigma) {
                best_signs = signs;
                best_sigma = sigma;
                first = false;
            }
        }
        Eigen::Vector3d center = canonical.source_center_canonical;
        for (int i = 0; i < 3; ++i)
            if (best_signs[i] < 0) center[i] = -center[i];
        sum += center;
    }
    Eigen::Vector3d mean =
        sum / static_cast<double>(similar.member_indices.size());
    return query_frame.inverse() * mean + query_frame.centroid;
}

}  // namespace nlpf

#endif
