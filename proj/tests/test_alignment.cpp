#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nlpf/alignment.hpp"
#include "nlpf/kdtree.hpp"
#include "nlpf/patch.hpp"
#include "support/shapes.hpp"

using Eigen::Matrix3Xd;
using Eigen::Vector3d;
using nlpf::CanonicalPatch;
using nlpf::FlipSigns;
using nlpf::Patch;
using nlpf::PointCloud;

namespace {

Patch make_patch(const Matrix3Xd& centered,
                 const Vector3d& centroid = Vector3d::Zero(),
                 int center_column = 0) {
    Patch p;
    p.center_index = 0;
    p.neighbor_indices.resize(centered.cols());
    p.centroid = centroid;
    p.matrix = centered;
    p.center_column = center_column;
    return p;
}

Matrix3Xd random_centered(int k, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix3Xd m(3, k);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < k; ++c) m(r, c) = g(rng);
    m.colwise() -= m.rowwise().mean();
    return m;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a(r, c) = g(rng);
    Eigen::Matrix3d q = Eigen::HouseholderQR<Eigen::Matrix3d>(a).householderQ();
    if (q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
}

// A patch with >= points_per_quadrant points strictly inside every open
// quadrant, each quadrant carrying its own elongation direction. Asymmetric
// under every non-identity axis flip with overwhelming probability.
CanonicalPatch planted_asymmetric_patch(std::mt19937_64& rng,
                                        int points_per_quadrant = 5) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    Matrix3Xd m(3, 8 * points_per_quadrant);
    int col = 0;
    for (int q = 0; q < 8; ++q) {
        Vector3d base(q & 1 ? -0.5 : 0.5, q & 2 ? -0.5 : 0.5,
                      q & 4 ? -0.5 : 0.5);
        Vector3d dir(g(rng), g(rng), g(rng));
        dir.normalize();
        for (int i = 0; i < points_per_quadrant; ++i) {
            double t = 0.25 * (double(i) / (points_per_quadrant - 1) - 0.5);
            Vector3d p = base + t * dir +
                         Vector3d(jitter(rng), jitter(rng), jitter(rng));
            m.col(col++) = p;
        }
    }
    CanonicalPatch c;
    c.matrix = m;
    c.source_center_canonical = Vector3d(0.1, -0.2, 0.05);
    return c;
}

}  // namespace

TEST_CASE("eigen_frame of a planar patch has z as third axis") {
    std::mt19937_64 rng(1);
    Matrix3Xd m = random_centered(40, rng);
    m.row(2).setZero();
    auto frame = nlpf::eigen_frame(make_patch(m));
    CHECK(std::abs(frame.forward(2, 2)) == doctest::Approx(1.0));
    CHECK(std::abs(frame.forward(2, 0)) < 1e-10);
    CHECK(std::abs(frame.forward(2, 1)) < 1e-10);
}

TEST_CASE("eigen_frame diagonalizes the patch covariance") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix3Xd m = random_centered(30, rng);
        auto frame = nlpf::eigen_frame(make_patch(m));
        Matrix3Xd mapped = frame.forward * m;
        Eigen::Matrix3d cov = mapped * mapped.transpose();
        double off = std::abs(cov(0, 1)) + std::abs(cov(0, 2)) +
                     std::abs(cov(1, 2));
        CHECK(off <= 1e-8 * cov.trace());
        // Eigenvalue-descending rows.
        CHECK(cov(0, 0) >= cov(1, 1) - 1e-9 * cov.trace());
        CHECK(cov(1, 1) >= cov(2, 2) - 1e-9 * cov.trace());
    }
}

TEST_CASE("eigen_frame orthogonality and determinant sweep") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix3Xd m = random_centered(12, rng);
        auto frame = nlpf::eigen_frame(make_patch(m));
        CHECK((frame.forward * frame.inverse() -
               Eigen::Matrix3d::Identity()).norm() <= 1e-10);
        CHECK(frame.forward.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("map_to_canonical identity frame and round trip") {
    std::mt19937_64 rng(4);
    Matrix3Xd m = random_centered(20, rng);
    Patch patch = make_patch(m, Vector3d(1, 2, 3), 2);

    nlpf::EigenFrame identity;
    identity.centroid = patch.centroid;
    auto c = nlpf::map_to_canonical(identity, patch);
    CHECK((c.matrix - m).norm() == 0.0);

    auto frame = nlpf::eigen_frame(patch);
    auto canonical = nlpf::map_to_canonical(frame, patch);
    Matrix3Xd back = frame.inverse() * canonical.matrix;
    CHECK((back - m).norm() <= 1e-10 * m.norm());
    Vector3d center_back = frame.inverse() * canonical.source_center_canonical;
    CHECK((center_back - patch.center_offset()).norm() <= 1e-10);
}

TEST_CASE("rotated copy maps to canonical coordinates up to axis flips") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix3Xd m = random_centered(25, rng);
        Patch a = make_patch(m);
        Patch b = make_patch(random_rotation(rng) * m);
        auto ca = nlpf::map_to_canonical(nlpf::eigen_frame(a), a);
        auto cb = nlpf::map_to_canonical(nlpf::eigen_frame(b), b);
        double best = std::numeric_limits<double>::infinity();
        for (const FlipSigns& signs : nlpf::flip_enumeration()) {
            auto flipped = nlpf::apply_flip(cb, signs);
            best = std::min(best, (flipped.matrix - ca.matrix).norm());
        }
        CHECK(best <= 1e-6 * m.norm());
    }
}

TEST_CASE("quadrant_split canonical placements") {
    Matrix3Xd m(3, 8);
    for (int q = 0; q < 8; ++q)
        m.col(q) = Vector3d(q & 1 ? -1 : 1, q & 2 ? -1 : 1, q & 4 ? -1 : 1);
    auto quads = nlpf::quadrant_split(m);
    for (int q = 0; q < 8; ++q) {
        REQUIRE(quads[q].size() == 1);
        CHECK(quads[q][0] == q);
    }

    Matrix3Xd pos = Matrix3Xd::Ones(3, 6);
    auto only = nlpf::quadrant_split(pos);
    CHECK(only[0].size() == 6);
    for (int q = 1; q < 8; ++q) CHECK(only[q].empty());
}

TEST_CASE("quadrant_split partitions all columns, zeros count positive") {
    std::mt19937_64 rng(6);
    Matrix3Xd m = random_centered(40, rng);
    m(0, 3) = 0.0;
    m(2, 7) = 0.0;
    auto quads = nlpf::quadrant_split(m);
    std::vector<bool> seen(40, false);
    for (int q = 0; q < 8; ++q)
        for (int c : quads[q]) {
            CHECK_FALSE(seen[c]);
            seen[c] = true;
        }
    for (bool s : seen) CHECK(s);
    // Zero x goes to the positive-x side.
    bool found = false;
    for (int q = 0; q < 8; ++q)
        for (int c : quads[q])
            if (c == 3) {
                CHECK((q & 1) == 0);
                found = true;
            }
    CHECK(found);
}

TEST_CASE("sub_axis line, under-determined, oracle") {
    Matrix3Xd line(3, 5);
    for (int i = 0; i < 5; ++i) line.col(i) = Vector3d(double(i), 0, 0);
    auto axis = nlpf::sub_axis(line, {0, 1, 2, 3, 4});
    REQUIRE(axis.has_value());
    CHECK(std::abs(std::abs((*axis)[0]) - 1.0) < 1e-12);

    CHECK_FALSE(nlpf::sub_axis(line, {0, 1}).has_value());
    CHECK_FALSE(nlpf::sub_axis(line, {}).has_value());

    std::mt19937_64 rng(7);
    Matrix3Xd m = random_centered(12, rng);
    std::vector<int> all(12);
    std::iota(all.begin(), all.end(), 0);
    auto got = nlpf::sub_axis(m, all);
    REQUIRE(got.has_value());
    // Oracle: dominant eigenvector of the centered covariance.
    Vector3d mean = m.rowwise().mean();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int c = 0; c < 12; ++c) {
        Vector3d d = m.col(c) - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Vector3d expected = es.eigenvectors().col(2);
    double align = std::abs(got->dot(expected));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("alignment_offset identity and sign invariance") {
    std::mt19937_64 rng(8);
    auto ref = planted_asymmetric_patch(rng);
    CHECK(nlpf::alignment_offset(ref, ref) == 0.0);

    auto axes = nlpf::quadrant_axes(ref.matrix);
    nlpf::QuadrantAxes negated = axes;
    for (auto& a : negated)
        if (a) a = -*a;
    CHECK(nlpf::alignment_offset(negated, axes) <= 1e-12);
}

TEST_CASE("alignment_offset is minimal at the true flip") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto ref = planted_asymmetric_patch(rng);
        FlipSigns planted{-1, +1, +1};
        auto flipped = nlpf::apply_flip(ref, planted);
        auto ref_axes = nlpf::quadrant_axes(ref.matrix);
        double at_truth = 0.0;
        double elsewhere = std::numeric_limits<double>::infinity();
        for (const FlipSigns& signs : nlpf::flip_enumeration()) {
            auto candidate = nlpf::apply_flip(flipped, signs);
            double sigma = nlpf::alignment_offset(
                nlpf::quadrant_axes(candidate.matrix), ref_axes);
            if (signs == planted)
                at_truth = sigma;
            else
                elsewhere = std::min(elsewhere, sigma);
        }
        CHECK(at_truth <= elsewhere);
    }
}

TEST_CASE("best_flip identity, planted recovery, tie rule, idempotence") {
    std::mt19937_64 rng(10);
    auto ref = planted_asymmetric_patch(rng);

    auto self = nlpf::best_flip(ref, ref);
    CHECK(self.flip_signs == FlipSigns{+1, +1, +1});
    CHECK(self.offset == 0.0);

    for (const FlipSigns& planted : nlpf::flip_enumeration()) {
        auto moved = nlpf::apply_flip(ref, planted);
        auto recovered = nlpf::best_flip(moved, ref);
        CHECK(recovered.flip_signs == planted);  // flips are involutions
        CHECK((recovered.patch.matrix - ref.matrix).norm() <= 1e-9);
    }

    // Fully symmetric patch: every sigma equal, identity wins the tie.
    Matrix3Xd sym(3, 24);
    int col = 0;
    for (int q = 0; q < 8; ++q) {
        Vector3d s(q & 1 ? -1 : 1, q & 2 ? -1 : 1, q & 4 ? -1 : 1);
        sym.col(col++) = s.cwiseProduct(Vector3d(0.5, 0.5, 0.5));
        sym.col(col++) = s.cwiseProduct(Vector3d(0.7, 0.5, 0.5));
        sym.col(col++) = s.cwiseProduct(Vector3d(0.5, 0.7, 0.5));
    }
    CanonicalPatch symmetric{sym, Vector3d::Zero()};
    auto tied = nlpf::best_flip(symmetric, symmetric);
    CHECK(tied.flip_signs == FlipSigns{+1, +1, +1});

    // Idempotence.
    auto once = nlpf::best_flip(nlpf::apply_flip(ref, {-1, +1, -1}), ref);
    auto twice = nlpf::best_flip(once.patch, ref);
    CHECK((twice.patch.matrix - once.patch.matrix).norm() == 0.0);
}

TEST_CASE("cached flip search agrees with the explicit route") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto reference = planted_asymmetric_patch(rng);
        auto candidate = planted_asymmetric_patch(rng);
        auto explicit_best = nlpf::best_flip(candidate, reference);
        auto cache = nlpf::make_alignment_cache(candidate);
        auto ref_axes = nlpf::quadrant_axes(reference.matrix);
        auto [signs, sigma] = nlpf::best_flip_cached(cache, ref_axes);
        CHECK(signs == explicit_best.flip_signs);
        CHECK(sigma == doctest::Approx(explicit_best.offset).epsilon(1e-9));
    }
}

TEST_CASE("update_center with self-only set returns the query point") {
    PointCloud cloud = shapes::random_cloud(40, 12);
    nlpf::KdTree index(cloud);
    int k = 10, q = 7;
    auto patch = nlpf::extract_patch(cloud, q, k, index);
    auto frame = nlpf::eigen_frame(patch);
    nlpf::SimilarSet set{q, {q}};
    Vector3d updated = nlpf::update_center(cloud, index, k, patch, frame, set);
    CHECK((updated - cloud[q]).norm() <= 1e-12);
}

TEST_CASE("update_center of two translated copies returns the query point") {
    PointCloud blob = shapes::random_cloud(25, 13);
    PointCloud cloud = blob;
    Vector3d shift(16.0, 0.0, 0.0);
    for (const auto& p : blob) cloud.push_back(p + shift);
    nlpf::KdTree index(cloud);
    int k = 25, q = 4;
    auto patch = nlpf::extract_patch(cloud, q, k, index);
    auto frame = nlpf::eigen_frame(patch);
    nlpf::SimilarSet set{q, {q, q + 25}};
    Vector3d updated = nlpf::update_center(cloud, index, k, patch, frame, set);
    CHECK((updated - cloud[q]).norm() <= 1e-9);
}

TEST_CASE("update_center pulls noisy plane points toward the plane") {
    std::mt19937_64 rng(14);
    PointCloud clean = shapes::flat_plane(2000, 15);
    PointCloud noisy = nlpf::add_gaussian_noise(clean, 0.005, 16);
    nlpf::KdTree index(noisy);
    int k = 30;

    std::uniform_int_distribution<int> pick(0, 1999);
    int improved = 0, trials = 100;
    for (int t = 0; t < trials; ++t) {
        int q = pick(rng);
        nlpf::SimilarSet set{q, {q}};
        while (set.member_indices.size() < 50) {
            int j = pick(rng);
            if (j != q) set.member_indices.push_back(j);
        }
        auto patch = nlpf::extract_patch(noisy, q, k, index);
        auto frame = nlpf::eigen_frame(patch);
        Vector3d updated =
            nlpf::update_center(noisy, index, k, patch, frame, set);
        if (std::abs(updated.z()) < std::abs(noisy[q].z())) ++improved;
    }
    // The update removes most but not all z-noise: the restored patch
    // centroid still carries ~sigma/sqrt(k) of it, so a blanket win is
    // not expected. Chance level would be ~50.
    CHECK(improved >= 75);
}

TEST_CASE("update_center is rigid-motion equivariant") {
    std::mt19937_64 rng(17);
    PointCloud cloud = shapes::ridged_plane(300, 18);
    // Generic noise keeps every patch spectrum non-degenerate.
    cloud = nlpf::add_gaussian_noise(cloud, 0.002, 19);
    Eigen::Matrix3d rot = random_rotation(rng);
    Vector3d shift(0.4, -0.7, 1.1);
    PointCloud moved;
    for (const auto& p : cloud) moved.push_back(rot * p + shift);

    nlpf::KdTree ia(cloud), ib(moved);
    int k = 20;
    nlpf::SimilarSet set{11, {11, 42, 99, 180, 230}};
    auto pa = nlpf::extract_patch(cloud, 11, k, ia);
    auto pb = nlpf::extract_patch(moved, 11, k, ib);
    Vector3d ua = nlpf::update_center(cloud, ia, k, pa,
                                      nlpf::eigen_frame(pa), set);
    Vector3d ub = nlpf::update_center(moved, ib, k, pb,
                                      nlpf::eigen_frame(pb), set);
    CHECK((rot * ua + shift - ub).norm() <= 1e-6);
}
