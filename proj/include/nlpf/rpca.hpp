#ifndef NLPF_RPCA_HPP
#define NLPF_RPCA_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace nlpf {

/// Element-wise soft-thresholding: sign(x) * max(|x| - tau, 0).
inline double shrink(double x, double tau) {
    double m = std::abs(x) - tau;
    return m > 0.0 ? (x < 0.0 ? -m : m) : 0.0;
}

/// Singular value thresholding: SVD, soft-threshold the singular values,
/// reconstruct. Singular subspaces are preserved.
inline Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double tau) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = shrink(sv[i], tau);
    return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

/// Solver parameters for the low-rank + sparse decomposition. A lambda or
/// mu of zero means "derive from the input": lambda = 1/sqrt(max(3, K)),
/// mu = 3K / (4 |M|_1). mu is multiplied by mu_growth after each
/// iteration; a fixed penalty stalls above tol on near-low-rank patches,
/// while growth much faster than ~1.05 freezes the iterates before they
/// reach the optimum.
struct RpcaParams {
    double lambda = 0.0;
    double mu = 0.0;
    double mu_growth = 1.05;
    double tol = 1e-7;
    int max_iter = 500;
};

struct Decomposition {
    Eigen::Matrix3Xd low_rank;
    Eigen::Matrix3Xd sparse;
    bool converged = false;
    int iterations = 0;
};

/// Decompose a 3xK patch matrix into low-rank L plus sparse S by the
/// augmented Lagrange multiplier iteration:
///   L <- D_{1/mu}(M - S + Y/mu)
///   S <- S_{lambda/mu}(M - L + Y/mu)
///   Y <- Y + mu (M - L - S)
/// starting from S = Y = 0, until |M - L - S|_F <= tol |M|_F.
inline Decomposition decompose(const Eigen::Matrix3Xd& m,
                               const RpcaParams& params = {}) {
    if (!m.allFinite()) throw std::invalid_argument("non-finite input");
    if (params.tol <= 0.0 || params.max_iter < 1 || params.lambda < 0.0 ||
        params.mu < 0.0 || params.mu_growth < 1.0)
        throw std::invalid_argument("invalid rpca parameters");

    const Eigen::Index k = m.cols();
    Decomposition d;
    d.low_rank = Eigen::Matrix3Xd::Zero(3, k);
    d.sparse = Eigen::Matrix3Xd::Zero(3, k);

    double norm_m = m.norm();
    if (norm_m == 0.0) {
        d.converged = true;
        return d;
    }

    double lambda = params.lambda > 0.0
                        ? params.lambda
                        : 1.0 / std::sqrt(std::max<double>(3.0, double(k)));
    double mu = params.mu > 0.0
                    ? params.mu
                    : (3.0 * double(k)) / (4.0 * m.cwiseAbs().sum());

    Eigen::Matrix3Xd low = d.low_rank;
    Eigen::Matrix3Xd sparse = d.sparse;
    Eigen::Matrix3Xd dual = Eigen::Matrix3Xd::Zero(3, k);

    for (int it = 1; it <= params.max_iter; ++it) {
        low = svt(m - sparse + dual / mu, 1.0 / mu);
        Eigen::Matrix3Xd target = m - low + dual / mu;
        double tau = lambda / mu;
        sparse = target.unaryExpr([tau](double x) { return shrink(x, tau); });
        Eigen::Matrix3Xd residual = m - low - sparse;
        dual += mu * residual;
        d.iterations = it;
        if (residual.norm() <= params.tol * norm_m) {
            d.converged = true;
            break;
        }
        mu *= params.mu_growth;
    }
    d.low_rank = low;
    d.sparse = sparse;
    return d;
}

/// The three singular values of L, sorted nonincreasing. Computed from the
/// 3x3 Gram matrix L L^T; exact for 3-row matrices and cheaper than a full
/// SVD.
inline Eigen::Vector3d singular_value_descriptor(const Eigen::Matrix3Xd& l) {
    if (!l.allFinite()) throw std::invalid_argument("non-finite input");
    Eigen::Matrix3d gram = l * l.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram);
    Eigen::Vector3d ev = es.eigenvalues();  // ascending
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i)
        out[i] = std::sqrt(std::max(ev[2 - i], 0.0));
    return out;
}

}  // namespace nlpf

#endif
