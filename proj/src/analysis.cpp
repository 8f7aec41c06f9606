#include "hetres/analysis.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace hetres::analysis {

namespace {

// Eigenvalues/vectors of the centered scatter matrix Xc*Xc^T, descending.
void centered_spectrum(const MatrixXd& X, MatrixXd& Xc, VectorXd& lambda,
                       MatrixXd& U) {
    Xc = X.colwise() - X.rowwise().mean();
    MatrixXd S(X.rows(), X.rows());
    S.setZero();
    S.selfadjointView<Eigen::Lower>().rankUpdate(Xc);
    S.triangularView<Eigen::Upper>() = S.transpose();

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
    const Index n = X.rows();
    lambda.resize(n);
    U.resize(n, n);
    for (Index i = 0; i < n; ++i) {  // ascending -> descending
        lambda[i] = std::max(0.0, eig.eigenvalues()[n - 1 - i]);
        U.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
}

}  // namespace

Decorrelated decorrelate_state(const MatrixXd& X, double variance_target) {
    require(X.rows() >= 1 && X.cols() >= 2, "decorrelate_state: degenerate shape");
    require(variance_target > 0.0 && variance_target <= 1.0,
            "decorrelate_state: variance target outside (0,1]");

    MatrixXd Xc, U;
    VectorXd lambda;
    centered_spectrum(X, Xc, lambda, U);
    const double total = lambda.sum();
    if (total <= 0.0)
        throw DegenerateStateError("decorrelate_state: zero-variance state");

    Index retained = 0;
    double cum = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) {
        cum += lambda[i];
        ++retained;
        if (cum >= variance_target * total) break;
    }

    // Fix component signs by making the largest-magnitude loading positive,
    // so serialized decompositions are reproducible.
    for (Index i = 0; i < retained; ++i) {
        Index arg = 0;
        U.col(i).cwiseAbs().maxCoeff(&arg);
        if (U(arg, i) < 0.0) U.col(i) = -U.col(i);
    }

    Decorrelated out;
    out.components = U.leftCols(retained).transpose() * Xc;
    out.norms.resize(retained);
    for (Index i = 0; i < retained; ++i) out.norms[i] = out.components.row(i).norm();
    out.retained = retained;
    out.variance_captured = cum / total;
    return out;
}

double task_state_overlap(const VectorXd& y, const Decorrelated& comps) {
    require(y.size() == comps.components.cols(),
            "task_state_overlap: grid length mismatch");
    const VectorXd yc = y.array() - y.mean();
    const double ny = yc.norm();
    if (ny <= 0.0)
        throw UndefinedOverlapError("task_state_overlap: constant target");

    double overlap = 0.0;
    for (Index i = 0; i < comps.retained; ++i) {
        const double nc = comps.norms[i];
        if (nc <= 0.0) continue;
        const double c = comps.components.row(i).dot(yc) / (nc * ny);
        overlap += c * c;
    }
    return overlap;
}

double participation_ratio(const MatrixXd& X) {
    require(X.rows() >= 1 && X.cols() >= 2, "participation_ratio: degenerate shape");
    MatrixXd Xc, U;
    VectorXd lambda;
    centered_spectrum(X, Xc, lambda, U);
    const double s2 = lambda.sum();        // sum of sigma^2
    const double s4 = lambda.squaredNorm();  // sum of sigma^4
    if (s2 <= 0.0 || s4 <= 0.0)
        throw DegenerateStateError("participation_ratio: zero state");
    return s2 * s2 / s4;
}

}  // namespace hetres::analysis
