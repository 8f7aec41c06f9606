#include "hetres/readout.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hetres/rng.hpp"

namespace hetres::readout {

SplitPlan plan_splits(Index N, double dt, double tau_y, double tau_u, Index trials) {
    require(N >= 1, "plan_splits: N must be >= 1");
    require(dt > 0.0, "plan_splits: dt must be positive");
    require(tau_y > 0.0 && tau_u > 0.0, "plan_splits: timescales must be positive");
    require(trials >= 1, "plan_splits: trials must be >= 1");

    SplitPlan p;
    p.N = N;
    p.dt = dt;
    p.tau_y = tau_y;
    p.tau_u = tau_u;
    p.trials = trials;
    p.n_train = static_cast<Index>(
        std::llround(static_cast<double>(N + 1) * 20.0 * tau_y / dt));
    p.n_test = static_cast<Index>(std::llround(10.0 * tau_y / dt));
    p.margin = static_cast<Index>(std::llround(2.0 * tau_u / dt));
    p.l_train = p.n_train + 2 * p.margin;
    p.l_test = p.n_test + 2 * p.margin;
    return p;
}

std::vector<Index> shuffled_indices(Index n, std::uint64_t seed) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    rng::Stream rs(seed);
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rs.next_u64() %
                                          static_cast<std::uint64_t>(i + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

Dataset build_dataset(const dyn::StateMatrix& X, const MatrixXd& Y,
                      const SplitPlan& plan, std::uint64_t shuffle_seed) {
    const Index L = X.steps();
    if (Y.cols() != L)
        throw AlignmentError("build_dataset: states and targets on different grids");
    if (plan.total_steps() > L)
        throw InsufficientDataError("build_dataset: simulated run shorter than the plan");

    const Index N = X.N();
    const Index T = Y.rows();
    Dataset ds;
    ds.X_train.resize(N + 1, plan.trials * plan.n_train);
    ds.Y_train.resize(T, plan.trials * plan.n_train);
    ds.X_test.resize(N + 1, plan.n_test);
    ds.Y_test.resize(T, plan.n_test);

    for (Index r = 0; r < plan.trials; ++r) {
        const Index src = plan.train_start(r);
        const Index dst = r * plan.n_train;
        const auto perm = shuffled_indices(plan.n_train,
                                           rng::mix64(shuffle_seed + static_cast<std::uint64_t>(r)));
        for (Index c = 0; c < plan.n_train; ++c) {
            const Index s = src + perm[static_cast<std::size_t>(c)];
            ds.X_train.col(dst + c).head(N) = X.X.col(s);
            ds.X_train(N, dst + c) = 1.0;
            ds.Y_train.col(dst + c) = Y.col(s);
        }
    }
    const Index ts = plan.test_start();
    const auto perm = shuffled_indices(plan.n_test, rng::mix64(shuffle_seed + 0x7e57ULL));
    for (Index c = 0; c < plan.n_test; ++c) {
        const Index s = ts + perm[static_cast<std::size_t>(c)];
        ds.X_test.col(c).head(N) = X.X.col(s);
        ds.X_test(N, c) = 1.0;
        ds.Y_test.col(c) = Y.col(s);
    }
    return ds;
}

VectorXd ridge_solve(const MatrixXd& G, const VectorXd& b, double lambda,
                     bool* used_fallback) {
    require(G.rows() == G.cols() && G.rows() == b.size(), "ridge_solve: shape mismatch");
    MatrixXd A = G;
    A.diagonal().array() += lambda;

    Eigen::LDLT<MatrixXd> ldlt(A);
    if (used_fallback) *used_fallback = false;
    if (ldlt.info() == Eigen::Success) {
        VectorXd beta = ldlt.solve(b);
        if (beta.allFinite()) return beta;
    }
    // Ill-conditioned Gram: solve through the eigendecomposition, dropping
    // numerically zero directions.
    if (used_fallback) *used_fallback = true;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(A);
    const VectorXd& ev = eig.eigenvalues();
    const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-14;
    VectorXd inv = ev;
    for (Index i = 0; i < inv.size(); ++i)
        inv[i] = std::abs(ev[i]) > cutoff ? 1.0 / ev[i] : 0.0;
    return eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * b));
}

Readout fit_ridge(const MatrixXd& X_train, const VectorXd& y_train, double lambda) {
    require(X_train.cols() == y_train.size(), "fit_ridge: sample count mismatch");
    require(X_train.cols() > X_train.rows(),
            "fit_ridge: need more samples than regressors");
    require(lambda > 0.0, "fit_ridge: lambda must be positive");

    const Index n = X_train.rows();
    MatrixXd G(n, n);
    G.setZero();
    G.selfadjointView<Eigen::Lower>().rankUpdate(X_train);
    G.triangularView<Eigen::Upper>() = G.transpose();

    Readout ro;
    ro.lambda = lambda;
    ro.beta = ridge_solve(G, X_train * y_train, lambda, &ro.used_fallback);
    return ro;
}

double score(const Readout& ro, const MatrixXd& X_test, const VectorXd& y_test) {
    require(X_test.rows() == ro.beta.size(), "score: readout/state size mismatch");
    require(X_test.cols() == y_test.size(), "score: sample count mismatch");

    const double mean = y_test.mean();
    const double sst = (y_test.array() - mean).square().sum();
    if (sst <= 0.0)
        throw UndefinedScoreError("score: constant test target");
    const VectorXd pred = X_test.transpose() * ro.beta;
    const double sse = (y_test - pred).squaredNorm();
    return 1.0 - sse / sst;
}

ScoreRecord multi_trial_score(const dyn::StateMatrix& X, const VectorXd& y_full,
                              const SplitPlan& plan, std::uint64_t shuffle_seed,
                              double lambda, const tasks::TaskSpec& task) {
    MatrixXd Y(1, y_full.size());
    Y.row(0) = y_full.transpose();
    const Dataset ds = build_dataset(X, Y, plan, shuffle_seed);

    ScoreRecord rec;
    rec.task = task;
    for (Index r = 0; r < plan.trials; ++r) {
        const auto Xr = ds.X_train.middleCols(r * plan.n_train, plan.n_train);
        const VectorXd yr = ds.Y_train.row(0).segment(r * plan.n_train, plan.n_train);
        const Readout ro = fit_ridge(Xr, yr, lambda);
        rec.trial_scores.push_back(score(ro, ds.X_test, ds.Y_test.row(0).transpose()));
    }
    double sum = 0.0;
    for (double s : rec.trial_scores) sum += s;
    rec.mean = sum / static_cast<double>(rec.trial_scores.size());
    double var = 0.0;
    for (double s : rec.trial_scores) var += (s - rec.mean) * (s - rec.mean);
    rec.stddev = std::sqrt(var / static_cast<double>(rec.trial_scores.size()));
    return rec;
}

}  // namespace hetres::readout
