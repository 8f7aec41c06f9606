#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetres/common.hpp"
#include "hetres/dynamics.hpp"
#include "hetres/taskbench.hpp"

namespace hetres::readout {

// Train/test layout of one simulated run, per the subset-length rules:
// per-trial training samples span 20 oscillations of tau_y scaled by (N+1),
// the test set spans 10, and every region carries a 2*tau_u margin on each
// side for the +-2*tau_u task horizon. Trials occupy consecutive
// non-overlapping regions, followed by the test block.
struct SplitPlan {
    Index N = 0;
    double dt = 0.0;
    double tau_y = 1.0;
    double tau_u = 1.0;
    Index trials = 3;

    Index n_train = 0;  // usable central samples per trial
    Index n_test = 0;
    Index margin = 0;   // 2*tau_u/dt, one side
    Index l_train = 0;  // single-trial subset length: n_train + 2*margin
    Index l_test = 0;   // n_test + 2*margin

    Index train_start(Index trial) const { return margin + trial * n_train; }
    Index test_start() const { return 3 * margin + trials * n_train; }
    Index total_steps() const { return 4 * margin + trials * n_train + n_test; }
};

SplitPlan plan_splits(Index N, double dt, double tau_y = 1.0, double tau_u = 1.0,
                      Index trials = 3);

struct Readout {
    VectorXd beta;  // N+1 weights, intercept last
    double lambda = 0.0;
    bool used_fallback = false;  // eigendecomposition instead of LDLT
};

struct ScoreRecord {
    tasks::TaskSpec task;
    std::vector<double> trial_scores;
    double mean = 0.0;
    double stddev = 0.0;
    std::string network_id;
};

// Deterministic Fisher-Yates permutation of [0, n).
std::vector<Index> shuffled_indices(Index n, std::uint64_t seed);

struct Dataset {
    MatrixXd X_train;  // (N+1) x (trials*n_train), trial-major, shuffled per trial
    MatrixXd Y_train;  // tasks x (trials*n_train)
    MatrixXd X_test;   // (N+1) x n_test
    MatrixXd Y_test;   // tasks x n_test
};

// Extracts the central samples of every region, appends the constant
// intercept row to the states, and applies the same per-trial shuffle to
// states and targets. Y holds one row per task on the same grid as X.
Dataset build_dataset(const dyn::StateMatrix& X, const MatrixXd& Y,
                      const SplitPlan& plan, std::uint64_t shuffle_seed);

// Solves (G + lambda*I) beta = b by LDLT; falls back to an eigendecomposition
// solve when the factorization fails or returns non-finite values.
VectorXd ridge_solve(const MatrixXd& G, const VectorXd& b, double lambda,
                     bool* used_fallback = nullptr);

// Closed-form ridge fit beta = (X X^T + lambda I)^(-1) X y on an augmented
// state matrix (constant row included by the caller).
Readout fit_ridge(const MatrixXd& X_train, const VectorXd& y_train,
                  double lambda = 1e-6);

// Coefficient of determination on a test set; 1 is perfect, 0 is predicting
// the test mean. Throws UndefinedScoreError for a constant target.
double score(const Readout& ro, const MatrixXd& X_test, const VectorXd& y_test);

// One readout per training trial, all evaluated on the shared test set.
ScoreRecord multi_trial_score(const dyn::StateMatrix& X, const VectorXd& y_full,
                              const SplitPlan& plan, std::uint64_t shuffle_seed,
                              double lambda = 1e-6,
                              const tasks::TaskSpec& task = {});

}  // namespace hetres::readout
