#pragma once

#include <vector>

#include "hetres/common.hpp"

namespace hetres::analysis {

// Principal-component scores of a (neurons x time) state, rows ordered by
// decreasing variance, mutually orthogonal. `retained` is the smallest
// count capturing at least the variance target.
struct Decorrelated {
    MatrixXd components;  // rows are component time series (already centered)
    VectorXd norms;       // per-row Euclidean norm
    Index retained = 0;
    double variance_captured = 0.0;
};

Decorrelated decorrelate_state(const MatrixXd& X, double variance_target = 0.999);

// Fraction of the mean-subtracted target's energy inside the span of the
// retained components: sum of squared cosines.
double task_state_overlap(const VectorXd& y, const Decorrelated& comps);

// (sum sigma^2)^2 / sum sigma^4 over singular values of the centered state.
double participation_ratio(const MatrixXd& X);

struct AlignmentReport {
    std::vector<double> overlaps;  // per task
    double d_pr = 0.0;
    Index retained = 0;
    double variance_captured = 0.0;
};

}  // namespace hetres::analysis
