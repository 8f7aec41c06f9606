#pragma once

#include <string>
#include <vector>

#include "hetres/common.hpp"
#include "hetres/stimgen.hpp"

namespace hetres::tasks {

// One task: relay component k (1-based), shifted by delta, raised to the
// d-th power: y(t) = u_k(t + delta)^d.
struct TaskSpec {
    Index k = 1;
    double delta = 0.0;
    int d = 1;
};

struct GridDescriptor {
    std::vector<Index> k_set;
    std::vector<int> d_set;
    Index delta_count = 0;
    double delta_lo = 0.0;
    double delta_hi = 0.0;
};

struct TaskSet {
    std::vector<TaskSpec> tasks;
    GridDescriptor grid;
    Index size() const { return static_cast<Index>(tasks.size()); }
};

struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    Index count = 0;
    double time(Index i) const { return t0 + dt * static_cast<double>(i); }
};

// Cartesian product k_set x d_set x linspace(delta_lo, delta_hi, delta_count),
// ordered k-major, then d, then delta.
TaskSet generate_task_grid(const std::vector<Index>& k_set,
                           const std::vector<int>& d_set, Index delta_count,
                           double delta_lo, double delta_hi);

// The paper-default grid: k in {1..K}, d in {1..6}, 49 shifts in [-2, 2];
// 882 tasks at K = 3.
TaskSet default_task_grid(Index K = 3);

// Integer power by repeated multiplication (d is small); shared with the
// batched evaluation so oracles can reproduce results bit for bit.
inline double int_pow(double x, int d) {
    double r = 1.0;
    for (int i = 0; i < d; ++i) r *= x;
    return r;
}

// y(t) = sample(stim, t + delta, k-1)^d over the grid. Throws IndexError for
// k outside [1, K].
VectorXd eval_task(const TaskSpec& spec, const stim::Stimulus& stimulus,
                   const TimeGrid& grid);

// Cosine dissimilarity to the pure-relay reference y0(t) = u_k(t):
// C = 1 - |<y, y0>| / (|y| |y0|). Identical series short-circuit to exactly
// 0 (the Cauchy-Schwarz equality case). Zero-norm series are an error.
double complexity(const TaskSpec& spec, const stim::Stimulus& stimulus,
                  const TimeGrid& grid);

// From precomputed raw dots; the streaming pipeline accumulates these.
double complexity_from_dots(double dot_ab, double dot_aa, double dot_bb);

// Cosine of the angle between mean-subtracted series.
double similarity(const VectorXd& a, const VectorXd& b);

enum class Tier { easy, medium, hard };

// Three equal-width complexity intervals; boundaries belong to the upper
// tier.
Tier complexity_tier(double C);
std::string to_string(Tier t);

}  // namespace hetres::tasks
