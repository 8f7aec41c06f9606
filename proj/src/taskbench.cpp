#include "hetres/taskbench.hpp"

#include <cmath>

namespace hetres::tasks {

TaskSet generate_task_grid(const std::vector<Index>& k_set,
                           const std::vector<int>& d_set, Index delta_count,
                           double delta_lo, double delta_hi) {
    require(!k_set.empty() && !d_set.empty(), "generate_task_grid: empty parameter set");
    require(delta_count >= 1, "generate_task_grid: delta_count must be >= 1");

    TaskSet set;
    set.grid = {k_set, d_set, delta_count, delta_lo, delta_hi};
    set.tasks.reserve(k_set.size() * d_set.size() * static_cast<std::size_t>(delta_count));
    for (Index k : k_set) {
        for (int d : d_set) {
            require(d >= 1, "generate_task_grid: exponents must be >= 1");
            for (Index a = 0; a < delta_count; ++a) {
                const double delta = delta_count == 1
                    ? delta_lo
                    : delta_lo + (delta_hi - delta_lo) * static_cast<double>(a) /
                                     static_cast<double>(delta_count - 1);
                set.tasks.push_back({k, delta, d});
            }
        }
    }
    return set;
}

TaskSet default_task_grid(Index K) {
    std::vector<Index> ks(static_cast<std::size_t>(K));
    for (Index k = 0; k < K; ++k) ks[static_cast<std::size_t>(k)] = k + 1;
    return generate_task_grid(ks, {1, 2, 3, 4, 5, 6}, 49, -2.0, 2.0);
}

VectorXd eval_task(const TaskSpec& spec, const stim::Stimulus& stimulus,
                   const TimeGrid& grid) {
    if (spec.k < 1 || spec.k > stimulus.K())
        throw IndexError("eval_task: component index out of range");
    require(spec.d >= 1, "eval_task: exponent must be >= 1");
    VectorXd y(grid.count);
    for (Index i = 0; i < grid.count; ++i)
        y[i] = int_pow(stim::sample(stimulus, grid.time(i) + spec.delta, spec.k - 1),
                       spec.d);
    return y;
}

double complexity_from_dots(double dot_ab, double dot_aa, double dot_bb) {
    if (dot_aa <= 0.0 || dot_bb <= 0.0)
        throw UndefinedComplexityError("complexity: zero-norm series");
    // Cauchy-Schwarz equality holds only for identical series; return the
    // exact 0 instead of the roundoff of 1 - x/x.
    if (dot_ab == dot_aa && dot_aa == dot_bb) return 0.0;
    return 1.0 - std::abs(dot_ab) / (std::sqrt(dot_aa) * std::sqrt(dot_bb));
}

double complexity(const TaskSpec& spec, const stim::Stimulus& stimulus,
                  const TimeGrid& grid) {
    const VectorXd y = eval_task(spec, stimulus, grid);
    const VectorXd y0 = eval_task({spec.k, 0.0, 1}, stimulus, grid);
    return complexity_from_dots(y.dot(y0), y.dot(y), y0.dot(y0));
}

double similarity(const VectorXd& a, const VectorXd& b) {
    require(a.size() == b.size(), "similarity: length mismatch");
    const VectorXd ac = a.array() - a.mean();
    const VectorXd bc = b.array() - b.mean();
    const double na = ac.norm(), nb = bc.norm();
    if (na <= 0.0 || nb <= 0.0)
        throw UndefinedSimilarityError("similarity: constant series");
    return ac.dot(bc) / (na * nb);
}

Tier complexity_tier(double C) {
    require(C >= 0.0 && C <= 1.0 + 1e-12, "complexity_tier: C outside [0,1]");
    if (C < 1.0 / 3.0) return Tier::easy;
    if (C < 2.0 / 3.0) return Tier::medium;
    return Tier::hard;
}

std::string to_string(Tier t) {
    switch (t) {
        case Tier::easy: return "easy";
        case Tier::medium: return "medium";
        case Tier::hard: return "hard";
    }
    return "?";
}

}  // namespace hetres::tasks
