#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hetres/common.hpp"

namespace hetres::stim {

// Provenance of one generated series; echoed into persisted headers so a
// stimulus can be regenerated bit-exactly.
struct SourceInfo {
    std::string tag;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

// Raw generator output on a uniform dense grid, before standardization.
struct RawSeries {
    MatrixXd values;        // components x samples
    double dt_dense = 0.0;  // grid spacing, raw time units
    SourceInfo source;

    Index components() const { return values.rows(); }
    Index samples() const { return values.cols(); }
    void validate() const;
};

// Standardized, timescale-normalized driving stimulus. Each component is
// z-scored; the time axis is uniformly scaled so the compound frequency
// (geometric mean of per-component spectral peaks) equals 1 Hz.
struct Stimulus {
    MatrixXd components;      // K x samples
    double dt_dense = 0.0;    // grid spacing after rescaling
    double compound_freq = 0.0;
    double time_scale = 1.0;  // rescale factor applied to the raw time axis
    std::vector<SourceInfo> sources;

    Index K() const { return components.rows(); }
    Index samples() const { return components.cols(); }
    double duration() const {
        return static_cast<double>(samples() - 1) * dt_dense;
    }
};

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    // Initial condition close to the attractor, keeping transients short.
    double x0 = -1.96582031;
    double y0 = -1.08886719;
    double z0 = 2.17578125;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
};

// Lorenz trajectory integrated with adaptive Dormand-Prince RK45 and
// sampled on the dense grid. Throws IntegrationFailure (with the blow-up
// time) if the state leaves the finite range.
RawSeries gen_lorenz(const LorenzParams& p, double duration, double dt_dense);

struct MackeyGlassParams {
    double a = 0.2;
    double b = 0.1;
    double n_exp = 10.0;  // standard chaotic exponent
    double delta = 17.0;
};

// Mackey-Glass delay equation, RK4 on the dense grid with the delayed term
// read from stored past values by linear interpolation. History is x(0)=1.2
// and uniform draws in [1.1, 1.3] at each grid point in [-delta, 0).
RawSeries gen_mackey_glass(const MackeyGlassParams& p, double duration,
                           double dt_dense, std::uint64_t history_seed);

// Same, with an explicit history buffer (samples at -H*dt .. -dt) and x(0);
// exists so tests can pin degenerate histories.
RawSeries gen_mackey_glass_with_history(const MackeyGlassParams& p,
                                        double duration, double dt_dense,
                                        const std::vector<double>& history,
                                        double x0);

struct NarmaParams {
    int order = 30;
    double a1 = 0.2;
    double a2 = 0.04;
    double b = 1.5;
    double c = 0.001;
};

// Discrete NARMA recursion with xi ~ U[0, 0.5] and zero initial conditions,
// interpreted as samples at spacing dt_dense. Throws InstabilityError once
// |u| exceeds 1e6 (the known divergence mode of this recursion).
RawSeries gen_narma(const NarmaParams& p, Index length, std::uint64_t noise_seed,
                    double dt_dense);

RawSeries gen_abs_sine(double duration, double dt_dense);

// Peak of the Hann-windowed periodogram, skipping the DC bin. The first 10%
// of samples are discarded as transient and the analysis window is capped
// (very long series gain nothing for a single-peak estimate).
double peak_frequency(const Eigen::VectorXd& x, double dt);

// Concatenates the raw series into a K-dim stimulus, z-scores each
// component, and rescales the time axis so the compound frequency is 1 Hz.
// Component values are untouched by the rescale; only dt_dense changes.
Stimulus standardize_and_rescale(const std::vector<RawSeries>& raw);

// Linear interpolation at time t of component k (0-based). Out-of-range t
// clamps to the nearest endpoint value.
double sample(const Stimulus& s, double t, Index k);

}  // namespace hetres::stim
