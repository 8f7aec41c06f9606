#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetres/common.hpp"
#include "hetres/stimgen.hpp"
#include "hetres/topology.hpp"

namespace hetres::dyn {

struct LIFParams {
    double E = -70.0;        // reversal potential, mV
    double v_reset = -70.0;  // mV
    double v_thr = -69.0;    // mV
    double tau_ref = 0.002;  // absolute refractory period, s
    double nu0 = 5.0;        // baseline rate target, Hz
    // Per-neuron background drive relative to E, mV. Left empty it is
    // computed from nu0 and the neuron's time constant.
    VectorXd v_bg;

    double x_thr() const { return v_thr - E; }
    double x_reset() const { return v_reset - E; }
    void validate() const { require(v_thr > v_reset, "LIFParams: v_thr must exceed v_reset"); }
};

struct StateMeta {
    double dt = 0.0;
    std::string kind;  // "li" or "lif-filtered"
    std::uint64_t noise_seed = 0;
    bool fallback_integrator = false;  // exponential path was used
    bool rerun_after_anomaly = false;
    double saturation_fraction = 0.0;  // LI states within 1e-6 of 0 or 1
};

struct StateMatrix {
    MatrixXd X;  // N x L; column t holds the state at time (t+1)*dt
    double dt = 0.0;
    StateMeta meta;

    Index N() const { return X.rows(); }
    Index steps() const { return X.cols(); }
};

struct SpikeRaster {
    std::vector<std::vector<double>> spikes;  // per neuron, strictly increasing
    double duration = 0.0;
    Index N = 0;

    Index total_spikes() const;
    double mean_rate() const;  // Hz, averaged over neurons and duration
};

enum class Integrator {
    euler,        // explicit Euler, errors out when dt > min(tau)/2
    exponential,  // per-neuron exact leak update, unconditionally stable
    auto_select,  // euler when stable for every neuron, else exponential
};

// Static sigmoid nonlinearity, r in (0,1).
inline double activation(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Streaming consumer of simulation output. Chunks arrive in order and
// partition [0, L); column c of a chunk starting at t0 is step t0 + c.
class ChunkSink {
public:
    virtual ~ChunkSink() = default;
    virtual void on_chunk(const Eigen::Ref<const MatrixXd>& X, Index t0) = 0;
};

struct SimOptions {
    Integrator integrator = Integrator::auto_select;
    double stim_offset = 0.0;  // stimulus is read at sim time + offset
    Index chunk = 4096;
    const VectorXd* v0 = nullptr;  // initial voltages; default all-zero
};

// Rate-based leaky-integrator dynamics. Noise is the Euler-Maruyama
// discretization of Jn*xi(t), drawn from a counter-indexed stream so chunked
// and whole runs agree bit for bit. Throws IntegrationFailure on non-finite
// state, StabilityError when the Euler path is requested with dt > min(tau)/2.
void simulate_li_stream(const topo::Network& net, const stim::Stimulus& stimulus,
                        Index L, double dt, std::uint64_t noise_seed,
                        ChunkSink& sink, const SimOptions& opt = {},
                        StateMeta* meta_out = nullptr);

// Materializing wrapper. With auto_select, an Euler run whose states look
// anomalous (non-finite, or >1% within 1e-6 of saturation) is rerun once
// with the exponential integrator and flagged in the meta record.
StateMatrix simulate_li(const topo::Network& net, const stim::Stimulus& stimulus,
                        Index L, double dt, std::uint64_t noise_seed,
                        const SimOptions& opt = {});

struct LifSimResult {
    SpikeRaster raster;
    StateMeta meta;
};

// Spiking leaky integrate-and-fire dynamics with instantaneous synapses:
// a presynaptic spike increments each target's voltage by
// (tau_ref/tau_i) * W(i,j) at the following step. Threshold crossings are
// detected on the grid; the voltage is clamped at reset for
// max(1, round(tau_ref/dt)) steps. The subthreshold update is the exact
// exponential step (the Euler option exists but distorts firing of
// fast-tau neurons at coarse dt). If filtered_sink is given, the
// exponential-kernel filtered state (tau_phi) is streamed to it.
LifSimResult simulate_lif(const topo::Network& net, const stim::Stimulus& stimulus,
                          const LIFParams& params, Index L, double dt,
                          std::uint64_t noise_seed, const SimOptions& opt = {},
                          ChunkSink* filtered_sink = nullptr,
                          double tau_phi = 0.0);

// Background drive (relative to E, mV) that makes an isolated LIF neuron
// fire at rate nu. Inverts the equilibrium rate relation; throws
// InfeasibleRateError for nu >= 1/tau_ref.
double background_voltage(double nu, double tau, const LIFParams& params);

// Exponential-kernel filtered spike trains on the dt grid:
// X(t) = sum_f exp(-(t - t_f)/tau_phi) for t >= t_f. Direct per-spike
// evaluation, so superposition over rasters is exact.
StateMatrix spikes_to_state(const SpikeRaster& raster, double dt, double tau_phi);

// Normalized equilibrium rate of an LIF neuron under constant current I:
// 0 below rheobase, else 1/(1 + (tau_m/tau_ref) ln((RI - x_reset)/(RI - x_thr))).
double lif_rate_curve(double I, double R, const LIFParams& params, double tau_m);

struct MatchResult {
    LIFParams params;
    double objective = 0.0;
    bool converged = false;
    Index iterations = 0;
};

// Fits (v_thr - E, v_reset - E) so the LIF rate curve tracks the sigmoid
// over [I_lo, I_hi] (grid of n_grid >= 100 points), by Nelder-Mead descent.
// With constrain_midpoint the reset is tied to the threshold so that
// r_s(0) = 1/2 exactly, and only the threshold offset is free. E keeps the
// initial value; only voltage differences enter the rate curve.
MatchResult match_lif_to_li(double I_lo, double I_hi, Index n_grid,
                            const LIFParams& init, double tau_m, double R,
                            bool constrain_midpoint);

enum class QuantizeMode { half, full };

// half: round every entry through IEEE binary16 (saturating overflows and
// counting them); full: identity copy.
StateMatrix quantize_state(const StateMatrix& in, QuantizeMode mode,
                           Index* saturated_count = nullptr);

}  // namespace hetres::dyn
