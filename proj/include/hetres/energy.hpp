#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetres/common.hpp"

namespace hetres::energy {

struct CostReport {
    double static_cost = 0.0;
    double dynamic_cost = 0.0;
    double total = 0.0;
    std::string unit;   // "flop+words", "ATP", "joules"
    std::string model;  // "rate", "atp", "neuromorphic"
    std::map<std::string, double> params;
};

struct RateCostConstants {
    double c_v = 4.0;  // per-neuron update: decay, scale, noise add, state write
    double c_r = 2.0;  // multiply-accumulate per recurrent synapse
    double c_f = 2.0;  // multiply-accumulate per feedforward synapse
};

// FLOP/memory model of the rate implementation. Memory (words) is static,
// FLOPs over L steps are dynamic. Heterogeneity only adds the per-neuron
// time-constant storage (N words instead of 1).
CostReport rate_cost(Index N, Index K, double p, Index L, bool heterogeneous,
                     const RateCostConstants& c = {});

// ATP budget of an equivalent biological network: resting (neuron+glia),
// action potentials, and per-release synaptic terms scaled by sqrt(J), all
// times duration, with the one-third housekeeping surcharge folded into the
// total. Static part is the resting cost alone.
CostReport atp_cost(Index N, double p, double nu, double J, double T,
                    std::optional<Index> N_glia = std::nullopt, double r = 1.0);

// Background bias voltage that clamps a refractory-free LIF neuron at rate
// nu_set on neuromorphic hardware.
double emulation_bias(double nu_set, double v_thr = 0.01, double tau_m = 0.01);

// Monotone map of R^2 scores into (0,1): s' = exp(s - 1).
double remap_score(double s);

struct FrontierPoint {
    double bin_center = 0.0;
    double min_cost = 0.0;
    Index count = 0;
};

// Per performance bin (uniform over the observed score range), the minimum
// total cost among the records falling in the bin. Empty bins are omitted.
std::vector<FrontierPoint> min_cost_frontier(
    const std::vector<std::pair<double, double>>& records, Index bins = 20);

// Pluggable hardware cost model: externally measured constants, no board
// communication here.
struct NeuromorphicCostModel {
    double static_power_w = 0.0;
    double energy_per_spike_j = 0.0;
    double energy_per_syn_event_j = 0.0;
};

CostReport neuromorphic_cost(const NeuromorphicCostModel& m, double n_spikes,
                             double n_syn_events, double T);

}  // namespace hetres::energy
