#include "hetres/energy.hpp"

#include <algorithm>
#include <cmath>

namespace hetres::energy {

CostReport rate_cost(Index N, Index K, double p, Index L, bool heterogeneous,
                     const RateCostConstants& c) {
    require(N >= 1 && K >= 1 && L >= 0, "rate_cost: bad dimensions");
    require(p >= 0.0 && p <= 1.0, "rate_cost: p outside [0,1]");

    const double n = static_cast<double>(N);
    const double k = static_cast<double>(K);
    const double syn = std::round(n * n * p);
    const double mem = n + k + syn + n * k + (heterogeneous ? n : 1.0);
    const double flop = static_cast<double>(L) * (c.c_v * n + c.c_r * syn + c.c_f * n * k);

    CostReport rep;
    rep.static_cost = mem;
    rep.dynamic_cost = flop;
    rep.total = mem + flop;
    rep.unit = "flop+words";
    rep.model = "rate";
    rep.params = {{"N", n}, {"K", k}, {"p", p}, {"L", static_cast<double>(L)},
                  {"heterogeneous", heterogeneous ? 1.0 : 0.0},
                  {"c_v", c.c_v}, {"c_r", c.c_r}, {"c_f", c.c_f}};
    return rep;
}

CostReport atp_cost(Index N, double p, double nu, double J, double T,
                    std::optional<Index> N_glia, double r) {
    if (N < 0 || p < 0.0 || nu < 0.0 || J < 0.0 || T < 0.0 || r < 0.0)
        throw DomainError("atp_cost: negative input");
    const double n = static_cast<double>(N);
    const double glia = static_cast<double>(N_glia.value_or(N));
    if (glia < 0.0) throw DomainError("atp_cost: negative glia count");

    const double resting = 102e6 * glia + 342e6 * n;
    const double ap = 120e6 * n * nu;
    const double synaptic = (12.4e3 + 140e3 + 11e3) * n * n * p * nu * r * std::sqrt(J);
    const double signaling_rate = resting + ap + synaptic;

    CostReport rep;
    rep.total = 4.0 / 3.0 * signaling_rate * T;
    rep.static_cost = resting * T;
    rep.dynamic_cost = rep.total - rep.static_cost;
    rep.unit = "ATP";
    rep.model = "atp";
    rep.params = {{"N", n}, {"p", p}, {"nu", nu}, {"J", J}, {"T", T},
                  {"N_glia", glia}, {"r", r}};
    return rep;
}

double emulation_bias(double nu_set, double v_thr, double tau_m) {
    if (nu_set <= 0.0) throw DomainError("emulation_bias: rate must be positive");
    require(v_thr > 0.0 && tau_m > 0.0, "emulation_bias: bad parameters");
    return v_thr / (1.0 - std::exp(-1.0 / (nu_set * tau_m)));
}

double remap_score(double s) { return std::exp(s - 1.0); }

std::vector<FrontierPoint> min_cost_frontier(
    const std::vector<std::pair<double, double>>& records, Index bins) {
    require(bins >= 1, "min_cost_frontier: need at least one bin");
    std::vector<FrontierPoint> out;
    if (records.empty()) return out;

    double lo = records.front().first, hi = records.front().first;
    for (const auto& rec : records) {
        lo = std::min(lo, rec.first);
        hi = std::max(hi, rec.first);
    }
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<FrontierPoint> acc(static_cast<std::size_t>(bins));
    for (const auto& rec : records) {
        Index b = width > 0.0
            ? std::min<Index>(bins - 1, static_cast<Index>((rec.first - lo) / width))
            : 0;
        auto& pt = acc[static_cast<std::size_t>(b)];
        if (pt.count == 0 || rec.second < pt.min_cost) pt.min_cost = rec.second;
        ++pt.count;
    }
    for (Index b = 0; b < bins; ++b) {
        auto& pt = acc[static_cast<std::size_t>(b)];
        if (pt.count == 0) continue;
        pt.bin_center = lo + width * (static_cast<double>(b) + 0.5);
        if (width == 0.0) pt.bin_center = lo;
        out.push_back(pt);
    }
    return out;
}

CostReport neuromorphic_cost(const NeuromorphicCostModel& m, double n_spikes,
                             double n_syn_events, double T) {
    if (n_spikes < 0.0 || n_syn_events < 0.0 || T < 0.0)
        throw DomainError("neuromorphic_cost: negative input");
    CostReport rep;
    rep.static_cost = m.static_power_w * T;
    rep.dynamic_cost =
        m.energy_per_spike_j * n_spikes + m.energy_per_syn_event_j * n_syn_events;
    rep.total = rep.static_cost + rep.dynamic_cost;
    rep.unit = "joules";
    rep.model = "neuromorphic";
    rep.params = {{"static_power_w", m.static_power_w},
                  {"energy_per_spike_j", m.energy_per_spike_j},
                  {"energy_per_syn_event_j", m.energy_per_syn_event_j},
                  {"n_spikes", n_spikes}, {"n_syn_events", n_syn_events}, {"T", T}};
    return rep;
}

}  // namespace hetres::energy
