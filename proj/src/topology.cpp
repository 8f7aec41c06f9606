#include "hetres/topology.hpp"

#include <cmath>

#include "hetres/rng.hpp"

namespace hetres::topo {

Profile profile_from_string(const std::string& s) {
    if (s == "lognormal") return Profile::lognormal;
    if (s == "gamma") return Profile::gamma;
    if (s == "normal") return Profile::normal;
    if (s == "uniform") return Profile::uniform;
    throw ConfigError("unknown time-constant profile: " + s);
}

std::string to_string(Profile p) {
    switch (p) {
        case Profile::lognormal: return "lognormal";
        case Profile::gamma: return "gamma";
        case Profile::normal: return "normal";
        case Profile::uniform: return "uniform";
    }
    return "?";
}

void NetworkSpec::validate() const {
    require(N >= 2, "NetworkSpec: N must be >= 2");
    require(p >= 0.0 && p <= 1.0, "NetworkSpec: p must be in [0,1]");
    require(f_exc > 0.0 && f_exc < 1.0, "NetworkSpec: f_exc must be in (0,1)");
    require(sigma0 >= 0.0, "NetworkSpec: sigma0 must be >= 0");
    require(J >= 0.0 && Ju >= 0.0 && Jn >= 0.0, "NetworkSpec: gains must be >= 0");
    require(K >= 1, "NetworkSpec: K must be >= 1");
    require(tau_mean > 0.0, "NetworkSpec: tau_mean must be positive");
    require(h >= 0.0, "NetworkSpec: h must be >= 0");
}

void build_connectivity(const NetworkSpec& spec, Network& net) {
    spec.validate();
    const Index N = spec.N;
    const auto n_exc = static_cast<Index>(std::lround(spec.f_exc * static_cast<double>(N)));

    net.is_exc.assign(static_cast<std::size_t>(N), 0);
    for (Index i = 0; i < n_exc; ++i) net.is_exc[static_cast<std::size_t>(i)] = 1;

    const double mu_e = mu_exc();
    const double mu_i = mu_inh(spec.f_exc);
    const double scale =
        spec.p > 0.0 ? spec.J / std::sqrt(static_cast<double>(N) * spec.p) : 0.0;

    rng::Stream rs(spec.seeds.connectivity);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(static_cast<double>(N) * static_cast<double>(N) *
                                          spec.p * 1.1) + 16);
    for (Index i = 0; i < N; ++i) {
        for (Index j = 0; j < N; ++j) {
            if (i == j) continue;  // no autapses
            if (!rs.bernoulli(spec.p)) continue;
            const double mu = net.is_exc[static_cast<std::size_t>(j)] ? mu_e : mu_i;
            const double w = mu + spec.sigma0 * rs.normal();
            trip.emplace_back(i, j, w * scale);
        }
    }
    net.W.resize(N, N);
    net.W.setFromTriplets(trip.begin(), trip.end());
    net.W.makeCompressed();

    if (static_cast<double>(N) * spec.p < 1.0 && spec.p > 0.0)
        net.warnings.push_back("sparse network: N*p < 1, expected degree below one");
}

void build_input_weights(const NetworkSpec& spec, Network& net) {
    spec.validate();
    const double scale = spec.Ju / std::sqrt(static_cast<double>(spec.K));
    rng::Stream rs(spec.seeds.input);
    net.Wu.resize(spec.N, spec.K);
    for (Index i = 0; i < spec.N; ++i)
        for (Index k = 0; k < spec.K; ++k)
            net.Wu(i, k) = rs.normal() * scale;
}

TauSample sample_time_constants(Index N, double tau_mean, double h,
                                Profile profile, std::uint64_t seed,
                                double tau_floor) {
    require(N >= 1, "sample_time_constants: N must be >= 1");
    require(tau_mean > 0.0, "sample_time_constants: tau_mean must be positive");
    require(h >= 0.0, "sample_time_constants: h must be >= 0");

    TauSample out;
    out.tau.resize(N);
    if (h == 0.0) {
        out.tau.setConstant(tau_mean);
        return out;
    }

    const double m = tau_mean;
    const double v = h * m * m;
    rng::Stream rs(seed);

    switch (profile) {
        case Profile::lognormal: {
            const double mu = std::log(m * m / std::sqrt(m * m + v));
            const double sigma = std::sqrt(std::log(1.0 + v / (m * m)));
            for (Index i = 0; i < N; ++i)
                out.tau[i] = std::exp(mu + sigma * rs.normal());
            break;
        }
        case Profile::gamma: {
            const double shape = m * m / v;  // = 1/h
            const double scale = v / m;
            for (Index i = 0; i < N; ++i) {
                // Marsaglia-Tsang; shape < 1 boosted via Gamma(k+1)*U^(1/k).
                double k = shape;
                double boost = 1.0;
                if (k < 1.0) {
                    boost = std::pow(rs.uniform(), 1.0 / k);
                    k += 1.0;
                }
                const double d = k - 1.0 / 3.0;
                const double c = 1.0 / std::sqrt(9.0 * d);
                double x, vv;
                for (;;) {
                    do {
                        x = rs.normal();
                        vv = 1.0 + c * x;
                    } while (vv <= 0.0);
                    vv = vv * vv * vv;
                    const double u = rs.uniform();
                    if (u < 1.0 - 0.0331 * x * x * x * x) break;
                    if (std::log(u) < 0.5 * x * x + d * (1.0 - vv + std::log(vv))) break;
                }
                out.tau[i] = d * vv * boost * scale;
            }
            break;
        }
        case Profile::normal: {
            const double sd = std::sqrt(v);
            for (Index i = 0; i < N; ++i) {
                double t;
                do {
                    t = m + sd * rs.normal();
                    if (t < tau_floor) ++out.rejections;
                } while (t < tau_floor);
                out.tau[i] = t;
            }
            break;
        }
        case Profile::uniform: {
            const double half = std::sqrt(3.0 * v);
            require(m + half >= tau_floor,
                    "sample_time_constants: uniform support entirely below tau_floor");
            for (Index i = 0; i < N; ++i) {
                double t;
                do {
                    t = rs.uniform(m - half, m + half);
                    if (t < tau_floor) ++out.rejections;
                } while (t < tau_floor);
                out.tau[i] = t;
            }
            break;
        }
    }
    return out;
}

Network build_network(const NetworkSpec& spec) {
    Network net;
    net.spec = spec;
    build_connectivity(spec, net);
    build_input_weights(spec, net);
    auto ts = sample_time_constants(spec.N, spec.tau_mean, spec.h, spec.profile,
                                    spec.seeds.tau, spec.tau_floor);
    net.tau = std::move(ts.tau);
    net.tau_rejections = ts.rejections;
    require(net.tau.minCoeff() > 0.0, "build_network: non-positive time constant");
    return net;
}

}  // namespace hetres::topo
