#include "hetres/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "hetres/fp16.hpp"
#include "hetres/rng.hpp"

namespace hetres::dyn {

Index SpikeRaster::total_spikes() const {
    Index n = 0;
    for (const auto& s : spikes) n += static_cast<Index>(s.size());
    return n;
}

double SpikeRaster::mean_rate() const {
    if (N == 0 || duration <= 0.0) return 0.0;
    return static_cast<double>(total_spikes()) /
           (static_cast<double>(N) * duration);
}

namespace {

constexpr double kSaturationEps = 1e-6;

struct LiCoeffs {
    VectorXd rate_a;       // dt/tau (Euler)
    VectorXd decay;        // exp(-dt/tau) (exponential)
    VectorXd noise_euler;  // (Jn/tau)*sqrt(dt)
    VectorXd noise_exp;    // exact OU increment std
};

LiCoeffs make_coeffs(const topo::Network& net, double dt) {
    const Index N = net.N();
    LiCoeffs c;
    c.rate_a.resize(N);
    c.decay.resize(N);
    c.noise_euler.resize(N);
    c.noise_exp.resize(N);
    const double jn = net.spec.Jn;
    for (Index i = 0; i < N; ++i) {
        const double tau = net.tau[i];
        c.rate_a[i] = dt / tau;
        c.decay[i] = std::exp(-dt / tau);
        c.noise_euler[i] = jn / tau * std::sqrt(dt);
        c.noise_exp[i] = jn * std::sqrt(-std::expm1(-2.0 * dt / tau) / (2.0 * tau));
    }
    return c;
}

bool pick_euler(Integrator which, const topo::Network& net, double dt) {
    switch (which) {
        case Integrator::euler:
            if (dt > net.min_tau() / 2.0)
                throw StabilityError("simulate: dt exceeds min(tau)/2, Euler unstable");
            return true;
        case Integrator::exponential:
            return false;
        case Integrator::auto_select:
            return dt <= net.min_tau() / 2.0;
    }
    return false;
}

void interp_input(const stim::Stimulus& s, double t, VectorXd& u) {
    for (Index k = 0; k < s.K(); ++k) u[k] = stim::sample(s, t, k);
}

}  // namespace

void simulate_li_stream(const topo::Network& net, const stim::Stimulus& stimulus,
                        Index L, double dt, std::uint64_t noise_seed,
                        ChunkSink& sink, const SimOptions& opt,
                        StateMeta* meta_out) {
    require(L >= 1, "simulate_li: L must be >= 1");
    require(dt > 0.0, "simulate_li: dt must be positive");
    require(net.Wu.cols() == stimulus.K(), "simulate_li: Wu/stimulus dimension mismatch");

    const Index N = net.N();
    const bool euler = pick_euler(opt.integrator, net, dt);
    const LiCoeffs c = make_coeffs(net, dt);

    VectorXd v = opt.v0 ? *opt.v0 : VectorXd::Zero(N);
    require(v.size() == N, "simulate_li: v0 size mismatch");

    VectorXd r(N), drive(N), u(stimulus.K());
    MatrixXd chunk(N, std::min(opt.chunk, L));
    Index chunk_start = 0, chunk_fill = 0;
    Index saturated = 0;

    for (Index t = 0; t < L; ++t) {
        r = (1.0 + (-v.array()).exp()).inverse();
        interp_input(stimulus, static_cast<double>(t) * dt + opt.stim_offset, u);
        drive = net.W * r;
        drive.noalias() += net.Wu * u;
        if (euler) {
            for (Index i = 0; i < N; ++i)
                v[i] += c.rate_a[i] * (drive[i] - v[i]) +
                        c.noise_euler[i] * rng::normal_at(noise_seed, static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(t));
        } else {
            for (Index i = 0; i < N; ++i)
                v[i] = drive[i] + (v[i] - drive[i]) * c.decay[i] +
                       c.noise_exp[i] * rng::normal_at(noise_seed, static_cast<std::uint64_t>(i),
                                                       static_cast<std::uint64_t>(t));
        }
        if (!v.allFinite()) {
            std::ostringstream msg;
            msg << "simulate_li: non-finite state at step " << t;
            throw IntegrationFailure(msg.str(), static_cast<double>(t + 1) * dt);
        }
        auto col = chunk.col(chunk_fill);
        col = (1.0 + (-v.array()).exp()).inverse();
        saturated += (col.array() < kSaturationEps).count() +
                     (col.array() > 1.0 - kSaturationEps).count();
        ++chunk_fill;
        if (chunk_fill == chunk.cols() || t == L - 1) {
            sink.on_chunk(chunk.leftCols(chunk_fill), chunk_start);
            chunk_start += chunk_fill;
            chunk_fill = 0;
        }
    }

    if (meta_out) {
        meta_out->dt = dt;
        meta_out->kind = "li";
        meta_out->noise_seed = noise_seed;
        meta_out->fallback_integrator = !euler;
        meta_out->saturation_fraction =
            static_cast<double>(saturated) / (static_cast<double>(N) * static_cast<double>(L));
    }
}

namespace {

struct MatSink : ChunkSink {
    MatrixXd X;
    void on_chunk(const Eigen::Ref<const MatrixXd>& chunk, Index t0) override {
        X.middleCols(t0, chunk.cols()) = chunk;
    }
};

}  // namespace

StateMatrix simulate_li(const topo::Network& net, const stim::Stimulus& stimulus,
                        Index L, double dt, std::uint64_t noise_seed,
                        const SimOptions& opt) {
    MatSink sink;
    sink.X.resize(net.N(), L);
    StateMeta meta;

    const bool first_pass_euler =
        opt.integrator == Integrator::euler ||
        (opt.integrator == Integrator::auto_select && dt <= net.min_tau() / 2.0);
    bool rerun = false;
    try {
        simulate_li_stream(net, stimulus, L, dt, noise_seed, sink, opt, &meta);
        rerun = opt.integrator == Integrator::auto_select && first_pass_euler &&
                meta.saturation_fraction > 0.01;
    } catch (const IntegrationFailure&) {
        if (opt.integrator != Integrator::auto_select || !first_pass_euler) throw;
        rerun = true;
    }
    if (rerun) {
        SimOptions o2 = opt;
        o2.integrator = Integrator::exponential;
        simulate_li_stream(net, stimulus, L, dt, noise_seed, sink, o2, &meta);
        meta.rerun_after_anomaly = true;
    }

    StateMatrix out;
    out.X = std::move(sink.X);
    out.dt = dt;
    out.meta = meta;
    return out;
}

double background_voltage(double nu, double tau, const LIFParams& params) {
    params.validate();
    require(nu > 0.0, "background_voltage: nu must be positive");
    require(tau > 0.0, "background_voltage: tau must be positive");
    if (nu >= 1.0 / params.tau_ref)
        throw InfeasibleRateError("background_voltage: requested rate at or above 1/tau_ref");
    const double arg = 1.0 / (nu * tau) - params.tau_ref / tau;
    // mu = (z*x_thr - x_reset)/(z - 1) with z = exp(arg), written through
    // expm1 so near-rheobase drives keep their tiny margin above threshold.
    return params.x_thr() + (params.x_thr() - params.x_reset()) / std::expm1(arg);
}

LifSimResult simulate_lif(const topo::Network& net, const stim::Stimulus& stimulus,
                          const LIFParams& params, Index L, double dt,
                          std::uint64_t noise_seed, const SimOptions& opt,
                          ChunkSink* filtered_sink, double tau_phi) {
    params.validate();
    require(L >= 1, "simulate_lif: L must be >= 1");
    require(dt > 0.0, "simulate_lif: dt must be positive");
    if (filtered_sink) require(tau_phi > 0.0, "simulate_lif: tau_phi must be positive");

    const Index N = net.N();
    const bool euler = opt.integrator == Integrator::euler
        ? pick_euler(Integrator::euler, net, dt)
        : false;  // exact exponential subthreshold step by default
    const LiCoeffs c = make_coeffs(net, dt);
    const double x_thr = params.x_thr();
    const double x_reset = params.x_reset();
    const auto hold_steps =
        std::max<Index>(1, static_cast<Index>(std::lround(params.tau_ref / dt)));

    VectorXd v_bg = params.v_bg;
    if (v_bg.size() == 0) {
        v_bg.resize(N);
        for (Index i = 0; i < N; ++i)
            v_bg[i] = background_voltage(params.nu0, net.tau[i], params);
    }
    require(v_bg.size() == N, "simulate_lif: v_bg size mismatch");

    VectorXd syn_factor(N);  // tau_ref/tau_i, the per-spike increment scale
    for (Index i = 0; i < N; ++i) syn_factor[i] = params.tau_ref / net.tau[i];

    Eigen::SparseMatrix<double> Wc = net.W;  // column access for spike fan-out

    VectorXd v = opt.v0 ? *opt.v0 : VectorXd::Constant(N, x_reset);
    require(v.size() == N, "simulate_lif: v0 size mismatch");
    std::vector<Index> hold(static_cast<std::size_t>(N), 0);
    VectorXd pending = VectorXd::Zero(N);
    VectorXd u(stimulus.K()), ff(N);
    std::vector<Index> fired;
    fired.reserve(64);

    LifSimResult out;
    out.raster.N = N;
    out.raster.duration = static_cast<double>(L) * dt;
    out.raster.spikes.assign(static_cast<std::size_t>(N), {});

    const double kphi = filtered_sink ? std::exp(-dt / tau_phi) : 0.0;
    VectorXd phi = VectorXd::Zero(N);
    MatrixXd chunk;
    Index chunk_start = 0, chunk_fill = 0;
    if (filtered_sink) chunk.resize(N, std::min(opt.chunk, L));

    for (Index t = 0; t < L; ++t) {
        interp_input(stimulus, static_cast<double>(t) * dt + opt.stim_offset, u);
        ff.noalias() = net.Wu * u;
        fired.clear();
        for (Index i = 0; i < N; ++i) {
            auto& hi = hold[static_cast<std::size_t>(i)];
            if (hi > 0) {
                --hi;
                v[i] = x_reset;
                continue;
            }
            double vi = v[i] + pending[i];
            const double drive = v_bg[i] + ff[i];
            const double xi = rng::normal_at(noise_seed, static_cast<std::uint64_t>(i),
                                             static_cast<std::uint64_t>(t));
            if (euler)
                vi += c.rate_a[i] * (drive - vi) + c.noise_euler[i] * xi;
            else
                vi = drive + (vi - drive) * c.decay[i] + c.noise_exp[i] * xi;
            if (!std::isfinite(vi)) {
                std::ostringstream msg;
                msg << "simulate_lif: non-finite voltage at step " << t;
                throw IntegrationFailure(msg.str(), static_cast<double>(t + 1) * dt);
            }
            if (vi >= x_thr) {
                out.raster.spikes[static_cast<std::size_t>(i)].push_back(
                    static_cast<double>(t + 1) * dt);
                fired.push_back(i);
                vi = x_reset;
                hi = hold_steps;
            }
            v[i] = vi;
        }
        pending.setZero();
        for (Index j : fired)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Wc, j); it; ++it)
                pending[it.row()] += syn_factor[it.row()] * it.value();

        if (filtered_sink) {
            phi *= kphi;
            for (Index j : fired) phi[j] += 1.0;
            chunk.col(chunk_fill) = phi;
            ++chunk_fill;
            if (chunk_fill == chunk.cols() || t == L - 1) {
                filtered_sink->on_chunk(chunk.leftCols(chunk_fill), chunk_start);
                chunk_start += chunk_fill;
                chunk_fill = 0;
            }
        }
    }

    out.meta.dt = dt;
    out.meta.kind = "lif";
    out.meta.noise_seed = noise_seed;
    out.meta.fallback_integrator = !euler;
    return out;
}

StateMatrix spikes_to_state(const SpikeRaster& raster, double dt, double tau_phi) {
    require(dt > 0.0, "spikes_to_state: dt must be positive");
    require(tau_phi > 0.0, "spikes_to_state: tau_phi must be positive");

    const Index L = static_cast<Index>(std::lround(raster.duration / dt));
    StateMatrix out;
    out.X = MatrixXd::Zero(raster.N, L);
    out.dt = dt;
    out.meta.dt = dt;
    out.meta.kind = "lif-filtered";

    // Contributions below ~1e-300 have fully decayed; the cutoff keeps the
    // per-spike work bounded while remaining exact in double precision.
    const auto horizon = static_cast<Index>(std::ceil(691.0 * tau_phi / dt)) + 1;

    for (Index n = 0; n < raster.N; ++n) {
        for (double s : raster.spikes[static_cast<std::size_t>(n)]) {
            auto t0 = static_cast<Index>(std::ceil(s / dt - 1.0 - 1e-12));
            t0 = std::max<Index>(t0, 0);
            const Index t1 = std::min(L, t0 + horizon);
            for (Index t = t0; t < t1; ++t) {
                const double lag = static_cast<double>(t + 1) * dt - s;
                if (lag < 0.0) continue;
                out.X(n, t) += std::exp(-lag / tau_phi);
            }
        }
    }
    return out;
}

double lif_rate_curve(double I, double R, const LIFParams& params, double tau_m) {
    params.validate();
    require(tau_m > 0.0, "lif_rate_curve: tau_m must be positive");
    const double mu = R * I;
    if (mu <= params.x_thr()) return 0.0;
    return 1.0 / (1.0 + tau_m / params.tau_ref *
                            std::log((mu - params.x_reset()) / (mu - params.x_thr())));
}

namespace {

// Nelder-Mead for 1-2 dimensional objectives; all the matching needs.
struct NmOut {
    VectorXd x;
    double f = 0.0;
    bool converged = false;
    Index iters = 0;
};

NmOut nelder_mead(const std::function<double(const VectorXd&)>& f, VectorXd x0,
                  double step, Index max_iter, double ftol) {
    const Index n = x0.size();
    std::vector<VectorXd> xs;
    std::vector<double> fs;
    xs.push_back(x0);
    for (Index i = 0; i < n; ++i) {
        VectorXd p = x0;
        p[i] += (p[i] != 0.0 ? std::abs(p[i]) : 1.0) * step;
        xs.push_back(p);
    }
    for (auto& p : xs) fs.push_back(f(p));

    NmOut out;
    for (out.iters = 0; out.iters < max_iter; ++out.iters) {
        // Order vertices best..worst.
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = a + 1; b < xs.size(); ++b)
                if (fs[b] < fs[a]) {
                    std::swap(fs[a], fs[b]);
                    std::swap(xs[a], xs[b]);
                }
        if (std::abs(fs.back() - fs.front()) <=
            ftol * (std::abs(fs.front()) + std::abs(fs.back()) + 1e-300)) {
            out.converged = true;
            break;
        }
        VectorXd centroid = VectorXd::Zero(n);
        for (std::size_t a = 0; a + 1 < xs.size(); ++a) centroid += xs[a];
        centroid /= static_cast<double>(n);

        const VectorXd refl = centroid + (centroid - xs.back());
        const double f_refl = f(refl);
        if (f_refl < fs.front()) {
            const VectorXd exp_ = centroid + 2.0 * (centroid - xs.back());
            const double f_exp = f(exp_);
            if (f_exp < f_refl) {
                xs.back() = exp_;
                fs.back() = f_exp;
            } else {
                xs.back() = refl;
                fs.back() = f_refl;
            }
        } else if (f_refl < fs[fs.size() - 2]) {
            xs.back() = refl;
            fs.back() = f_refl;
        } else {
            const VectorXd contr = centroid + 0.5 * (xs.back() - centroid);
            const double f_contr = f(contr);
            if (f_contr < fs.back()) {
                xs.back() = contr;
                fs.back() = f_contr;
            } else {
                for (std::size_t a = 1; a < xs.size(); ++a) {
                    xs[a] = xs.front() + 0.5 * (xs[a] - xs.front());
                    fs[a] = f(xs[a]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < xs.size(); ++a)
        if (fs[a] < fs[best]) best = a;
    out.x = xs[best];
    out.f = fs[best];
    return out;
}

}  // namespace

MatchResult match_lif_to_li(double I_lo, double I_hi, Index n_grid,
                            const LIFParams& init, double tau_m, double R,
                            bool constrain_midpoint) {
    require(n_grid >= 100, "match_lif_to_li: need at least 100 grid points");
    require(I_hi > I_lo, "match_lif_to_li: empty current interval");
    require(tau_m > 0.0 && R > 0.0, "match_lif_to_li: tau_m and R must be positive");

    VectorXd I(n_grid), target(n_grid);
    for (Index g = 0; g < n_grid; ++g) {
        I[g] = I_lo + (I_hi - I_lo) * static_cast<double>(g) / static_cast<double>(n_grid - 1);
        target[g] = activation(R * I[g]);
    }

    LIFParams work = init;
    const auto objective_xy = [&](double x_t, double x_r) {
        if (!(x_t > x_r)) return 1e50;  // threshold must sit above reset
        work.E = 0.0;
        work.v_thr = x_t;
        work.v_reset = x_r;
        double sum = 0.0;
        for (Index g = 0; g < n_grid; ++g) {
            const double d = target[g] - lif_rate_curve(I[g], R, work, tau_m);
            sum += d * d;
        }
        return sum;
    };

    const double ratio = std::exp(init.tau_ref / tau_m);
    MatchResult res;
    if (constrain_midpoint) {
        // Reset tied to threshold; r_s(0)=1/2 forces a subzero threshold
        // offset, so start the search on that side.
        const double x0 = -(std::abs(init.x_thr()) > 0.0 ? std::abs(init.x_thr()) : 1.0);
        VectorXd start(1);
        start[0] = x0;
        auto nm = nelder_mead(
            [&](const VectorXd& x) { return objective_xy(x[0], x[0] * ratio); },
            start, 0.5, 2000, 1e-14);
        res.params = init;
        res.params.v_thr = init.E + nm.x[0];
        res.params.v_reset = init.E + nm.x[0] * ratio;
        res.objective = nm.f;
        res.converged = nm.converged;
        res.iterations = nm.iters;
    } else {
        VectorXd start(2);
        start[0] = init.x_thr();
        start[1] = init.x_reset();
        auto nm = nelder_mead(
            [&](const VectorXd& x) { return objective_xy(x[0], x[1]); },
            start, 0.5, 4000, 1e-14);
        res.params = init;
        res.params.v_thr = init.E + nm.x[0];
        res.params.v_reset = init.E + nm.x[1];
        res.objective = nm.f;
        res.converged = nm.converged;
        res.iterations = nm.iters;
    }
    return res;
}

StateMatrix quantize_state(const StateMatrix& in, QuantizeMode mode,
                           Index* saturated_count) {
    StateMatrix out;
    out.dt = in.dt;
    out.meta = in.meta;
    if (mode == QuantizeMode::full) {
        out.X = in.X;
        if (saturated_count) *saturated_count = 0;
        return out;
    }
    out.X.resizeLike(in.X);
    Index saturated = 0;
    const auto n = static_cast<Index>(in.X.size());
    const double* src = in.X.data();
    double* dst = out.X.data();
    for (Index i = 0; i < n; ++i) {
        bool sat = false;
        dst[i] = fp16::round_trip(src[i], &sat);
        if (sat) ++saturated;
    }
    if (saturated_count) *saturated_count = saturated;
    return out;
}

}  // namespace hetres::dyn
