#include "hetres/stimgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fftw3.h>

#include "hetres/rng.hpp"

namespace hetres::stim {

void RawSeries::validate() const {
    require(samples() >= 2, "raw series needs at least 2 samples");
    require(dt_dense > 0.0, "raw series dt_dense must be positive");
    require(values.allFinite(), "raw series contains non-finite values");
}

namespace {

struct Vec3 {
    double x, y, z;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

Vec3 lorenz_rhs(const LorenzParams& p, const Vec3& v) {
    return {p.sigma * (v.y - v.x), v.x * (p.rho - v.z) - v.y,
            v.x * v.y - p.beta * v.z};
}

bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

RawSeries gen_lorenz(const LorenzParams& p, double duration, double dt_dense) {
    require(duration > 0.0, "gen_lorenz: duration must be positive");
    require(dt_dense > 0.0, "gen_lorenz: dt_dense must be positive");

    const Index n = static_cast<Index>(std::floor(duration / dt_dense)) + 1;
    RawSeries out;
    out.values.resize(3, n);
    out.dt_dense = dt_dense;
    out.source.tag = "lorenz";
    out.source.params = {{"sigma", p.sigma}, {"rho", p.rho},   {"beta", p.beta},
                         {"x0", p.x0},       {"y0", p.y0},     {"z0", p.z0},
                         {"rel_tol", p.rel_tol}};

    Vec3 v{p.x0, p.y0, p.z0};
    Vec3 k1 = lorenz_rhs(p, v);  // FSAL
    double t = 0.0;
    double h = dt_dense;
    out.values.col(0) << v.x, v.y, v.z;

    for (Index i = 1; i < n; ++i) {
        const double t_target = static_cast<double>(i) * dt_dense;
        while (t < t_target) {
            double step = std::min(h, t_target - t);
            for (;;) {
                const Vec3 k2 = lorenz_rhs(p, v + k1 * (a21 * step));
                const Vec3 k3 = lorenz_rhs(p, v + k1 * (a31 * step) + k2 * (a32 * step));
                const Vec3 k4 = lorenz_rhs(p, v + k1 * (a41 * step) + k2 * (a42 * step) +
                                                  k3 * (a43 * step));
                const Vec3 k5 = lorenz_rhs(p, v + k1 * (a51 * step) + k2 * (a52 * step) +
                                                  k3 * (a53 * step) + k4 * (a54 * step));
                const Vec3 k6 = lorenz_rhs(p, v + k1 * (a61 * step) + k2 * (a62 * step) +
                                                  k3 * (a63 * step) + k4 * (a64 * step) +
                                                  k5 * (a65 * step));
                const Vec3 vnew = v + (k1 * b1 + k3 * b3 + k4 * b4 + k5 * b5 + k6 * b6) * step;
                const Vec3 k7 = lorenz_rhs(p, vnew);
                const Vec3 err = (k1 * e1 + k3 * e3 + k4 * e4 + k5 * e5 + k6 * e6 +
                                  k7 * e7) * step;

                if (!finite(vnew)) {
                    std::ostringstream msg;
                    msg << "gen_lorenz: non-finite state at t=" << t;
                    throw IntegrationFailure(msg.str(), t);
                }
                const double sc_x = p.abs_tol + p.rel_tol * std::max(std::abs(v.x), std::abs(vnew.x));
                const double sc_y = p.abs_tol + p.rel_tol * std::max(std::abs(v.y), std::abs(vnew.y));
                const double sc_z = p.abs_tol + p.rel_tol * std::max(std::abs(v.z), std::abs(vnew.z));
                const double err_norm = std::sqrt(((err.x / sc_x) * (err.x / sc_x) +
                                                   (err.y / sc_y) * (err.y / sc_y) +
                                                   (err.z / sc_z) * (err.z / sc_z)) / 3.0);
                if (err_norm <= 1.0) {
                    t += step;
                    v = vnew;
                    k1 = k7;
                    const double grow = err_norm > 0.0
                        ? std::min(5.0, 0.9 * std::pow(err_norm, -0.2))
                        : 5.0;
                    h = std::min(step * grow, dt_dense * 100.0);
                    break;
                }
                step *= std::max(0.1, 0.9 * std::pow(err_norm, -0.2));
                if (step < 1e-14) {
                    std::ostringstream msg;
                    msg << "gen_lorenz: step size underflow at t=" << t;
                    throw IntegrationFailure(msg.str(), t);
                }
            }
        }
        out.values.col(i) << v.x, v.y, v.z;
    }
    return out;
}

namespace {

// Linear interpolation into a buffer whose sample j sits at time t0 + j*dt.
double interp_at(const std::vector<double>& buf, double t0, double dt, double t) {
    const double pos = (t - t0) / dt;
    if (pos <= 0.0) return buf.front();
    const auto last = static_cast<double>(buf.size() - 1);
    if (pos >= last) return buf.back();
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return buf[i] * (1.0 - frac) + buf[i + 1] * frac;
}

double mg_rhs(const MackeyGlassParams& p, double x, double x_delayed) {
    return p.a * x_delayed / (1.0 + std::pow(x_delayed, p.n_exp)) - p.b * x;
}

RawSeries mg_integrate(const MackeyGlassParams& p, double duration, double dt,
                       const std::vector<double>& history, double x0,
                       std::uint64_t seed_for_meta) {
    require(duration > 0.0, "gen_mackey_glass: duration must be positive");
    if (p.delta < dt)
        throw InvalidDelayError("gen_mackey_glass: delay smaller than dt_dense");

    const auto hist_len = static_cast<Index>(history.size());
    const double t0 = -static_cast<double>(hist_len) * dt;
    const Index n = static_cast<Index>(std::floor(duration / dt)) + 1;

    std::vector<double> buf(history);
    buf.reserve(static_cast<std::size_t>(hist_len + n));
    buf.push_back(x0);

    for (Index i = 1; i < n; ++i) {
        const double t = static_cast<double>(i - 1) * dt;
        const double x = buf.back();
        const double xd1 = interp_at(buf, t0, dt, t - p.delta);
        const double k1 = mg_rhs(p, x, xd1);
        const double xd2 = interp_at(buf, t0, dt, t + 0.5 * dt - p.delta);
        const double k2 = mg_rhs(p, x + 0.5 * dt * k1, xd2);
        const double k3 = mg_rhs(p, x + 0.5 * dt * k2, xd2);
        const double xd4 = interp_at(buf, t0, dt, t + dt - p.delta);
        const double k4 = mg_rhs(p, x + dt * k3, xd4);
        const double xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(xn)) {
            std::ostringstream msg;
            msg << "gen_mackey_glass: non-finite state at t=" << t + dt;
            throw IntegrationFailure(msg.str(), t + dt);
        }
        buf.push_back(xn);
    }

    RawSeries out;
    out.values.resize(1, n);
    for (Index i = 0; i < n; ++i)
        out.values(0, i) = buf[static_cast<std::size_t>(hist_len + i)];
    out.dt_dense = dt;
    out.source.tag = "mackey_glass";
    out.source.params = {{"a", p.a}, {"b", p.b}, {"n_exp", p.n_exp}, {"delta", p.delta}};
    out.source.seed = seed_for_meta;
    return out;
}

}  // namespace

RawSeries gen_mackey_glass(const MackeyGlassParams& p, double duration,
                           double dt_dense, std::uint64_t history_seed) {
    if (p.delta < dt_dense)
        throw InvalidDelayError("gen_mackey_glass: delay smaller than dt_dense");
    const auto hist_len = static_cast<Index>(std::ceil(p.delta / dt_dense));
    rng::Stream rs(history_seed);
    std::vector<double> history(static_cast<std::size_t>(hist_len));
    for (auto& v : history) v = rs.uniform(1.1, 1.3);
    return mg_integrate(p, duration, dt_dense, history, 1.2, history_seed);
}

RawSeries gen_mackey_glass_with_history(const MackeyGlassParams& p,
                                        double duration, double dt_dense,
                                        const std::vector<double>& history,
                                        double x0) {
    return mg_integrate(p, duration, dt_dense, history, x0, 0);
}

RawSeries gen_narma(const NarmaParams& p, Index length, std::uint64_t noise_seed,
                    double dt_dense) {
    require(p.order >= 1, "gen_narma: order must be >= 1");
    require(length > p.order, "gen_narma: length must exceed the model order");
    require(dt_dense > 0.0, "gen_narma: dt_dense must be positive");

    rng::Stream rs(noise_seed);
    std::vector<double> xi(static_cast<std::size_t>(length));
    for (auto& v : xi) v = rs.uniform(0.0, 0.5);

    std::vector<double> u(static_cast<std::size_t>(length), 0.0);
    const int n = p.order;
    for (Index t = 0; t + 1 < length; ++t) {
        double window = 0.0;
        for (int i = 0; i < n; ++i) {
            const Index j = t - i;
            if (j >= 0) window += u[static_cast<std::size_t>(j)];
        }
        const double xi_old =
            (t - (n - 1) >= 0) ? xi[static_cast<std::size_t>(t - (n - 1))] : 0.0;
        const double next = p.a1 * u[static_cast<std::size_t>(t)] +
                            p.a2 * u[static_cast<std::size_t>(t)] * window +
                            p.b * xi_old * xi[static_cast<std::size_t>(t)] + p.c;
        if (!std::isfinite(next) || std::abs(next) > 1e6) {
            std::ostringstream msg;
            msg << "gen_narma: sequence diverged at step " << t + 1;
            throw InstabilityError(msg.str());
        }
        u[static_cast<std::size_t>(t + 1)] = next;
    }

    RawSeries out;
    out.values.resize(1, length);
    for (Index i = 0; i < length; ++i) out.values(0, i) = u[static_cast<std::size_t>(i)];
    out.dt_dense = dt_dense;
    out.source.tag = "narma";
    out.source.params = {{"order", static_cast<double>(p.order)},
                         {"a1", p.a1}, {"a2", p.a2}, {"b", p.b}, {"c", p.c}};
    out.source.seed = noise_seed;
    return out;
}

RawSeries gen_abs_sine(double duration, double dt_dense) {
    require(duration > 0.0, "gen_abs_sine: duration must be positive");
    require(dt_dense > 0.0, "gen_abs_sine: dt_dense must be positive");
    const Index n = static_cast<Index>(std::floor(duration / dt_dense)) + 1;
    RawSeries out;
    out.values.resize(1, n);
    for (Index i = 0; i < n; ++i)
        out.values(0, i) = std::abs(std::sin(static_cast<double>(i) * dt_dense));
    out.dt_dense = dt_dense;
    out.source.tag = "abs_sine";
    return out;
}

double peak_frequency(const Eigen::VectorXd& x, double dt) {
    require(x.size() >= 4, "peak_frequency: series too short");
    require(dt > 0.0, "peak_frequency: dt must be positive");

    // Discard the leading 10% as transient; cap the window so the FFT stays
    // cheap on multi-million-sample series (bin width is still far below the
    // tolerances that matter downstream).
    constexpr Index kMaxWindow = Index(1) << 21;
    const Index skip = x.size() / 10;
    const Index n = std::min(x.size() - skip, kMaxWindow);

    std::vector<double> in(static_cast<std::size_t>(n));
    const double nm1 = static_cast<double>(n - 1);
    for (Index i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / nm1));
        in[static_cast<std::size_t>(i)] = w * x[skip + i];
    }

    const auto nc = static_cast<std::size_t>(n / 2 + 1);
    std::vector<fftw_complex> spec(nc);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), spec.data(),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    double best = 0.0;
    Index best_k = 0;
    for (std::size_t k = 1; k < nc; ++k) {
        const double pw = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
        if (pw > best) {
            best = pw;
            best_k = static_cast<Index>(k);
        }
    }
    if (best_k == 0 || best <= 0.0)
        throw RescaleFailure("peak_frequency: no non-DC spectral peak");
    return static_cast<double>(best_k) / (static_cast<double>(n) * dt);
}

Stimulus standardize_and_rescale(const std::vector<RawSeries>& raw) {
    require(!raw.empty(), "standardize_and_rescale: no input series");
    for (const auto& r : raw) r.validate();
    const double dt = raw.front().dt_dense;
    const Index len = raw.front().samples();
    for (const auto& r : raw) {
        require(std::abs(r.dt_dense - dt) < 1e-12 * dt,
                "standardize_and_rescale: mismatched dense grids");
        require(r.samples() == len,
                "standardize_and_rescale: mismatched series lengths");
    }

    Index K = 0;
    for (const auto& r : raw) K += r.components();

    Stimulus s;
    s.components.resize(K, len);
    Index row = 0;
    for (const auto& r : raw) {
        s.components.middleRows(row, r.components()) = r.values;
        s.sources.push_back(r.source);
        row += r.components();
    }

    double log_peak_sum = 0.0;
    for (Index k = 0; k < K; ++k) {
        auto comp = s.components.row(k);
        const double mean = comp.mean();
        comp.array() -= mean;
        const double var = comp.array().square().mean();
        if (var < 1e-24)
            throw ZeroVarianceError("standardize_and_rescale: constant component " +
                                    std::to_string(k));
        comp.array() /= std::sqrt(var);
        log_peak_sum += std::log(peak_frequency(comp.transpose(), dt));
    }

    const double compound = std::exp(log_peak_sum / static_cast<double>(K));
    // Scaling time by `compound` maps the compound frequency onto 1 Hz; the
    // sample values are untouched.
    s.time_scale = compound;
    s.dt_dense = dt * compound;
    s.compound_freq = 1.0;
    return s;
}

double sample(const Stimulus& s, double t, Index k) {
    if (k < 0 || k >= s.K())
        throw IndexError("stimulus sample: component index out of range");
    const double pos = t / s.dt_dense;
    if (pos <= 0.0) return s.components(k, 0);
    const auto last = static_cast<double>(s.samples() - 1);
    if (pos >= last) return s.components(k, s.samples() - 1);
    const auto i = static_cast<Index>(pos);
    const double frac = pos - static_cast<double>(i);
    return s.components(k, i) * (1.0 - frac) + s.components(k, i + 1) * frac;
}

}  // namespace hetres::stim
