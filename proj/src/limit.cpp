#include "mdla/limit.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/non_central_chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "mdla/parallel.hpp"
#include "mdla/rng.hpp"

namespace mdla::limit {

namespace {

constexpr double dim = 8.0 / 3;  // Bessel dimension: dV = (dim-1)/(2V) dt + dB

double v_from_z(double z) { return std::isinf(z) ? 0.0 : std::pow(z, -1.5) / 3; }

}  // namespace

void LimitConfig::validate() const {
    if (!(s_max > 0)) throw ConfigError("limit: s_max must be positive");
    if (!(grid.first > 0 && grid.ratio > 1 && grid.max_step > 0)) throw ConfigError("limit: bad time grid");
    if (!(z0 > 0)) throw ConfigError("limit: z0 must be positive (or inf)");
    if (n_paths < 1) throw ConfigError("limit: n_paths must be >= 1");
    if (!(euler_step > 0 && step_factor > 0 && explosion_cap > 1)) throw ConfigError("limit: bad step parameters");
    if (generalized && !(generalized->sigma2 >= 0)) throw ConfigError("limit: sigma^2 must be >= 0");
    if ((generalized || scheme == Scheme::euler_z) && std::isinf(z0))
        throw ConfigError("limit: the Z-level Euler scheme needs a finite z0");
}

std::vector<double> time_grid(const LimitConfig& cfg) {
    cfg.validate();
    std::vector<double> g{0.0};
    double S = cfg.s_max, t = cfg.grid.first * S;
    while (t < S) {
        g.push_back(t);
        t += std::min(t * (cfg.grid.ratio - 1), cfg.grid.max_step * S);
    }
    g.push_back(S);
    for (double x : cfg.extra_times)
        if (x > 0 && x <= S) g.push_back(x);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return b - a <= 1e-14 * b; }), g.end());
    return g;
}

LimitPath sample_bessel_path(const LimitConfig& cfg, std::uint64_t path) {
    LimitPath p;
    p.times = time_grid(cfg);
    Philox rng(cfg.seed, path);
    p.V.resize(p.times.size());
    p.V[0] = v_from_z(cfg.z0);
    if (cfg.scheme == Scheme::exact_besq) {
        // X = V^2 is a squared Bessel process: X_{t+h} = h * chi'^2_dim(X_t / h)
        for (std::size_t i = 1; i < p.times.size(); ++i) {
            double h = p.times[i] - p.times[i - 1];
            double x = p.V[i - 1] * p.V[i - 1];
            boost::random::non_central_chi_squared_distribution<double> nc(dim, x / h);
            p.V[i] = std::sqrt(h * nc(rng));
        }
        return p;
    }
    if (cfg.scheme != Scheme::euler_bessel) throw ConfigError("sample_bessel_path: scheme must be exact_besq or euler_bessel");
    boost::random::normal_distribution<double> N;
    const double b = (dim - 1) / 2;
    // one Euler step; on V <= 0 the Brownian increment is split by a bridge and both halves retried
    auto step = [&](auto& self, double v, double h, double dB, int depth) -> double {
        double w = v + b * h / v + dB;
        if (w > 0) return w;
        if (depth > 30) throw NumericError("euler_bessel: step keeps crossing 0", w);
        double d1 = 0.5 * dB + std::sqrt(h / 4) * N(rng);
        double mid = self(self, v, h / 2, d1, depth + 1);
        return self(self, mid, h / 2, dB - d1, depth + 1);
    };
    double v = p.V[0];
    for (std::size_t i = 1; i < p.times.size(); ++i) {
        double t = p.times[i - 1], end = p.times[i];
        while (t < end) {
            double h = std::min(cfg.euler_step, end - t);
            if (v == 0) {
                // guard: the drift is singular at 0, use the exact law of the first step
                boost::random::non_central_chi_squared_distribution<double> nc(dim, 0.0);
                v = std::sqrt(h * nc(rng));
            } else {
                v = step(step, v, h, std::sqrt(h) * N(rng), 0);
            }
            t += h;
        }
        p.V[i] = v;
    }
    return p;
}

void z_path(LimitPath& p) {
    p.Z.resize(p.V.size());
    p.z_infinite_at_zero = false;
    for (std::size_t i = 0; i < p.V.size(); ++i) {
        if (p.V[i] > 0) {
            p.Z[i] = std::pow(3 * p.V[i], -2.0 / 3);
        } else {
            p.Z[i] = std::numeric_limits<double>::quiet_NaN();
            if (i == 0) p.z_infinite_at_zero = true;
        }
    }
}

void integrate_z(LimitPath& p) {
    std::size_t n = p.times.size();
    p.cumZ.assign(n, 0.0);
    if (n < 2) return;
    std::size_t i0 = 1;
    if (p.z_infinite_at_zero || !std::isfinite(p.Z[0])) {
        double t1 = p.times[1], z1 = p.Z[1];
        double q = 1.0 / 3;
        if (n > 2) q = std::log(z1 / p.Z[2]) / std::log(p.times[2] / t1);
        q = std::clamp(q, -2.0, 0.9);
        p.cumZ[1] = z1 * t1 / (1 - q);
        i0 = 2;
    }
    for (std::size_t i = i0; i < n; ++i) {
        double a = p.Z[i - 1], b = p.Z[i];
        p.cumZ[i] = p.cumZ[i - 1] + 0.5 * (a + b) * (p.times[i] - p.times[i - 1]);
    }
}

LimitPath euler_general(const LimitConfig& cfg, std::uint64_t path) {
    LimitPath p;
    p.times = time_grid(cfg);
    if (std::isinf(cfg.z0)) throw ConfigError("euler_general: z0 must be finite");
    Generalized gen = cfg.generalized.value_or(Generalized{});
    const double sigma = std::sqrt(gen.sigma2);
    // Y = log Z: dY = c Z^3 dt + 2 sigma Z^{3/2} dB, c = drift - 2 sigma^2.
    // The drift flow is solved exactly (Z^-3 decreases linearly at rate 3c); the noise is an Euler step.
    const double c = gen.drift() - 2 * gen.sigma2;
    const double cap = std::log(cfg.explosion_cap * cfg.z0);
    Philox rng(cfg.seed, path);
    boost::random::normal_distribution<double> N;

    std::size_t n = p.times.size();
    p.Z.assign(n, std::numeric_limits<double>::infinity());
    p.V.assign(n, 0.0);
    double y = std::log(cfg.z0);
    p.Z[0] = cfg.z0;
    p.V[0] = v_from_z(cfg.z0);
    for (std::size_t i = 1; i < n && !p.exploded; ++i) {
        double t = p.times[i - 1], end = p.times[i];
        while (t < end) {
            double z3 = std::exp(3 * y);
            double h = std::min(cfg.step_factor / z3, end - t);
            if (!(h > 1e-300)) throw NumericError("euler_general: step underflow", h);
            double u = 1 / z3 - 3 * c * h;
            if (u <= 0) {
                p.exploded = true;
                p.explosion_time = t + 1 / (3 * c * z3);
                break;
            }
            double y_new = -std::log(u) / 3 + 2 * sigma * std::exp(1.5 * y) * std::sqrt(h) * N(rng);
            y = y_new;
            t += h;
            if (y > cap) {
                p.exploded = true;
                p.explosion_time = t;
                break;
            }
        }
        if (p.exploded) break;
        p.Z[i] = std::exp(y);
        p.V[i] = v_from_z(p.Z[i]);
    }
    return p;
}

LimitPath sample_path(const LimitConfig& cfg, std::uint64_t path) {
    LimitPath p;
    if (cfg.generalized || cfg.scheme == Scheme::euler_z) {
        p = euler_general(cfg, path);
    } else {
        p = sample_bessel_path(cfg, path);
        z_path(p);
    }
    integrate_z(p);
    return p;
}

std::vector<std::vector<double>> sample_functional(LimitConfig cfg, const std::vector<double>& s_points) {
    for (double s : s_points) {
        if (!(s > 0 && s <= cfg.s_max)) throw RangeError("sample_functional: s outside (0, s_max]");
        cfg.extra_times.push_back(s);
    }
    auto grid = time_grid(cfg);
    std::vector<std::size_t> idx;
    for (double s : s_points) {
        auto it = std::lower_bound(grid.begin(), grid.end(), s * (1 - 1e-14));
        idx.push_back(static_cast<std::size_t>(it - grid.begin()));
    }
    std::vector<std::vector<double>> out(cfg.n_paths);
    parallel_for(cfg.n_paths, [&](std::size_t k) {
        auto p = sample_path(cfg, k);
        for (auto i : idx) out[k].push_back(p.cumZ[i]);
    });
    return out;
}

}  // namespace mdla::limit
