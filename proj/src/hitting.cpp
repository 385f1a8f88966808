#include "mdla/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <boost/random/poisson_distribution.hpp>

#include "mdla/errors.hpp"
#include "mdla/parallel.hpp"

namespace mdla::hitting {

namespace {

double xi_of(double a) { return 1 / (1 + 2 * a); }

int resolve_umax(double a, int u_max) { return u_max > 0 ? u_max : auto_u_max(a); }

// plain chain from U = u0 with rate-a Poisson barrier; returns hit time or +inf (certified)
struct ChainResult {
    bool hit;
    double time;
    long u;
};

ChainResult run_chain(double a, long u0, int umax, Philox& rng) {
    const double rate = 1 + a, p_up = (a + 0.5) / (1 + a);
    long u = u0;
    double t = 0;
    while (u < umax) {
        t += rng.exponential() / rate;
        if (rng.uniform() < p_up)
            ++u;
        else if (--u == 0)
            return {true, t, 0};
    }
    return {false, t, u};
}

std::vector<double> poisson_times(double rate, double t0, double t1, Philox& rng) {
    std::vector<double> out;
    if (rate <= 0) return out;
    double t = t0;
    for (;;) {
        t += rng.exponential() / rate;
        if (t >= t1) return out;
        out.push_back(t);
    }
}

}  // namespace

void HittingConfig::validate() const {
    if (!(alpha >= 0)) throw ConfigError("hitting: alpha must be >= 0");
    if (u_max < 0) throw ConfigError("hitting: u_max must be >= 1 (or 0 for automatic)");
    if (extra_jumps.size() > 2) throw ConfigError("hitting: at most two extra jumps");
    if (!std::is_sorted(extra_jumps.begin(), extra_jumps.end())) throw ConfigError("hitting: extra_jumps must be sorted");
    for (double e : extra_jumps)
        if (e < 0) throw ConfigError("hitting: negative extra jump time");
    if (alpha == 0 && u_max == 0 && !std::isfinite(horizon_cap))
        throw ConfigError("hitting: alpha = 0 needs a finite horizon_cap or explicit u_max");
    if (n_samples < 1) throw ConfigError("hitting: n_samples must be positive");
}

int auto_u_max(double alpha, double bias) {
    if (alpha <= 0) return std::numeric_limits<int>::max();
    double u = std::log(bias) / std::log(xi_of(alpha));
    return std::max(1, static_cast<int>(std::ceil(u)));
}

HittingSample sample_hitting(const HittingConfig& cfg, Philox& rng) {
    const double a = cfg.alpha, xi = xi_of(a);
    const int umax = resolve_umax(a, cfg.u_max);
    const double rate = 1 + a, p_up = (a + 0.5) / (1 + a);
    long u = 1;
    double t = 0;
    std::size_t k = 0;
    for (;;) {
        if (u >= umax) return {Outcome::certified_infinite, t, std::pow(xi, static_cast<double>(u)), u};
        double tn = t + rng.exponential() / rate;
        if (k < cfg.extra_jumps.size() && cfg.extra_jumps[k] <= tn) {
            // forced barrier jump first; exponential clocks are memoryless so the draw is discarded
            t = cfg.extra_jumps[k++];
            if (t > cfg.horizon_cap) return {Outcome::censored, cfg.horizon_cap, 0, u};
            ++u;
            continue;
        }
        if (tn > cfg.horizon_cap) return {Outcome::censored, cfg.horizon_cap, 0, u};
        t = tn;
        if (rng.uniform() < p_up)
            ++u;
        else if (--u == 0)
            return {Outcome::hit, t, 0, 0};
    }
}

HitSummary estimate_hit_probability(const HittingConfig& cfg, bool keep_times) {
    cfg.validate();
    Chunks ch(static_cast<std::size_t>(cfg.n_samples));
    std::vector<HitSummary> parts(ch.n);
    parallel_for(ch.n, [&](std::size_t c) {
        Philox rng(cfg.seed, c);
        auto& p = parts[c];
        for (std::size_t i = ch.begin(c); i < ch.end(c); ++i) {
            auto s = sample_hitting(cfg, rng);
            ++p.n;
            switch (s.outcome) {
                case Outcome::hit:
                    ++p.hits;
                    if (keep_times) p.hit_times.push_back(s.time);
                    break;
                case Outcome::certified_infinite:
                    ++p.infinite;
                    p.bias_bound = std::max(p.bias_bound, s.residual_error);
                    break;
                case Outcome::censored: ++p.censored; break;
            }
        }
    });
    HitSummary out;
    for (auto& p : parts) {
        out.n += p.n;
        out.hits += p.hits;
        out.infinite += p.infinite;
        out.censored += p.censored;
        out.bias_bound = std::max(out.bias_bound, p.bias_bound);
        out.hit_times.insert(out.hit_times.end(), p.hit_times.begin(), p.hit_times.end());
    }
    out.p = double(out.hits) / out.n;
    out.stderr_ = std::sqrt(out.p * (1 - out.p) / out.n);
    return out;
}

std::vector<CurvePoint> estimate_K(double alpha, const std::vector<double>& t_grid, long n, std::uint64_t seed,
                                   int u_max) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ConfigError("estimate_K: t_grid must be increasing");
    HittingConfig cfg;
    cfg.alpha = alpha;
    cfg.u_max = u_max;
    cfg.n_samples = n;
    cfg.seed = seed;
    auto hs = estimate_hit_probability(cfg, true);
    // count of hit times strictly greater than t_j
    std::vector<double> times = hs.hit_times;
    std::sort(times.begin(), times.end());
    const double c = alpha * (1 + 2 * alpha);
    std::vector<CurvePoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        auto above = times.end() - std::upper_bound(times.begin(), times.end(), t);
        double p = double(above) / n;
        out.push_back({t, c * p, c * std::sqrt(p * (1 - p) / n)});
    }
    return out;
}

namespace {

// walk against a prescribed barrier; true if W <= Y up to the tail (or certified beyond the last jump)
bool survives(const UnitStep& Y, const SpeedOptions& opt, int umax, Philox& rng) {
    const double tail = Y.horizon();
    const double ca = opt.continuation_alpha;
    const double c0 = std::max(opt.continuation_after, Y.jumps.empty() ? 0.0 : Y.jumps.back());
    long u = 1;
    double t = 0;
    std::size_t k = 0;
    for (;;) {
        bool cont = ca > 0 && t >= c0 && !std::isfinite(tail);
        if (cont && k >= Y.jumps.size() && u >= umax) return true;
        double rate = 1 + (cont ? ca : 0);
        double tn = t + rng.exponential() / rate;
        double next_jump = k < Y.jumps.size() ? Y.jumps[k] : std::numeric_limits<double>::infinity();
        double barrier = std::min(next_jump, tail);
        if (!cont && ca > 0 && !std::isfinite(tail)) barrier = std::min(barrier, c0);
        if (barrier <= tn) {
            t = barrier;
            if (t >= tail) return true;
            if (t == next_jump) {
                ++u;
                ++k;
            }
            continue;
        }
        t = tn;
        if (cont && rng.uniform() * rate < ca) {
            ++u;
            continue;
        }
        if (rng.uniform() < 0.5)
            ++u;
        else if (--u == 0)
            return false;
    }
}

}  // namespace

Estimate estimate_speed(const UnitStep& Y, long n, std::uint64_t seed, const SpeedOptions& opt) {
    Y.validate();
    if (n < 1) throw ConfigError("estimate_speed: n must be positive");
    Estimate e;
    e.n = n;
    bool finite_everywhere = !Y.tail_infinite_after.has_value();
    if (finite_everywhere && opt.continuation_alpha <= 0) {
        // bounded barrier: the recurrent walk exceeds it almost surely
        return e;
    }
    if (Y.tail_infinite_after && *Y.tail_infinite_after <= 0) {
        e.value = 0.5;
        return e;
    }
    const int umax = resolve_umax(opt.continuation_alpha, opt.u_max);
    Chunks ch(static_cast<std::size_t>(n));
    std::vector<long> ok(ch.n, 0);
    parallel_for(ch.n, [&](std::size_t c) {
        Philox rng(seed, c);
        for (std::size_t i = ch.begin(c); i < ch.end(c); ++i) ok[c] += survives(Y, opt, umax, rng);
    });
    long tot = 0;
    for (long v : ok) tot += v;
    double p = double(tot) / n;
    e.value = 0.5 * p;
    e.stderr_ = 0.5 * std::sqrt(p * (1 - p) / n);
    return e;
}

Estimate estimate_speed_poisson(double alpha, long n, std::uint64_t seed, int u_max) {
    HittingConfig cfg;
    cfg.alpha = alpha;
    cfg.u_max = u_max;
    cfg.n_samples = n;
    cfg.seed = seed;
    auto hs = estimate_hit_probability(cfg);
    Estimate e;
    e.n = n;
    e.value = 0.5 * (1 - hs.p);
    e.stderr_ = 0.5 * hs.stderr_;
    return e;
}

JEstimate estimate_J(double alpha, double u, double s, long n, std::uint64_t seed, int u_max) {
    if (!(u >= 0 && u <= s)) throw ConfigError("estimate_J: need 0 <= u <= s");
    if (!(alpha > 0)) throw ConfigError("estimate_J: alpha must be positive");
    const int umax = resolve_umax(alpha, u_max);
    struct Acc {
        double a = 0, b = 0, d = 0, d2 = 0;
    };
    Chunks ch(static_cast<std::size_t>(n));
    std::vector<Acc> parts(ch.n);
    parallel_for(ch.n, [&](std::size_t c) {
        Philox rng(seed, c);
        auto& acc = parts[c];
        for (std::size_t i = ch.begin(c); i < ch.end(c); ++i) {
            auto r = run_chain(alpha, 1, umax, rng);
            if (!r.hit || r.time <= u) continue;  // T = inf, or T = T_u <= u < s
            // after T the extra jump keeps U at 1; T_u = T + an independent copy of T
            double b = r.time > s ? 1.0 : 0.0;
            auto r2 = run_chain(alpha, 1, umax, rng);
            double a = (r2.hit && r.time + r2.time > s) ? 1.0 : 0.0;
            acc.a += a;
            acc.b += b;
            acc.d += a - b;
            acc.d2 += (a - b) * (a - b);
        }
    });
    Acc t;
    for (auto& p : parts) {
        t.a += p.a;
        t.b += p.b;
        t.d += p.d;
        t.d2 += p.d2;
    }
    JEstimate e;
    e.n = n;
    e.p_extra = t.a / n;
    e.p_plain = t.b / n;
    e.value = t.d / n;
    e.var_paired = t.d2 / n - e.value * e.value;
    e.var_independent = e.p_extra * (1 - e.p_extra) + e.p_plain * (1 - e.p_plain);
    e.stderr_ = std::sqrt(e.var_paired / n);
    return e;
}

DtResult verify_Dt_identity(double alpha, double t, long n_outer, long n_inner, std::uint64_t seed, bool no_jumps) {
    if (!(alpha > 0) || t < 0 || n_outer < 2 || n_inner < 1) throw ConfigError("verify_Dt_identity: bad arguments");
    const double xi = xi_of(alpha), coef = 2 * alpha / (1 + 2 * alpha);
    const int umax = auto_u_max(alpha);
    struct Acc {
        double r = 0, r2 = 0, ra = 0, direct = 0, rhs = 0;
    };
    Chunks ch(static_cast<std::size_t>(n_outer), 64);
    std::vector<Acc> parts(ch.n);
    parallel_for(ch.n, [&](std::size_t c) {
        Philox rng(seed, c);
        auto& acc = parts[c];
        for (std::size_t o = ch.begin(c); o < ch.end(c); ++o) {
            std::vector<double> ys = no_jumps ? std::vector<double>{} : poisson_times(alpha, 0, t, rng);
            double dsum = 0, rsum = 0;
            for (long i = 0; i < n_inner; ++i) {
                // walk on [0, t] against the fixed ys; H-integrand 1{T>s} xi^{U_s} integrated along the path
                long u = 1;
                double s = 0, jump_part = 0, leb_part = 0;
                std::size_t k = 0;
                bool hit = false;
                while (true) {
                    double sn = s + rng.exponential();
                    double nj = k < ys.size() ? ys[k] : std::numeric_limits<double>::infinity();
                    double stop = std::min({sn, nj, t});
                    leb_part += (stop - s) * std::pow(xi, double(u));
                    s = stop;
                    if (stop == t) break;
                    if (stop == nj) {
                        jump_part += std::pow(xi, double(u));  // U just before the barrier jump
                        ++u;
                        ++k;
                        continue;
                    }
                    if (rng.uniform() < 0.5)
                        ++u;
                    else if (--u == 0) {
                        hit = true;
                        break;
                    }
                }
                double direct = 1.0;
                if (!hit) direct = run_chain(alpha, u, umax, rng).hit ? 1.0 : 0.0;
                dsum += direct;
                rsum += xi - coef * (jump_part - alpha * leb_part);
            }
            double d = dsum / n_inner, r = rsum / n_inner, res = d - r;
            acc.r += res;
            acc.r2 += res * res;
            acc.ra += std::abs(res);
            acc.direct += d;
            acc.rhs += r;
        }
    });
    Acc a;
    for (auto& p : parts) {
        a.r += p.r;
        a.r2 += p.r2;
        a.ra += p.ra;
        a.direct += p.direct;
        a.rhs += p.rhs;
    }
    DtResult out;
    out.n_outer = n_outer;
    out.n_inner = n_inner;
    out.mean_residual = a.r / n_outer;
    double var = (a.r2 / n_outer - out.mean_residual * out.mean_residual) * n_outer / (n_outer - 1);
    out.stderr_ = std::sqrt(std::max(var, 0.0) / n_outer);
    out.mean_abs_residual = a.ra / n_outer;
    out.mean_direct = a.direct / n_outer;
    out.mean_rhs = a.rhs / n_outer;
    return out;
}

}  // namespace mdla::hitting
