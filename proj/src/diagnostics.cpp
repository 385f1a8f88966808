#include "mdla/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mdla/errors.hpp"
#include "mdla/quadrature.hpp"
#include "mdla/rng.hpp"
#include "mdla/stats.hpp"

namespace mdla::diagnostics {

std::vector<double> absorptions(const model::RunRecord& run, double t0_minus, double t) {
    std::vector<double> p;
    for (double x : run.history)
        if (x >= t0_minus && x <= t) p.push_back(x);
    for (double x : run.jumps) {
        if (x > t) break;
        if (x >= t0_minus) p.push_back(x);
    }
    std::sort(p.begin(), p.end());
    return p;
}

double first_order(const std::vector<double>& points, const kernels::KernelTable& table, double t) {
    double s = 0;
    for (double x : points)
        if (x <= t) s += table.k(t - x);
    return s;
}

double first_order(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus, double t) {
    return first_order(absorptions(run, t0_minus, t), table, t);
}

double smoothed_speed(const std::vector<double>& points, const kernels::KernelTable& table, double t) {
    double s = 0;
    for (double x : points)
        if (x <= t) s += table.survival(t - x);
    return table.params.kstar_limit * s;
}

double smoothed_speed(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus, double t) {
    return smoothed_speed(absorptions(run, t0_minus, t), table, t);
}

// ---------------------------------------------------------------- second order

namespace {

// panel ends on [lo, hi], geometric away from both endpoints (J varies fastest near the
// diagonal and near the origin); the middle is covered by the larger panels
std::vector<double> panels(double lo, double hi, double first = 0.05, double ratio = 1.3) {
    std::vector<double> b{lo, hi};
    double len = hi - lo;
    if (!(len > 0)) return {lo};
    for (double d = std::min(first, len / 2); d < len / 2; d *= ratio) {
        b.push_back(lo + d);
        b.push_back(hi - d);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

template <class F>
double gauss(const F& f, double a, double b) {
    const auto& r = gauss_legendre(8);
    double m = 0.5 * (a + b), h = 0.5 * (b - a), s = 0;
    for (std::size_t k = 0; k < r.x.size(); ++k) s += r.w[k] * f(m + h * r.x[k]);
    return h * s;
}

template <class F>
double integrate(const F& f, double lo, double hi) {
    auto b = panels(lo, hi);
    double s = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) s += gauss(f, b[i], b[i + 1]);
    return s;
}

}  // namespace

SecondOrder::SecondOrder(const kernels::KernelTable& table, double window, double h0, double ratio)
    : table_(&table), lattice_(table, window, h0, ratio), window_(window) {
    if (!(window > 0)) throw ConfigError("SecondOrder: window must be positive");
    leb_window_ = lebesgue_double(window);
}

double SecondOrder::int_threshold(double a, double W) const {
    W = std::min(W, window_);
    if (W <= a) return 0;
    return integrate([&](double b) { return lattice_(a, b); }, a, W);
}

double SecondOrder::int_jump(double b) const {
    if (b <= 0 || b > window_) return 0;
    return integrate([&](double a) { return lattice_(a, b); }, 0.0, b);
}

double SecondOrder::lebesgue_double(double W) const {
    W = std::min(W, window_);
    if (W <= 0) return 0;
    if (W == window_ && leb_window_ != 0) return leb_window_;
    return integrate([&](double b) { return int_jump(b); }, 0.0, W);
}

SecondOrder::Parts SecondOrder::operator()(const std::vector<double>& pts, double t0_minus, double t) const {
    const double a = table_->alpha;
    Parts p;
    std::vector<double> x;
    for (double v : pts)
        if (v >= t0_minus && v <= t) x.push_back(v);
    std::sort(x.begin(), x.end());
    double W = t - t0_minus;
    p.truncated = W > window_ * (1 + 1e-12);
    p.S1 = first_order(x, *table_, t);
    // pairs u < s: J(t - s, t - u)
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (x[j] < x[i]) p.point_point += lattice_(t - x[i], t - x[j]);
    for (double v : x) {
        p.point_leb += int_threshold(t - v, W);
        p.leb_point += int_jump(t - v);
    }
    p.leb_leb = lebesgue_double(W);
    p.jterm = p.point_point - a * p.point_leb - a * p.leb_point + a * a * p.leb_leb;
    double q = 1 + 2 * a;
    p.S2 = 2 * a * a / (q * q) + p.S1 / (q * q) + a / q * p.jterm;
    return p;
}

SecondOrder::Parts SecondOrder::operator()(const model::RunRecord& run, double t0_minus, double t) const {
    return (*this)(absorptions(run, t0_minus, t), t0_minus, t);
}

double rearrangement_residual(const SecondOrder::Parts& p, double a) {
    double q = 1 + 2 * a;
    double rhs = 2 * a * a / (q * q) - (4 * a + 4 * a * a) / (q * q) * p.S1 + a / q * p.jterm;
    return (p.S2 - p.S1) - rhs;
}

SpeedSeries speed_series(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus,
                         const std::vector<double>& grid, const SecondOrder* so) {
    SpeedSeries s;
    auto pts = absorptions(run, t0_minus, grid.empty() ? t0_minus : grid.back());
    for (double t : grid) {
        if (t > run.config.horizon) throw RangeError("speed_series: t beyond the run horizon");
        s.t.push_back(t);
        s.h.push_back(run.hazard_at(t));
        s.S1.push_back(first_order(pts, table, t));
        s.L.push_back(smoothed_speed(pts, table, t));
        if (so) s.S2.push_back((*so)(pts, t0_minus, t).S2);
    }
    return s;
}

// ---------------------------------------------------------------- increments

IncrementStats increment_stats(const std::vector<double>& inc, double alpha, double delta, int n_boot,
                               std::uint64_t seed) {
    if (inc.size() < 10) throw ConfigError("increment_stats: need at least 10 runs");
    IncrementStats r;
    auto mv = stats::mean_var(inc);
    r.n = mv.n;
    r.mean = mv.mean;
    r.var = mv.var;
    r.mean_se = mv.stderr_;
    r.var_se = stats::variance_stderr(inc);
    r.predicted = 4 * std::pow(alpha, 5) * delta;
    r.ratio = r.var / r.predicted;
    Philox rng(seed, 91);
    std::vector<double> boot, re(inc.size());
    for (int b = 0; b < n_boot; ++b) {
        for (auto& x : re) x = inc[rng.below(inc.size())];
        boot.push_back(stats::mean_var(re).var);
    }
    if (!boot.empty()) {
        r.var_lo = stats::quantile(boot, 0.025);
        r.var_hi = stats::quantile(boot, 0.975);
    }
    return r;
}

IncrementStats increment_stats(const std::vector<model::RunRecord>& runs, const kernels::KernelTable& table,
                               double t0_minus, double t0, double delta, int n_boot, std::uint64_t seed) {
    std::vector<double> inc;
    for (auto& r : runs) {
        if (t0 + delta > r.config.horizon) throw RangeError("increment_stats: window beyond the run horizon");
        auto pts = absorptions(r, t0_minus, t0 + delta);
        inc.push_back(smoothed_speed(pts, table, t0 + delta) - smoothed_speed(pts, table, t0));
    }
    return increment_stats(inc, table.alpha, delta, n_boot, seed);
}

// ---------------------------------------------------------------- gap

GapStats approximation_gap(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus,
                           double t_from, double t_to, int n_grid) {
    if (!(t_to > t_from) || n_grid < 2) throw ConfigError("approximation_gap: empty window");
    GapStats g;
    auto pts = absorptions(run, t0_minus, t_to);
    double dt = (t_to - t_from) / (n_grid - 1);
    double prev_abs = 0, prev_h = 0;
    long below = 0;
    for (int k = 0; k < n_grid; ++k) {
        double t = t_from + k * dt;
        double h = run.hazard_at(t), s1 = first_order(pts, table, t);
        double gap = std::abs(h - s1);
        if (k) {
            g.integral_abs += 0.5 * (gap + prev_abs) * dt;
            g.integral_h += 0.5 * (h + prev_h) * dt;
        }
        prev_abs = gap;
        prev_h = h;
        auto it = std::upper_bound(pts.begin(), pts.end(), t);
        auto dist = [&](long i) {
            long idx = static_cast<long>(it - pts.begin()) - i;
            return idx >= 0 ? t - pts[idx] : t - t0_minus;
        };
        double sig = 1 / std::sqrt((dist(1) + 1) * (dist(2) + 1));
        double z = (h - s1) / sig;
        g.normalized.push_back(z);
        below += z <= 1;
    }
    g.frac_normalized_below_one = double(below) / n_grid;
    return g;
}

}  // namespace mdla::diagnostics
