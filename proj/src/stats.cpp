#include "mdla/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdla/errors.hpp"
#include "mdla/rng.hpp"

namespace mdla::stats {

double kolmogorov_q(double x) {
    if (x <= 0) return 1;
    if (x < 0.2) return 1;  // series converges slowly; Q is 1 to double precision here
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 1 : -1) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2 * s, 0.0, 1.0);
}

namespace {

double p_from(double d, double ne) {
    double r = std::sqrt(ne);
    return kolmogorov_q((r + 0.12 + 0.11 / r) * d);
}

}  // namespace

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0, na = a.size(), nb = b.size();
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return {d, p_from(d, na * nb / (na + nb))};
}

KSResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw ConfigError("ks_one_sample: empty sample");
    std::sort(a.begin(), a.end());
    double n = a.size(), d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double f = cdf(a[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, p_from(d, n)};
}

MeanVar mean_var(const std::vector<double>& v) {
    MeanVar r;
    r.n = static_cast<long>(v.size());
    if (v.empty()) return r;
    double s = 0;
    for (double x : v) s += x;
    r.mean = s / r.n;
    double q = 0;
    for (double x : v) q += (x - r.mean) * (x - r.mean);
    r.var = r.n > 1 ? q / (r.n - 1) : 0;
    r.stderr_ = std::sqrt(r.var / r.n);
    return r;
}

double variance_stderr(const std::vector<double>& v) {
    auto mv = mean_var(v);
    if (mv.n < 4) return std::numeric_limits<double>::infinity();
    double m4 = 0;
    for (double x : v) m4 += std::pow(x - mv.mean, 4);
    m4 /= mv.n;
    double n = mv.n;
    double var_of_var = (m4 - (n - 3) / (n - 1) * mv.var * mv.var) / n;
    return std::sqrt(std::max(var_of_var, 0.0));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ConfigError("quantile: empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a * std::pow(b / a, n > 1 ? double(i) / (n - 1) : 0.0);
    return g;
}

namespace {

std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
    double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

std::pair<double, double> fit_rows(const std::vector<double>& lt, const std::vector<std::vector<double>>& values,
                                   const std::vector<std::size_t>& rows) {
    std::vector<double> ly(lt.size());
    for (std::size_t k = 0; k < lt.size(); ++k) {
        double s = 0;
        for (auto r : rows) s += values[r][k];
        double m = s / rows.size();
        if (!(m > 0)) throw RangeError("fit_exponent: zero mean count inside the fit range");
        ly[k] = std::log(m);
    }
    return ols(lt, ly);
}

}  // namespace

FitResult fit_exponent(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& values, int n_boot,
                       std::uint64_t seed) {
    if (values.size() < 10) throw ConfigError("fit_exponent: need at least 10 trajectories");
    if (t_grid.size() < 2 || !(t_grid.back() / t_grid.front() >= 10 - 1e-9))
        throw ConfigError("fit_exponent: need t_max/t_min >= 10");
    std::vector<double> lt;
    for (double t : t_grid) lt.push_back(std::log(t));
    std::vector<std::size_t> all(values.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto [slope, icpt] = fit_rows(lt, values, all);
    FitResult r;
    r.slope = slope;
    r.intercept = icpt;
    r.t_min = t_grid.front();
    r.t_max = t_grid.back();
    r.n_trajectories = static_cast<long>(values.size());
    Philox rng(seed, 77);
    std::vector<double> boot;
    std::vector<std::size_t> rows(values.size());
    for (int b = 0; b < n_boot; ++b) {
        for (auto& x : rows) x = rng.below(values.size());
        try {
            boot.push_back(fit_rows(lt, values, rows).first);
        } catch (const RangeError&) {
        }
    }
    if (boot.size() >= 2) {
        r.ci_lo = quantile(boot, 0.025);
        r.ci_hi = quantile(boot, 0.975);
    } else {
        r.ci_lo = r.ci_hi = slope;
    }
    // a degenerate resample spread (identical trajectories) still reports a positive width
    if (r.ci_hi - r.ci_lo <= 0) {
        r.ci_lo = slope - 1e-12;
        r.ci_hi = slope + 1e-12;
    }
    return r;
}

FitResult fit_exponent_jumps(const std::vector<std::vector<double>>& jumps, double t_min, double t_max, int n_points,
                             int n_boot, std::uint64_t seed) {
    auto grid = log_grid(t_min, t_max, n_points);
    std::vector<std::vector<double>> vals;
    for (auto& j : jumps) {
        std::vector<double> row;
        for (double t : grid) row.push_back(double(std::upper_bound(j.begin(), j.end(), t) - j.begin()));
        vals.push_back(row);
    }
    return fit_exponent(grid, vals, n_boot, seed);
}

}  // namespace mdla::stats
