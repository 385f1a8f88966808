#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mdla::stats {

struct KSResult {
    double statistic = 0;
    double p_value = 1;
};

// Kolmogorov distribution survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2)
double kolmogorov_q(double x);

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KSResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

struct MeanVar {
    double mean = 0, var = 0, stderr_ = 0;
    long n = 0;
};
MeanVar mean_var(const std::vector<double>& v);
// standard error of the sample variance (from the fourth central moment)
double variance_stderr(const std::vector<double>& v);

double quantile(std::vector<double> v, double q);

struct FitResult {
    double slope = 0, intercept = 0;
    double ci_lo = 0, ci_hi = 0;  // bootstrap percentile 95% interval for the slope
    double t_min = 0, t_max = 0;
    long n_trajectories = 0;
};

// least squares of log E[X_t] on log t over a log-spaced grid; bootstrap over trajectories.
// values[i][k] = X of trajectory i at t_grid[k]
FitResult fit_exponent(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& values,
                       int n_boot = 1000, std::uint64_t seed = 0);
// trajectories given as sorted jump times (X_t = #{jumps <= t})
FitResult fit_exponent_jumps(const std::vector<std::vector<double>>& jumps, double t_min, double t_max,
                             int n_points = 20, int n_boot = 1000, std::uint64_t seed = 0);

std::vector<double> log_grid(double a, double b, int n);

}  // namespace mdla::stats
