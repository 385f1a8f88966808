#pragma once

#include <memory>
#include <vector>

#include "mdla/kernels.hpp"
#include "mdla/model.hpp"

namespace mdla::diagnostics {

// absorption times of a run in [t0_minus, t]: prescribed history and front jumps
std::vector<double> absorptions(const model::RunRecord& run, double t0_minus, double t);

// S1(t) = sum K(t - s_i)
double first_order(const std::vector<double>& points, const kernels::KernelTable& table, double t);
double first_order(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus, double t);

// L(t) = K*_inf sum F(t - s_i), F(x) = int_x^inf K
double smoothed_speed(const std::vector<double>& points, const kernels::KernelTable& table, double t);
double smoothed_speed(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus, double t);

// Second-order approximation. The J lattice and the run-independent Lebesgue-Lebesgue
// integral are built once for a window length W = t - t0_minus and reused.
class SecondOrder {
public:
    SecondOrder(const kernels::KernelTable& table, double window, double h0 = 0.05, double ratio = 1.02);

    struct Parts {
        double S1 = 0, S2 = 0;
        double jterm = 0;  // double integral of J against dPi^ dPi^
        double point_point = 0, point_leb = 0, leb_point = 0, leb_leb = 0;
        bool truncated = false;  // window longer than the J tabulation
    };
    Parts operator()(const std::vector<double>& points, double t0_minus, double t) const;
    Parts operator()(const model::RunRecord& run, double t0_minus, double t) const;

    double J(double a, double b) const { return lattice_(a, b); }
    // int_a^W J(a, b) db and int_0^b J(a, b) da
    double int_threshold(double a, double W) const;
    double int_jump(double b) const;
    // int_0^W int_0^b J(a, b) da db
    double lebesgue_double(double W) const;
    double window() const { return window_; }

private:
    const kernels::KernelTable* table_;
    kernels::JLattice lattice_;
    double window_;
    double leb_window_ = 0;
};

// S2 - S1 minus the closed rearrangement; zero up to rounding
double rearrangement_residual(const SecondOrder::Parts& p, double alpha);

struct SpeedSeries {
    std::vector<double> t, h, S1, S2, L;
};
// S2 is filled only when so is given
SpeedSeries speed_series(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus,
                         const std::vector<double>& grid, const SecondOrder* so = nullptr);

struct IncrementStats {
    double mean = 0, var = 0;
    double mean_se = 0, var_se = 0;
    double var_lo = 0, var_hi = 0;  // 95% bootstrap interval of the variance
    double predicted = 0;           // 4 a^5 Delta
    double ratio = 0;               // var / predicted
    long n = 0;
};
// L(t0 + delta) - L(t0) across runs
IncrementStats increment_stats(const std::vector<model::RunRecord>& runs, const kernels::KernelTable& table,
                               double t0_minus, double t0, double delta, int n_boot = 1000, std::uint64_t seed = 0);
// same, from precomputed increments
IncrementStats increment_stats(const std::vector<double>& increments, double alpha, double delta, int n_boot = 1000,
                               std::uint64_t seed = 0);

struct GapStats {
    double integral_abs = 0;     // int |h - S1| over the window
    double integral_h = 0;
    std::vector<double> normalized;  // (h - S1) / (sigma1 sigma2) on the grid
    double frac_normalized_below_one = 0;
};
// sigma_i(t) = (pi_i(t) + 1)^{-1/2}, pi_i = distance from t back to the i-th most recent absorption
GapStats approximation_gap(const model::RunRecord& run, const kernels::KernelTable& table, double t0_minus,
                           double t_from, double t_to, int n_grid = 400);

}  // namespace mdla::diagnostics
