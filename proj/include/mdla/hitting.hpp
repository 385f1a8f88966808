#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mdla/rng.hpp"
#include "mdla/unit_step.hpp"

namespace mdla::hitting {

// U(s) = Y(s) - W(s) + 1 started at 1: up at rate a + 1/2, down at rate 1/2,
// plus one forced up-jump at each extra_jumps time. T = first time U = 0.
struct HittingConfig {
    double alpha = 0.1;
    std::vector<double> extra_jumps;  // at most 2, sorted
    int u_max = 0;                    // 0 = automatic (bias xi^u_max <= 1e-6)
    double horizon_cap = std::numeric_limits<double>::infinity();
    long n_samples = 100000;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Outcome { hit, certified_infinite, censored };

struct HittingSample {
    Outcome outcome = Outcome::censored;
    double time = 0;            // T for hits, stopping time otherwise
    double residual_error = 0;  // xi^U at termination for certified_infinite
    long final_u = 0;
};

int auto_u_max(double alpha, double bias = 1e-6);

HittingSample sample_hitting(const HittingConfig& cfg, Philox& rng);

struct HitSummary {
    long n = 0, hits = 0, infinite = 0, censored = 0;
    double p = 0, stderr_ = 0;
    double bias_bound = 0;  // max residual xi^u_max carried by certified samples
    std::vector<double> hit_times;  // kept only when requested
};

HitSummary estimate_hit_probability(const HittingConfig& cfg, bool keep_times = false);

struct CurvePoint {
    double t, value, stderr_;
};

// K^(t) = a(1+2a) * fraction of samples with t < T < inf
std::vector<CurvePoint> estimate_K(double alpha, const std::vector<double>& t_grid, long n, std::uint64_t seed,
                                   int u_max = 0);

struct Estimate {
    double value = 0, stderr_ = 0;
    long n = 0;
};

struct SpeedOptions {
    // continuation of Y after its last jump when there is no infinite tail:
    // alpha > 0 appends a rate-alpha Poisson process, alpha = 0 keeps Y constant
    double continuation_alpha = 0;
    double continuation_after = 0;  // continuation starts here (>= last jump)
    int u_max = 0;
};

// S^ = 1/2 * fraction of walks with W(s) <= Y(s) for all s
Estimate estimate_speed(const UnitStep& Y, long n, std::uint64_t seed, const SpeedOptions& opt = {});
// same, with Y itself a fresh rate-alpha Poisson process per sample
Estimate estimate_speed_poisson(double alpha, long n, std::uint64_t seed, int u_max = 0);

struct JEstimate {
    double value = 0, stderr_ = 0;
    double var_paired = 0, var_independent = 0;  // per-sample variances
    double p_extra = 0, p_plain = 0;             // P(s<T_u<inf), P(s<T<inf)
    long n = 0;
};

// J_{u,s} = P(s<T_u<inf) - P(s<T<inf), 0 <= u <= s; one shared path per sample
JEstimate estimate_J(double alpha, double u, double s, long n, std::uint64_t seed, int u_max = 0);

struct DtResult {
    double mean_residual = 0, stderr_ = 0, mean_abs_residual = 0;
    double mean_direct = 0, mean_rhs = 0;
    long n_outer = 0, n_inner = 0;
};

// D_t = P(T<inf | Y_{<=t}) against xi - 2a/(1+2a) int_0^t H_s dY^(s), H_s = P(s<T<inf | Y_{<=s}),
// both sides estimated from the same inner walks. no_jumps forces Y = 0 on [0,t].
DtResult verify_Dt_identity(double alpha, double t, long n_outer, long n_inner, std::uint64_t seed,
                            bool no_jumps = false);

}  // namespace mdla::hitting
