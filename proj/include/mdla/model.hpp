#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdla/errors.hpp"
#include "mdla/rng.hpp"
#include "mdla/unit_step.hpp"

namespace mdla::model {

// law of the initial number of particles per site
struct CountLaw {
    std::string name = "poisson";  // poisson | deterministic | geometric | negative_binomial | binomial
    double mean = 1.0;
    double variance = 1.0;  // used by negative_binomial; derived for the others
    int trials = 0;         // binomial only

    void validate() const;
    double implied_variance() const;
    long sample(Philox& rng) const;
};

enum class InitMode { poisson, iid_counts, sandwich_upper, sandwich_lower, explicit_history };

struct ModelConfig {
    double lambda = 1.0;
    InitMode init_mode = InitMode::poisson;
    CountLaw counts;            // iid_counts
    double alpha = 0.05;        // sandwich modes
    double t0 = 0.0;            // growth starts here; history (if any) precedes it
    UnitStep y0;                // explicit_history
    double lower_history = 0;   // sandwich_lower history length, 0 = alpha^-3
    double horizon = 1000.0;    // absolute end time T
    double truncation_epsilon = 1e-3;
    std::uint64_t seed = 0;
    bool record_hazard = false;  // piecewise-constant h(t) at every change after t0
    double hazard_grid = 0.0;    // > 0: also sample h on t0 + k*grid
    std::size_t max_particles = 50'000'000;

    void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

struct HazardPoint {
    double t, h;
};

struct RunRecord {
    ModelConfig config;
    std::vector<double> history;     // prescribed front jumps (times < t0)
    std::vector<double> jumps;       // absorption times after t0: X_t = #{jumps <= t}
    std::vector<double> compensator; // int_{t0}^{jump} h ds at each absorption
    std::vector<HazardPoint> hazard; // h after each change (and on the optional grid)
    double t_start = 0;              // clock start (= t0 - history length)
    std::optional<double> tail_at;   // absolute time before which the history is +inf (fresh field)
    double continuation_alpha = 0;   // > 0: history before t_start is a rate-alpha process (lower sandwich)
    long n_events = 0, n_null_events = 0, n_window_extensions = 0;
    long frozen_mass = 0, instantiated = 0, active_at_end = 0;
    long window_violations = 0;      // particles materialized inside the aggregate
    long margin = 0;                 // lazy window margin m
    long x_bound = 0;
    double truncation_bound_used = 0;
    bool non_poisson_extension = false;  // never set: extensions sample the exact initial marginal
    double wall_seconds = 0;

    long x_at(double t) const;  // X_t (growth after t0 only)
    double hazard_at(double t) const;
};

// raised on resource exhaustion; carries the record up to the failure
struct RunAborted : ResourceError {
    RunAborted(const std::string& w, std::shared_ptr<RunRecord> p) : ResourceError(w), partial(std::move(p)) {}
    std::shared_ptr<RunRecord> partial;
};

// ceil(T^{3/4} log^2 T)
long x_bound(double T);
// P(max_{[0,T]} |one-sided excursion| >= d) <= 2 exp(-T g(d/T)), g(x) = x asinh x - sqrt(1+x^2) + 1
double displacement_tail(double T, double d);
// smallest wall with sum_{d >= wall - X_bound} lambda * tail(d) <= eps
long window_policy(double T, double lambda, double eps);
// margin of the front-relative lazy window: lambda X_bound tail(m) + sum_{d>=m} lambda tail(d) <= eps
long lazy_margin(double T, double lambda, double eps, double* bound_out = nullptr);

// mutable simulator state; exposed for tests
struct ParticleField {
    std::vector<long> pos;     // tracked particles; entries <= front are frozen and removed lazily
    std::vector<int> count;    // alive particles per site
    long front = 0;
    long wall = 0;             // original sites 1..wall have been materialized
    long frozen_mass = 0;
    long instantiated = 0;
    double t = 0;

    long active() const;
};

ParticleField init_field(const ModelConfig& cfg, long wall0);
// materialize original sites wall+1..new_wall at the field's current time
void extend_window(ParticleField& f, const ModelConfig& cfg, long new_wall, double elapsed, long* violations = nullptr);

RunRecord run(const ModelConfig& cfg);
// convenience: explicit history (Y0, t0) with the rest of cfg
RunRecord run_with_initial_condition(const UnitStep& y0, double t0, ModelConfig cfg);

// reversed-time profile Y_t(s) = X_t - X_{t-s}, including prescribed history
UnitStep y_profile(const RunRecord& rec, double t);

// two coupled aggregates on one particle system: the lambda_small field is an
// independent thinning of the lambda_large field, walks are shared. Returns front
// trajectories (jump times) of both.
struct CoupledPair {
    std::vector<double> small_jumps, large_jumps;
};
CoupledPair run_coupled(double lambda_small, double lambda_large, double T, std::uint64_t seed, double eps = 1e-3);

nlohmann::json record_summary(const RunRecord& r);
void write_record(const RunRecord& r, const std::string& dir, const std::string& stem);
RunRecord read_record(const std::string& dir, const std::string& stem);

}  // namespace mdla::model
