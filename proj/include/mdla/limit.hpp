#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mdla/errors.hpp"

namespace mdla::limit {

enum class Scheme { exact_besq, euler_bessel, euler_z };

struct TimeGrid {
    double first = 1e-6;   // first positive time, relative to s_max
    double ratio = 1.05;   // geometric growth near 0
    double max_step = 1e-3;  // relative to s_max; spacing is uniform once reached
};

// dZ = drift Z^4 dt + 2 sigma Z^{5/2} dB with drift = 4 sigma^2 - 4 unless overridden
struct Generalized {
    double sigma2 = 1.0;
    std::optional<double> drift_coeff;
    double drift() const { return drift_coeff ? *drift_coeff : 4 * sigma2 - 4; }
};

struct LimitConfig {
    Scheme scheme = Scheme::exact_besq;
    double s_max = 1.0;
    TimeGrid grid;
    double z0 = std::numeric_limits<double>::infinity();  // inf: V starts at 0
    std::optional<Generalized> generalized;
    std::uint64_t seed = 0;
    long n_paths = 1;
    double euler_step = 1e-3;     // euler_bessel step, absolute
    double step_factor = 1e-3;    // adaptive step dt = step_factor * Z^-3 for the Z schemes
    double explosion_cap = 1e6;   // Z above cap * z0 counts as explosion
    std::vector<double> extra_times;  // forced into the grid

    void validate() const;
};

struct LimitPath {
    std::vector<double> times, V, Z, cumZ;
    bool z_infinite_at_zero = false;  // then Z[0] is NaN
    bool exploded = false;
    double explosion_time = std::numeric_limits<double>::infinity();
};

std::vector<double> time_grid(const LimitConfig& cfg);

// V on the grid; path index selects the random stream
LimitPath sample_bessel_path(const LimitConfig& cfg, std::uint64_t path = 0);
// Z = (3V)^{-2/3}
void z_path(LimitPath& p);
// cumulative int_0^t Z on the grid: trapezoid, with the first cell integrated from a
// local power law c x^{-q} fitted through the first two grid values
void integrate_z(LimitPath& p);
// generalized SDE (or the plain one for scheme euler_z) from finite z0; Z and V filled on the grid
LimitPath euler_general(const LimitConfig& cfg, std::uint64_t path = 0);

// full pipeline for one path, dispatching on the scheme
LimitPath sample_path(const LimitConfig& cfg, std::uint64_t path = 0);

// int_0^s Z for each path and each s in s_points (s values are added to the grid)
std::vector<std::vector<double>> sample_functional(LimitConfig cfg, const std::vector<double>& s_points);

}  // namespace mdla::limit
