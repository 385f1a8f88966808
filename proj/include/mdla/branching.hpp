#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "mdla/errors.hpp"
#include "mdla/kernels.hpp"
#include "mdla/rng.hpp"

namespace mdla::branching {

struct BranchConfig {
    double alpha = 0.1;
    double t0_minus = 0, t0 = 0;
    double horizon = std::numeric_limits<double>::infinity();
    std::vector<double> roots;   // explicit roots in [t0_minus, t0]
    bool poisson_roots = false;  // instead draw rate-alpha Poisson roots on [t0_minus, t0]
    int max_generation = std::numeric_limits<int>::max();
    std::size_t max_points = 10'000'000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreePoint {
    double time;
    long parent;  // -1 for roots
    int generation;
    int children;  // Poisson(1) draw, counted before any pruning or discarding
};

struct ClusterTree {
    std::vector<TreePoint> points;  // sorted by time; parents precede children
    long n_roots = 0;
    long discarded = 0;  // root offspring landing before t0
    long pruned = 0;     // offspring beyond the horizon or the generation cap

    std::vector<long> generation_sizes() const;
    std::vector<double> times() const;
    // deepest generation in each root's cluster, roots in time order
    std::vector<int> root_depths() const;
};

struct ClusterAborted : ResourceError {
    ClusterAborted(const std::string& w, std::shared_ptr<ClusterTree> p) : ResourceError(w), partial(std::move(p)) {}
    std::shared_ptr<ClusterTree> partial;
};

double sample_branch_length(const kernels::KernelTable& table, Philox& rng);

ClusterTree simulate_cluster(const BranchConfig& cfg, const kernels::KernelTable& table);

// R(t) = sum over points x < t of K(t - x)
std::vector<double> intensity_path(const ClusterTree& tree, const std::vector<double>& t_grid,
                                   const kernels::KernelTable& table);

struct BandStats {
    double budget = 0;      // alpha^{3/2} log(1/alpha)^p
    double exceedance = 0;  // fraction of (seed, t) pairs with |R - alpha| > budget
    double mean_abs_dev = 0;
    std::vector<double> mean_R;  // per grid point, averaged over seeds
    long n_pairs = 0;
};

BandStats band_statistics(const BranchConfig& cfg, const kernels::KernelTable& table, int n_seeds,
                          const std::vector<double>& t_grid, double polylog_exponent = 5);

// P(Z_n > 0), n = 0..n_max, for Poisson(1) offspring: q_n = exp(q_{n-1} - 1), P = 1 - q_n
std::vector<double> survival_by_generation(int n_max);

}  // namespace mdla::branching
