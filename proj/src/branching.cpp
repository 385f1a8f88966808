#include "mdla/branching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/poisson_distribution.hpp>

#include "mdla/parallel.hpp"

namespace mdla::branching {

void BranchConfig::validate() const {
    if (!(alpha > 0 && alpha < 0.5)) throw ConfigError("branching: alpha must lie in (0, 1/2)");
    if (!(t0_minus < t0 && t0 < horizon)) throw ConfigError("branching: need t0_minus < t0 < horizon");
    for (double r : roots)
        if (!(r >= t0_minus && r <= t0)) throw ConfigError("branching: root outside [t0_minus, t0]");
    if (poisson_roots && !roots.empty()) throw ConfigError("branching: explicit roots given together with poisson_roots");
    if (max_generation < 0) throw ConfigError("branching: negative generation cap");
}

std::vector<long> ClusterTree::generation_sizes() const {
    std::vector<long> g;
    for (auto& p : points) {
        if (p.generation >= static_cast<int>(g.size())) g.resize(p.generation + 1, 0);
        ++g[p.generation];
    }
    return g;
}

std::vector<double> ClusterTree::times() const {
    std::vector<double> t;
    t.reserve(points.size());
    for (auto& p : points) t.push_back(p.time);
    return t;
}

std::vector<int> ClusterTree::root_depths() const {
    std::vector<long> root(points.size());
    std::vector<int> depth;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].parent < 0) {
            root[i] = static_cast<long>(depth.size());
            depth.push_back(0);
        } else {
            root[i] = root[points[i].parent];
            depth[root[i]] = std::max(depth[root[i]], points[i].generation);
        }
    }
    return depth;
}

double sample_branch_length(const kernels::KernelTable& table, Philox& rng) {
    return table.quantile(1 - rng.uniform());
}

namespace {

void check_table(const BranchConfig& cfg, const kernels::KernelTable& table) {
    if (std::abs(table.alpha - cfg.alpha) > 1e-12 * cfg.alpha)
        throw ConfigError("branching: kernel table built for a different alpha");
}

std::vector<double> draw_roots(const BranchConfig& cfg) {
    if (!cfg.poisson_roots) {
        auto r = cfg.roots;
        std::sort(r.begin(), r.end());
        return r;
    }
    Philox rng(cfg.seed, 0);
    std::vector<double> r;
    for (double t = cfg.t0_minus + rng.exponential() / cfg.alpha; t <= cfg.t0; t += rng.exponential() / cfg.alpha)
        r.push_back(t);
    return r;
}

}  // namespace

ClusterTree simulate_cluster(const BranchConfig& cfg, const kernels::KernelTable& table) {
    cfg.validate();
    check_table(cfg, table);
    auto roots = draw_roots(cfg);
    auto tree = std::make_shared<ClusterTree>();
    tree->n_roots = static_cast<long>(roots.size());
    boost::random::poisson_distribution<int, double> offspring(1.0);

    // unsorted, with parents indexed into `raw`
    std::vector<TreePoint> raw;
    auto finish = [&] {
        std::vector<std::size_t> order(raw.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return raw[a].time < raw[b].time; });
        std::vector<long> where(raw.size());
        for (std::size_t k = 0; k < order.size(); ++k) where[order[k]] = static_cast<long>(k);
        tree->points.clear();
        tree->points.reserve(raw.size());
        for (auto i : order) {
            auto p = raw[i];
            if (p.parent >= 0) p.parent = where[p.parent];
            tree->points.push_back(p);
        }
    };

    for (std::size_t r = 0; r < roots.size(); ++r) {
        Philox rng(cfg.seed, 1 + r);
        std::size_t head = raw.size();
        raw.push_back({roots[r], -1, 0, 0});
        for (; head < raw.size(); ++head) {
            int c = offspring(rng);
            raw[head].children = c;
            TreePoint parent = raw[head];
            for (int k = 0; k < c; ++k) {
                double t = parent.time + sample_branch_length(table, rng);
                if (parent.generation == 0 && t < cfg.t0) {
                    ++tree->discarded;
                    continue;
                }
                if (t > cfg.horizon || parent.generation + 1 > cfg.max_generation) {
                    ++tree->pruned;
                    continue;
                }
                if (raw.size() >= cfg.max_points) {
                    finish();
                    throw ClusterAborted("simulate_cluster: max_points exceeded", tree);
                }
                raw.push_back({t, static_cast<long>(head), parent.generation + 1, 0});
            }
        }
    }
    finish();
    return std::move(*tree);
}

std::vector<double> intensity_path(const ClusterTree& tree, const std::vector<double>& t_grid,
                                   const kernels::KernelTable& table) {
    std::vector<double> R(t_grid.size(), 0.0);
    auto ts = tree.times();
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        double t = t_grid[k], s = 0;
        auto end = std::lower_bound(ts.begin(), ts.end(), t);
        for (auto it = ts.begin(); it != end; ++it) s += table.k(t - *it);
        R[k] = s;
    }
    return R;
}

BandStats band_statistics(const BranchConfig& cfg, const kernels::KernelTable& table, int n_seeds,
                          const std::vector<double>& t_grid, double polylog_exponent) {
    if (n_seeds < 1) throw ConfigError("band_statistics: need at least one seed");
    BandStats b;
    double a = cfg.alpha;
    b.budget = std::pow(a, 1.5) * std::pow(std::log(1 / a), polylog_exponent);
    std::vector<std::vector<double>> paths(n_seeds);
    parallel_for(n_seeds, [&](std::size_t i) {
        BranchConfig c = cfg;
        c.seed = cfg.seed + i;
        paths[i] = intensity_path(simulate_cluster(c, table), t_grid, table);
    });
    b.mean_R.assign(t_grid.size(), 0.0);
    long exceed = 0;
    double dev = 0;
    for (auto& p : paths)
        for (std::size_t k = 0; k < p.size(); ++k) {
            b.mean_R[k] += p[k] / n_seeds;
            double d = std::abs(p[k] - a);
            dev += d;
            exceed += d > b.budget;
        }
    b.n_pairs = static_cast<long>(n_seeds) * static_cast<long>(t_grid.size());
    if (b.n_pairs > 0) {
        b.exceedance = double(exceed) / b.n_pairs;
        b.mean_abs_dev = dev / b.n_pairs;
    }
    return b;
}

std::vector<double> survival_by_generation(int n_max) {
    std::vector<double> p(n_max + 1);
    p[0] = 1;
    // q_n = exp(q_{n-1} - 1) written for p = 1 - q
    for (int n = 1; n <= n_max; ++n) p[n] = -std::expm1(-p[n - 1]);
    return p;
}

}  // namespace mdla::branching
