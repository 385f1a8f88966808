#include <cmath>
#include <map>

#include <doctest.h>

#include "mdla/branching.hpp"
#include "mdla/stats.hpp"

using namespace mdla::branching;
using mdla::kernels::KernelTable;
using mdla::kernels::build_kernel_table;

namespace {

const KernelTable& table(double a) {
    static std::map<double, KernelTable> cache;
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, build_kernel_table(a)).first;
    return it->second;
}

BranchConfig roots_at_t0(double a, int n, std::uint64_t seed) {
    BranchConfig c;
    c.alpha = a;
    c.t0_minus = -1;
    c.t0 = 0;
    c.roots.assign(n, 0.0);
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("branch lengths follow K") {
    double a = 0.2;
    const auto& tb = table(a);
    mdla::Philox rng(1, 0);
    std::vector<double> x(1'000'000);
    for (auto& v : x) v = sample_branch_length(tb, rng);
    auto mv = mdla::stats::mean_var(x);
    double m1 = (1 + 2 * a) / (2 * a * a);
    CHECK(std::abs(mv.mean - m1) < 0.01 * m1);
    std::vector<double> head(x.begin(), x.begin() + 10000);
    auto ks = mdla::stats::ks_one_sample(head, [&](double t) { return tb.cdf_at(t) / tb.total_mass; });
    CHECK(ks.statistic <= 1.36 / std::sqrt(10000.0));
    // tail beyond the tabulated range is drawn from the exponential tail
    double beyond = 0;
    for (double v : x) beyond += v > 0.5 * tb.t_tail;
    double expect = tb.survival(0.5 * tb.t_tail) / tb.total_mass * x.size();
    CHECK(std::abs(beyond - expect) < 4 * std::sqrt(expect) + 1);
}

TEST_CASE("config validation") {
    BranchConfig c;
    c.alpha = 0.6;
    CHECK_THROWS_AS(c.validate(), mdla::ConfigError);
    c.alpha = 0.1;
    c.t0_minus = 0;
    c.t0 = 0;
    CHECK_THROWS_AS(c.validate(), mdla::ConfigError);
    c.t0 = 5;
    c.roots = {6.0};
    CHECK_THROWS_AS(c.validate(), mdla::ConfigError);
    c.roots = {1.0};
    CHECK_THROWS_AS(simulate_cluster(c, table(0.2)), mdla::ConfigError);
}

TEST_CASE("zero roots") {
    BranchConfig c;
    c.alpha = 0.2;
    c.t0_minus = 0;
    c.t0 = 1;
    auto t = simulate_cluster(c, table(0.2));
    CHECK(t.points.empty());
    CHECK(intensity_path(t, {0.5, 2.0}, table(0.2)) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("tree structure") {
    auto c = roots_at_t0(0.2, 200, 3);
    c.max_generation = 50;
    auto t = simulate_cluster(c, table(0.2));
    CHECK(t.n_roots == 200);
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        auto& p = t.points[i];
        if (i) CHECK(p.time >= t.points[i - 1].time);
        if (p.parent < 0) {
            CHECK(p.generation == 0);
        } else {
            CHECK(p.parent < static_cast<long>(i));
            CHECK(t.points[p.parent].time < p.time);
            CHECK(t.points[p.parent].generation + 1 == p.generation);
        }
    }
    auto again = simulate_cluster(c, table(0.2));
    CHECK(again.times() == t.times());
}

TEST_CASE("criticality") {
    int n_roots = 2000, G = 30;
    auto c = roots_at_t0(0.2, n_roots, 11);
    c.max_generation = G;
    auto t = simulate_cluster(c, table(0.2));
    auto z = t.generation_sizes();
    for (int n = 1; n < static_cast<int>(z.size()); ++n)
        CHECK(std::abs(z[n] - n_roots) < 4 * std::sqrt(double(n_roots) * n));
    // direct offspring counts
    double sum = 0, cnt = 0;
    for (auto& p : t.points)
        if (p.generation < G) {
            sum += p.children;
            ++cnt;
        }
    CHECK(std::abs(sum / cnt - 1) < 3 / std::sqrt(cnt));
}

TEST_CASE("generation survival matches the pgf recursion") {
    auto p = survival_by_generation(30);
    CHECK(p[0] == 1);
    CHECK(p[1] == doctest::Approx(1 - std::exp(-1.0)));
    // Kolmogorov asymptotics for unit offspring variance
    CHECK(p[30] * 30 == doctest::Approx(2).epsilon(0.15));

    int n_roots = 20000;
    auto c = roots_at_t0(0.2, n_roots, 12);
    c.max_generation = 30;
    auto d = simulate_cluster(c, table(0.2)).root_depths();
    REQUIRE(d.size() == std::size_t(n_roots));
    for (int n = 1; n <= 30; ++n) {
        double alive = 0;
        for (int x : d) alive += x >= n;
        double ph = alive / n_roots, se = std::sqrt(p[n] * (1 - p[n]) / n_roots);
        CHECK(std::abs(ph - p[n]) < 3.5 * se);
    }
}

TEST_CASE("intensity") {
    double a = 0.2;
    const auto& tb = table(a);
    BranchConfig c;
    c.alpha = a;
    c.t0_minus = 0;
    c.t0 = 10;
    c.roots = {10.0};
    c.seed = 4;
    auto t = simulate_cluster(c, tb);
    double first_child = t.points.size() > 1 ? t.points[1].time : 1e9;
    std::vector<double> grid{5.0, 10.5, std::min(12.0, first_child)};
    auto R = intensity_path(t, grid, tb);
    CHECK(R[0] == 0);
    CHECK(R[1] == tb.k(0.5));
    CHECK(R[2] == doctest::Approx(tb.k(grid[2] - 10)));
}

TEST_CASE("stationary history keeps R near alpha") {
    double a = 0.1;
    const auto& tb = table(a);
    BranchConfig c;
    c.alpha = a;
    c.t0_minus = 0;
    c.t0 = 10 / (a * a);
    c.horizon = c.t0 + 1 / (a * a);
    c.poisson_roots = true;
    std::vector<double> r;
    for (int s = 0; s < 400; ++s) {
        c.seed = 100 + s;
        r.push_back(intensity_path(simulate_cluster(c, tb), {c.t0 + 1}, tb)[0]);
    }
    auto mv = mdla::stats::mean_var(r);
    // only roots contribute this early: E R = a int_1^{t0 + 1} K
    double expect = a * (tb.cdf_at(c.t0 + 1) - tb.cdf_at(1));
    CHECK(std::abs(mv.mean - expect) < 3.5 * mv.stderr_);
    CHECK(std::abs(mv.mean - a) < 0.1 * a);
}

TEST_CASE("Campbell check: integrated intensity counts the births") {
    double a = 0.2;
    const auto& tb = table(a);
    BranchConfig c;
    c.alpha = a;
    c.t0_minus = 0;
    c.t0 = 100;
    c.horizon = 300;
    c.poisson_roots = true;
    std::vector<double> diff;
    for (int s = 0; s < 300; ++s) {
        c.seed = 500 + s;
        auto t = simulate_cluster(c, tb);
        double integral = 0, born = 0;
        for (auto& p : t.points) {
            integral += tb.cdf_at(c.horizon - p.time) - tb.cdf_at(std::max(c.t0 - p.time, 0.0));
            born += p.parent >= 0;
        }
        diff.push_back(born - integral);
    }
    auto mv = mdla::stats::mean_var(diff);
    CHECK(std::abs(mv.mean) < 3.5 * mv.stderr_);
}

TEST_CASE("root offspring before t0 are discarded") {
    BranchConfig c;
    c.alpha = 0.2;
    c.t0_minus = 0;
    c.t0 = 1000;
    c.roots = {0.0};
    for (c.seed = 0; c.seed < 50; ++c.seed) {
        c.max_generation = 40;
        auto t = simulate_cluster(c, table(0.2));
        bool ok = true;
        for (auto& p : t.points) ok = ok && (p.parent < 0 || p.time >= c.t0);
        CHECK(ok);
    }
}

TEST_CASE("point cap") {
    auto c = roots_at_t0(0.2, 5000, 5);
    c.max_points = 100;
    try {
        simulate_cluster(c, table(0.2));
        FAIL("expected ClusterAborted");
    } catch (const ClusterAborted& e) {
        REQUIRE(e.partial);
        CHECK(e.partial->points.size() == 100);
    }
}

TEST_CASE("band statistics") {
    auto run = [](double a) {
        BranchConfig c;
        c.alpha = a;
        c.t0_minus = 0;
        c.t0 = 10 / (a * a);
        c.horizon = c.t0 + 1 / (a * a);
        c.poisson_roots = true;
        c.seed = 7;
        auto grid = mdla::stats::log_grid(c.t0 + 1, c.horizon, 20);
        return band_statistics(c, table(a), 100, grid, 5);
    };
    auto b05 = run(0.05), b10 = run(0.1);
    CHECK(b05.exceedance < 0.1);
    CHECK(b05.n_pairs == 2000);
    double ratio = b10.mean_abs_dev / b05.mean_abs_dev;
    MESSAGE("band ratio alpha 0.1 / 0.05: " << ratio << " (2^1.5 = 2.83)");
    CHECK(ratio > 1.8);
    CHECK(ratio < 4.5);
}
