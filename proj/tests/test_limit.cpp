#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "mdla/limit.hpp"
#include "mdla/parallel.hpp"
#include "mdla/stats.hpp"

using namespace mdla::limit;

namespace {

// V at s for n independent exact paths on the default grid
std::vector<double> v_at_end(LimitConfig c, long n) {
    std::vector<double> v;
    for (long k = 0; k < n; ++k) v.push_back(sample_bessel_path(c, k).V.back());
    return v;
}

LimitConfig one_step(double s, std::uint64_t seed) {
    LimitConfig c;
    c.s_max = s;
    c.grid.first = 1;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("time grid") {
    LimitConfig c;
    c.s_max = 2;
    c.extra_times = {0.5, 1.234567};
    auto g = time_grid(c);
    CHECK(g.front() == 0);
    CHECK(g.back() == 2);
    CHECK(g[1] == doctest::Approx(2e-6));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(std::count(g.begin(), g.end(), 1.234567) == 1);
    CHECK(g.size() < 3000);
    c.s_max = -1;
    CHECK_THROWS_AS(time_grid(c), mdla::ConfigError);
    LimitConfig e;
    e.scheme = Scheme::euler_z;
    CHECK_THROWS_AS(e.validate(), mdla::ConfigError);
}

TEST_CASE("squared Bessel mean") {
    auto v = v_at_end(one_step(1.0, 1), 100000);
    std::vector<double> x;
    for (double a : v) x.push_back(a * a);
    auto mv = mdla::stats::mean_var(x);
    CHECK(std::abs(mv.mean - 8.0 / 3) < 3 * mv.stderr_);

    // from x0 > 0 the mean is x0 + (8/3) s
    auto c = one_step(0.5, 2);
    c.z0 = 2.0;
    double x0 = std::pow(std::pow(2.0, -1.5) / 3, 2);
    auto w = v_at_end(c, 50000);
    x.clear();
    for (double a : w) x.push_back(a * a);
    mv = mdla::stats::mean_var(x);
    CHECK(std::abs(mv.mean - (x0 + 8.0 / 3 * 0.5)) < 3 * mv.stderr_);
}

TEST_CASE("Bessel scaling from 0") {
    LimitConfig a;
    a.s_max = 0.01;
    a.seed = 3;
    LimitConfig b = a;
    b.s_max = 1;
    b.seed = 4;
    auto va = v_at_end(a, 5000), vb = v_at_end(b, 5000);
    for (auto& x : va) x /= std::sqrt(0.01);
    CHECK(mdla::stats::ks_two_sample(va, vb).p_value > 0.01);
}

TEST_CASE("Euler Bessel agrees with the exact scheme") {
    LimitConfig e;
    e.scheme = Scheme::euler_bessel;
    e.grid.first = 1;
    e.euler_step = 1e-3;
    e.seed = 5;
    auto ve = v_at_end(e, 5000);
    auto vx = v_at_end(one_step(1.0, 6), 5000);
    CHECK(mdla::stats::ks_two_sample(ve, vx).p_value > 0.01);
}

TEST_CASE("z map") {
    LimitPath p;
    p.times = {0, 1, 2};
    p.V = {0, 1.0 / 3, 1.0};
    z_path(p);
    CHECK(p.z_infinite_at_zero);
    CHECK(std::isnan(p.Z[0]));
    CHECK(p.Z[1] == doctest::Approx(1.0));
    CHECK(p.Z[2] < p.Z[1]);
}

TEST_CASE("self-similarity of Z") {
    double s = 0.5;
    std::vector<double> z1, z100;
    for (double t : {1.0, 100.0}) {
        LimitConfig c;
        c.s_max = s * t;
        c.seed = static_cast<std::uint64_t>(t);
        auto& out = t == 1 ? z1 : z100;
        for (int k = 0; k < 4000; ++k) {
            auto p = sample_bessel_path(c, k);
            z_path(p);
            out.push_back(std::cbrt(t) * p.Z.back());
        }
    }
    CHECK(mdla::stats::ks_two_sample(z1, z100).p_value > 0.01);
}

TEST_CASE("integrate_z") {
    LimitConfig c;
    c.s_max = 3;
    auto g = time_grid(c);
    LimitPath one;
    one.times = g;
    one.Z.assign(g.size(), 1.0);
    one.Z[0] = std::numeric_limits<double>::quiet_NaN();
    one.z_infinite_at_zero = true;
    integrate_z(one);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(one.cumZ[i] == doctest::Approx(g[i]).epsilon(1e-12));

    // Z = x^{-1/3}(1 + x): int_0^s = 1.5 s^{2/3} + 0.6 s^{5/3}; error shrinks under refinement
    auto err = [](double ratio, double step) {
        LimitConfig cc;
        cc.s_max = 1;
        cc.grid.ratio = ratio;
        cc.grid.max_step = step;
        LimitPath p;
        p.times = time_grid(cc);
        p.Z.resize(p.times.size());
        for (std::size_t i = 1; i < p.times.size(); ++i) p.Z[i] = std::pow(p.times[i], -1.0 / 3) * (1 + p.times[i]);
        p.z_infinite_at_zero = true;
        integrate_z(p);
        return std::abs(p.cumZ.back() - 2.1);
    };
    double e1 = err(1.1, 4e-3), e2 = err(1.05, 2e-3), e3 = err(1.025, 1e-3);
    CHECK(e2 < e1 / 3);
    CHECK(e3 < e2 / 3);
    CHECK(e3 < 1e-5);
}

TEST_CASE("functional scaling") {
    LimitConfig u;
    u.n_paths = 3000;
    u.seed = 10;
    LimitConfig f = u;
    f.s_max = 4;
    f.seed = 11;
    auto a = sample_functional(u, {1.0});
    auto b = sample_functional(f, {4.0});
    std::vector<double> x, y;
    for (auto& r : a) x.push_back(std::pow(4.0, 2.0 / 3) * r[0]);
    for (auto& r : b) y.push_back(r[0]);
    CHECK(mdla::stats::ks_two_sample(x, y).p_value > 0.01);
    for (auto& r : a) CHECK(std::isfinite(r[0]));
}

TEST_CASE("functional stable under grid refinement") {
    LimitConfig c;
    c.n_paths = 4000;
    c.seed = 12;
    LimitConfig r = c;
    r.seed = 13;
    r.grid.ratio = 1.025;
    r.grid.max_step = 5e-4;
    std::vector<double> x, y;
    for (auto& v : sample_functional(c, {1.0})) x.push_back(v[0]);
    for (auto& v : sample_functional(r, {1.0})) y.push_back(v[0]);
    CHECK(mdla::stats::ks_two_sample(x, y).p_value > 0.01);
}

TEST_CASE("thread count does not change samples") {
    LimitConfig c;
    c.n_paths = 64;
    c.seed = 14;
    auto a = sample_functional(c, {0.5, 1.0});
    mdla::set_threads(3);
    auto b = sample_functional(c, {0.5, 1.0});
    mdla::set_threads(1);
    CHECK(a == b);
}

TEST_CASE("generalized SDE: sigma^2 = 0 is the closed-form ODE") {
    LimitConfig c;
    c.z0 = 1.3;
    c.s_max = 2;
    c.generalized = Generalized{0.0, std::nullopt};
    auto p = euler_general(c);
    for (std::size_t i = 0; i < p.times.size(); i += 37) {
        double exact = std::pow(std::pow(c.z0, -3) + 12 * p.times[i], -1.0 / 3);
        CHECK(std::abs(p.Z[i] - exact) < 1e-6);
    }
    CHECK_FALSE(p.exploded);
}

TEST_CASE("generalized SDE: sigma^2 = 1 matches the Bessel pipeline") {
    LimitConfig e;
    e.z0 = 1;
    e.grid.first = 1;
    e.scheme = Scheme::euler_z;
    e.step_factor = 1e-3;
    e.seed = 20;
    LimitConfig x = one_step(1.0, 21);
    x.z0 = 1;
    std::vector<double> ze, zx;
    for (int k = 0; k < 3000; ++k) {
        ze.push_back(sample_path(e, k).Z.back());
        zx.push_back(sample_path(x, k).Z.back());
    }
    CHECK(mdla::stats::ks_two_sample(ze, zx).p_value > 0.01);
}

TEST_CASE("explosion dichotomy") {
    auto frac = [](double sigma2) {
        LimitConfig c;
        c.z0 = 1;
        c.s_max = 1;
        c.grid.first = 1;
        c.generalized = Generalized{sigma2, std::nullopt};
        c.seed = 30;
        int n = 1000, ex = 0;
        for (int k = 0; k < n; ++k) ex += euler_general(c, k).exploded;
        return double(ex) / n;
    };
    double hi = frac(3.0), lo = frac(1.5);
    MESSAGE("explosion fractions: sigma^2=3 " << hi << ", sigma^2=1.5 " << lo);
    CHECK(hi > 0.2);
    CHECK(lo < 0.01);
}
