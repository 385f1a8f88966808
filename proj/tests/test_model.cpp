#include <algorithm>
#include <cmath>
#include <filesystem>

#include <doctest.h>
#include <boost/math/distributions/poisson.hpp>

#include "mdla/errors.hpp"
#include "mdla/model.hpp"
#include "mdla/stats.hpp"

using namespace mdla::model;

namespace {

ModelConfig plain(double lambda, double T, std::uint64_t seed) {
    ModelConfig c;
    c.lambda = lambda;
    c.horizon = T;
    c.seed = seed;
    return c;
}

// independent evaluation of the displacement union bound: Chernoff bound for the
// difference of two Poisson(T/2) variables, doubled by reflection
double oracle_tail(double T, double d) {
    if (d <= 0) return 1;
    double th = std::asinh(d / T);
    return std::min(1.0, 2 * std::exp(T * (std::cosh(th) - 1) - th * d));
}

}  // namespace

TEST_CASE("window policy") {
    double T = 100, eps = 0.5;
    long wall = window_policy(T, 1.0, eps);
    // brute-force the smallest margin from the oracle tail
    long m = 0;
    for (;; ++m) {
        double s = 0;
        for (long d = m; d < m + 5000; ++d) s += oracle_tail(T, d);
        if (s <= eps) break;
    }
    CHECK(wall == x_bound(T) + m);
    CHECK(x_bound(T) == static_cast<long>(std::ceil(std::pow(100.0, 0.75) * std::log(100.0) * std::log(100.0))));
    // looser budgets never need a wider window
    CHECK(window_policy(T, 1.0, 0.9) <= wall);
    CHECK(window_policy(T, 1.0, 0.01) >= wall);
    CHECK(window_policy(T, 0.0, 0.5) == x_bound(T));
    long big = window_policy(3e5, 1.0, 1e-3) - x_bound(3e5);
    CHECK(big > 1000);
    CHECK(big < 10000);
    CHECK_THROWS_AS(window_policy(T, 1.0, 1.0), mdla::ConfigError);
    for (double d : {1.0, 10.0, 40.0, 300.0}) CHECK(displacement_tail(T, d) == doctest::Approx(oracle_tail(T, d)));
}

TEST_CASE("init_field") {
    auto c = plain(0.0, 10, 1);
    auto f0 = init_field(c, 100);
    CHECK(f0.pos.empty());
    CHECK(f0.wall == 100);

    auto c1 = plain(1.0, 10, 2);
    auto f1 = init_field(c1, 10000);
    CHECK(std::abs(static_cast<double>(f1.pos.size()) - 1e4) < 400);
    CHECK(f1.instantiated == static_cast<long>(f1.pos.size()));

    ModelConfig d = plain(1.0, 10, 3);
    d.init_mode = InitMode::iid_counts;
    d.counts.name = "deterministic";
    d.counts.mean = 1;
    auto fd = init_field(d, 500);
    for (long s = 1; s <= 500; ++s) CHECK(fd.count[s] == 1);
    // extension at t = 0 keeps the deterministic law
    extend_window(fd, d, 600, 0.0);
    for (long s = 501; s <= 600; ++s) CHECK(fd.count[s] == 1);
    CHECK_THROWS_AS(extend_window(fd, d, 550, 0.0), mdla::RangeError);

    d.counts.name = "nonsense";
    CHECK_THROWS_AS(init_field(d, 10), mdla::ConfigError);
}

TEST_CASE("extend_window samples the stationary marginal") {
    auto c = plain(1.5, 10, 4);
    auto f = init_field(c, 10);
    long before = static_cast<long>(f.pos.size());
    extend_window(f, c, 20010, 50.0);
    double added = static_cast<double>(f.pos.size() - before);
    // Poisson(1.5) per site, all displaced particles land right of the empty aggregate except a few
    CHECK(std::abs(added - 1.5 * 20000) < 4 * std::sqrt(1.5 * 20000) + 50);
    auto z = plain(0.0, 10, 4);
    auto fz = init_field(z, 10);
    extend_window(fz, z, 1000, 50.0);
    CHECK(fz.pos.empty());
}

TEST_CASE("run basics and invariants") {
    auto r0 = run(plain(0.0, 1000, 1));
    CHECK(r0.jumps.empty());
    CHECK(r0.n_events == 0);

    auto c = plain(1.0, 1e4, 7);
    c.record_hazard = true;
    auto r = run(c);
    CHECK(static_cast<long>(r.jumps.size()) <= x_bound(1e4));
    for (std::size_t i = 1; i < r.jumps.size(); ++i) CHECK(r.jumps[i] > r.jumps[i - 1]);
    CHECK(r.frozen_mass >= static_cast<long>(r.jumps.size()));
    CHECK(r.active_at_end + r.frozen_mass == r.instantiated);
    CHECK(r.window_violations == 0);
    CHECK(r.truncation_bound_used <= c.truncation_epsilon);
    for (auto& p : r.hazard) CHECK(p.h >= 0);
    CHECK(r.x_at(1e4) == static_cast<long>(r.jumps.size()));

    // determinism
    auto r2 = run(c);
    CHECK(r2.jumps == r.jumps);
    CHECK(r2.compensator == r.compensator);
    CHECK(r2.n_events == r.n_events);

    // compensator increments agree with the recorded hazard
    double integral = 0;
    for (std::size_t i = 0; i + 1 < r.hazard.size(); ++i)
        if (r.hazard[i + 1].t <= r.jumps.back()) integral += r.hazard[i].h * (r.hazard[i + 1].t - r.hazard[i].t);
    CHECK(r.compensator.back() == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("supercritical growth is linear") {
    // pilot (seeds 5000-5019, same T): mean X_T/T = 0.4109, per-run sd 0.0148
    std::vector<double> v;
    for (int s = 1; s <= 20; ++s) v.push_back(run(plain(2.0, 1e4, s)).jumps.size() / 1e4);
    auto mv = mdla::stats::mean_var(v);
    CHECK(std::abs(mv.mean - 0.4109) < 4 * 0.0148 / std::sqrt(20.0) + 0.002);
    CHECK(std::sqrt(mv.var) / mv.mean < 0.1);
}

TEST_CASE("compensator time change gives unit exponentials") {
    std::vector<double> gaps, resid;
    for (int s = 0; s < 10; ++s) {
        auto r = run(plain(1.0, 3000, 100 + s));
        double prev = 0;
        for (double c : r.compensator) {
            gaps.push_back(c - prev);
            prev = c;
        }
        resid.push_back(double(r.jumps.size()) - prev);
    }
    auto ks = mdla::stats::ks_one_sample(gaps, [](double x) { return 1 - std::exp(-x); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("X_t is dominated by Poisson(t/2)") {
    double t = 4;
    std::vector<int> hist(20, 0);
    int n = 3000;
    for (int s = 0; s < n; ++s) {
        long x = run(plain(1.0, t, 1000 + s)).jumps.size();
        ++hist[std::min<long>(x, 19)];
    }
    boost::math::poisson_distribution<> P(t / 2);
    int tail = n;
    for (int k = 0; k < 8; ++k) {
        tail -= hist[k];  // #(X >= k+1)
        double emp = double(tail) / n, bound = boost::math::cdf(boost::math::complement(P, k));
        CHECK(emp <= bound + 3 * std::sqrt(bound * (1 - bound) / n) + 1e-3);
    }
}

TEST_CASE("initial conditions") {
    // Y0 = inf beyond 0 is the plain aggregate, draw for draw
    auto base = plain(1.0, 2000, 31);
    auto a = run(base);
    auto b = run_with_initial_condition(mdla::UnitStep({}, 0.0), 0.0, base);
    CHECK(a.jumps == b.jumps);

    // bounded history: the front stood still forever, nothing is left to grow on
    auto e = run_with_initial_condition(mdla::UnitStep({1.0, 2.0}), 10.0, plain(1.0, 200, 3));
    CHECK(e.jumps.empty());

    CHECK_THROWS_AS(run_with_initial_condition(mdla::UnitStep({}, 0.0), 10.0, plain(1.0, 5, 1)), mdla::ConfigError);
}

TEST_CASE("sandwich histories") {
    double a = 0.1;
    std::vector<double> h_upper, h_lower, hist_rate;
    for (int s = 0; s < 300; ++s) {
        ModelConfig c = plain(1.0, 1000 + 1.0, 200 + s);
        c.init_mode = InitMode::sandwich_upper;
        c.alpha = a;
        c.t0 = 1000;
        c.record_hazard = true;
        auto r = run(c);
        h_upper.push_back(r.hazard.front().h);
        hist_rate.push_back(r.history.size() / 1000.0);
        CHECK(r.t_start == doctest::Approx(0.0));
        c.init_mode = InitMode::sandwich_lower;
        auto l = run(c);
        h_lower.push_back(l.hazard.front().h);
        CHECK(l.history == r.history);  // same history stream
    }
    // prescribed history has rate a
    auto hr = mdla::stats::mean_var(hist_rate);
    CHECK(std::abs(hr.mean - a) < 3 * hr.stderr_);
    // the speed seen after a rate-a history is E_a S(Y) = a/(1+2a)
    auto mu = mdla::stats::mean_var(h_upper), ml = mdla::stats::mean_var(h_lower);
    CHECK(std::abs(mu.mean - a / (1 + 2 * a)) < 3 * mu.stderr_);
    CHECK(std::abs(ml.mean - a / (1 + 2 * a)) < 3 * ml.stderr_);
}

TEST_CASE("larger initial profile grows faster on average") {
    // Y0^(1): inf only before 200 (no growth on [t0-200, t0]); Y0^(2): inf right away
    double s1 = 0, s2 = 0;
    int n = 100;
    for (int s = 0; s < n; ++s) {
        auto c = plain(1.0, 700, 400 + s);
        s1 += run_with_initial_condition(mdla::UnitStep({}, 200.0), 200.0, c).jumps.size();
        s2 += run_with_initial_condition(mdla::UnitStep({}, 0.0), 200.0, c).jumps.size();
    }
    CHECK(s2 > s1);
}

TEST_CASE("coupled densities") {
    int ordered = 0, n = 40;
    double ms = 0, ml = 0;
    for (int s = 0; s < n; ++s) {
        auto p = run_coupled(0.8, 1.2, 1500, 900 + s);
        ms += p.small_jumps.size();
        ml += p.large_jumps.size();
        bool ok = true;
        // X_small(t) <= X_large(t) at every jump time of the small system
        for (std::size_t k = 0; k < p.small_jumps.size(); ++k) {
            long xl = std::upper_bound(p.large_jumps.begin(), p.large_jumps.end(), p.small_jumps[k]) -
                      p.large_jumps.begin();
            if (long(k + 1) > xl) ok = false;
        }
        ordered += ok;
    }
    CHECK(ml > ms);
    MESSAGE("pathwise ordered in " << ordered << "/" << n << " coupled runs");
}

TEST_CASE("y_profile") {
    RunRecord r;
    r.config = plain(1.0, 10, 0);
    r.jumps = {1.0, 2.0};
    r.tail_at = 0.0;
    auto y = y_profile(r, 3.0);
    CHECK(y.jumps == std::vector<double>{1.0, 2.0});
    CHECK(*y.tail_infinite_after == 3.0);
    auto y0 = y_profile(r, 0.5);
    CHECK(y0.jumps.empty());
    CHECK(*y0.tail_infinite_after == 0.5);
    CHECK_THROWS_AS(y_profile(r, 11.0), mdla::RangeError);

    // brute-force recount on a simulated run
    auto s = run(plain(1.0, 3000, 55));
    double t = 2500;
    auto yp = y_profile(s, t);
    for (double q : {0.5, 10.0, 100.0, 1000.0, 2499.0}) {
        long direct = 0;
        for (double j : s.jumps) direct += (j > t - q && j <= t);
        CHECK(yp(q) == double(direct));
    }
    CHECK(yp(2600.0) == mdla::UnitStep::inf);
}

TEST_CASE("record io round trip") {
    auto c = plain(1.0, 500, 8);
    c.record_hazard = true;
    auto r = run(c);
    auto dir = std::filesystem::temp_directory_path() / "mdla_rec_test";
    std::filesystem::create_directories(dir);
    write_record(r, dir.string(), "run");
    auto back = read_record(dir.string(), "run");
    CHECK(back.jumps == r.jumps);
    CHECK(back.compensator == r.compensator);
    CHECK(back.hazard.size() == r.hazard.size());
    CHECK(back.config.seed == 8);
    std::filesystem::remove_all(dir);
}
