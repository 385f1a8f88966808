#include <filesystem>
#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "mdla/errors.hpp"
#include "mdla/kernels.hpp"
#include "mdla/quadrature.hpp"
#include "oracles.hpp"

using namespace mdla::kernels;

namespace {

const KernelTable& table_for(double a) {
    static std::map<double, std::unique_ptr<KernelTable>> cache;
    auto& p = cache[a];
    if (!p) p = std::make_unique<KernelTable>(build_kernel_table(a));
    return *p;
}

// int_0^inf t^p K(t) dt from the table (Gauss-Legendre per grid cell, analytic tail)
double table_moment(const KernelTable& tb, int p) {
    const auto& gl = mdla::gauss_legendre(10);
    double s = 0;
    for (std::size_t i = 0; i + 1 < tb.t.size(); ++i) {
        double lo = tb.t[i], hi = tb.t[i + 1];
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q];
            s += 0.5 * (hi - lo) * gl.w[q] * std::pow(x, p) * tb.k(x);
        }
    }
    // tail: A e^{-r(x-T)} x^p
    double T = tb.t_tail, A = tb.tail_A, r = tb.tail_rate;
    if (p == 0) s += A / r;
    if (p == 1) s += A * (T / r + 1 / (r * r));
    if (p == 2) s += A * (T * T / r + 2 * T / (r * r) + 2 / (r * r * r));
    return s;
}

// Volterra solve of K* = K + K * K* by the trapezoid rule on step h
std::vector<double> renewal(const KernelTable& tb, double h, std::size_t n) {
    std::vector<double> K(n), R(n);
    for (std::size_t i = 0; i < n; ++i) K[i] = tb.k(h * static_cast<double>(i));
    R[0] = K[0];
    for (std::size_t i = 1; i < n; ++i) {
        double s = 0.5 * K[i] * R[0];
        for (std::size_t j = 1; j < i; ++j) s += K[i - j] * R[j];
        // unknown R[i] appears with weight h K[0]/2
        R[i] = (K[i] + h * s) / (1 - 0.5 * h * K[0]);
    }
    return R;
}

}  // namespace

TEST_CASE("tau transform closed form") {
    for (double a : {0.05, 0.1, 0.2, 0.45}) CHECK(tau_transform(a, 0.0).real() == doctest::Approx(1 / (1 + 2 * a)).epsilon(1e-14));
    // recurrent case a = 0 equals 1 at s = 0
    CHECK(tau_transform(0.0, 0.0).real() == doctest::Approx(1.0).epsilon(1e-14));
    // golden value, 40-digit evaluation of the printed formula
    CHECK(tau_transform(0.5, -1.0).real() == doctest::Approx(0.2192235935955848625).epsilon(1e-14));
    CHECK_THROWS_AS(tau_transform(0.1, 0.5), mdla::DomainError);
}

TEST_CASE("phi closed form and limits") {
    double a = 0.1;
    CHECK(phi(a, 0.5).real() == doctest::Approx(0.11323807579381201883).epsilon(1e-13));
    CHECK(phi(a, 2.0).real() == doctest::Approx(0.04).epsilon(1e-13));
    CHECK(phi(a, 1e-9).real() == doctest::Approx(1.0).epsilon(1e-7));
    double big = 1e8;
    CHECK((big * phi(a, big)).real() == doctest::Approx(a).epsilon(1e-6));
    // -phi'(0) = first moment
    double h = 1e-5;
    double d = (phi(a, h).real() - phi(a, -h).real()) / (2 * h);
    CHECK(-d == doctest::Approx(moments(a).m1).epsilon(1e-5));
    // conjugate symmetry on complex s
    cplx s(0.3, 0.7);
    CHECK(std::abs(phi(a, std::conj(s)) - std::conj(phi(a, s))) < 1e-15);
    CHECK_THROWS_AS(phi(a, -0.5), mdla::DomainError);
}

TEST_CASE("closed-form moments") {
    auto m = moments(0.1);
    CHECK(m.m1 == doctest::Approx(60));
    CHECK(m.m2 == doctest::Approx(13200));
    CHECK(m.d1 == doctest::Approx(-1));
    CHECK(m.d2 == doctest::Approx(-120));
    KernelParams p(0.1);
    CHECK(p.kstar_limit == doctest::Approx(1 / m.m1));
}

TEST_CASE("inversion matches the Bessel closed form") {
    for (double a : {0.05, 0.1, 0.2}) {
        for (double t : {0.01, 0.3, 1.0, 5.0, 37.0, 0.9 / (a * a), 1.1 / (a * a), 4 / (a * a)}) {
            double exact = oracle::k(a, t);
            auto inv = invert(a, Transform::K, t);
            CHECK(inv.value == doctest::Approx(exact).epsilon(1e-8));
            CHECK(invert(a, Transform::Kprime, t).value == doctest::Approx(oracle::kprime(a, t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("kernel table: interpolation, normalization, moments") {
    for (double a : {0.05, 0.1, 0.2}) {
        const auto& tb = table_for(a);
        CHECK(tb.t_tail >= 10 / (a * a) * std::log(1 / a));
        CHECK(std::abs(tb.total_mass - 1) < 1e-3);
        CHECK(std::abs(table_moment(tb, 0) - 1) < 1e-3);
        auto m = moments(a);
        CHECK(std::abs(table_moment(tb, 1) / m.m1 - 1) < 5e-3);
        CHECK(std::abs(table_moment(tb, 2) / m.m2 - 1) < 5e-3);
        // off-grid interpolation against the closed form
        for (double t : {0.123, 2.71, 13.3, 101.5, 0.7 / (a * a), 3.3 / (a * a)}) {
            CHECK(tb.k(t) == doctest::Approx(oracle::k(a, t)).epsilon(1e-6));
            CHECK(tb.kprime(t) == doctest::Approx(oracle::kprime(a, t)).epsilon(1e-5));
        }
        for (std::size_t i = 1; i < tb.cdf.size(); ++i) CHECK_MESSAGE(tb.cdf[i] >= tb.cdf[i - 1], "cdf monotone");
    }
}

TEST_CASE("survival and quantile consistency") {
    const auto& tb = table_for(0.1);
    for (double t : {0.5, 7.0, 80.0, 400.0, 1500.0}) {
        CHECK(tb.survival(t) == doctest::Approx(invert(0.1, Transform::Survival, t).value).epsilon(1e-6));
        CHECK(tb.cdf_at(t) + tb.survival(t) == doctest::Approx(tb.total_mass).epsilon(1e-12));
    }
    for (double u : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1 - 1e-9}) {
        double x = tb.quantile(u);
        CHECK(tb.cdf_at(x) / tb.total_mass == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("transform of the table reproduces phi") {
    const auto& tb = table_for(0.1);
    const auto& gl = mdla::gauss_legendre(10);
    for (double s : {0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 2.0, 5.0, 10.0}) {
        double v = 0;
        for (std::size_t i = 0; i + 1 < tb.t.size(); ++i) {
            double lo = tb.t[i], hi = tb.t[i + 1];
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q];
                v += 0.5 * (hi - lo) * gl.w[q] * std::exp(-s * x) * tb.k(x);
            }
        }
        v += tb.tail_A * std::exp(-s * tb.t_tail) / (tb.tail_rate + s);
        CHECK(std::abs(v - phi(0.1, s).real()) < 1e-4);
    }
}

TEST_CASE("renewal density: limit and Volterra oracle") {
    for (double a : {0.05, 0.1, 0.2}) {
        const auto& tb = table_for(a);
        double lim = 2 * a * a / (1 + 2 * a);
        CHECK(std::abs(tb.kstar(tb.t_tail * (1 - 1e-12)) / lim - 1) < 0.01);
        CHECK(tb.kstar(10 * tb.t_tail) == doctest::Approx(lim));
        // Richardson-extrapolated trapezoid solve on [0, 3/a^2]
        double h = 0.2;
        std::size_t n = static_cast<std::size_t>(3 / (a * a) / h) + 1;
        auto r1 = renewal(tb, h, n);
        auto r2 = renewal(tb, h / 2, 2 * n - 1);
        for (int k = 1; k <= 20; ++k) {
            std::size_t i = (n - 1) * static_cast<std::size_t>(k) / 20;
            double ex = (4 * r2[2 * i] - r1[i]) / 3;
            double t = h * static_cast<double>(i);
            CHECK(std::abs(tb.kstar(t) - ex) < 1e-3 * a);
        }
        // |K~ - K| <= C a/(t+1) with a stable constant
        double C = 0;
        for (std::size_t i = 0; i < tb.t.size(); ++i)
            C = std::max(C, std::abs(tb.Kstar[i] - lim - tb.K[i]) * (tb.t[i] + 1) / a);
        CHECK(C < 5);
    }
}

TEST_CASE("envelope fits are stable across alpha") {
    std::vector<double> Cs;
    for (double a : {0.05, 0.1, 0.2}) Cs.push_back(fit_k_envelope(table_for(a), 0.4).C);
    for (double C : Cs) {
        CHECK(C > 0);
        CHECK(std::abs(C / Cs[1] - 1) < 0.2);
    }
}

TEST_CASE("J kernel") {
    double a = 0.1;
    const auto& tb = table_for(a);
    double c2 = 2 / ((1 + 2 * a) * (1 + 2 * a));
    // vanishing convolution range
    CHECK(j_kernel(tb, 30 - 1e-9, 30) == doctest::Approx(-c2 * tb.k(30)).epsilon(1e-6));
    // lattice agrees with direct quadrature
    // brute-force midpoint sum with the Bessel-form K'
    double c1 = 1 / (a * a * (1 + 2 * a) * (1 + 2 * a));
    for (auto [s, u] : std::vector<std::pair<double, double>>{{0, 1}, {5, 20}, {100, 900}}) {
        int n = 200000;
        double h = (u - s) / n, acc = 0;
        for (int i = 0; i < n; ++i) {
            double x = s + (i + 0.5) * h;
            acc += oracle::kprime(a, x) * tb.k(u - x) * h;
        }
        CHECK(j_kernel(tb, s, u) == doctest::Approx(-c1 * acc - c2 * tb.k(u)).epsilon(1e-5));
    }
    JLattice lat(tb, 2000);
    for (auto [s, u] : std::vector<std::pair<double, double>>{{0, 1}, {0.5, 3}, {5, 20}, {2, 150}, {40, 41}, {100, 900}, {0.01, 1500}})
        CHECK(std::abs(lat(s, u) - j_kernel(tb, s, u)) < 2e-3 * std::abs(j_kernel(tb, s, u)) + 1e-8);
    CHECK(lat(5, 2500) == 0.0);
    // int_0^inf int_0^u J ds du = c1 - c2 m1 (exact), integrated on a uniform grid
    // inner: int_0^u J(s,u) ds = -c1 int_0^u x K'(x) K(u-x) dx - c2 u K(u)
    double h = 0.05;
    std::size_t n = static_cast<std::size_t>(tb.t_tail / h);
    std::vector<double> xkp(n), kk(n);
    for (std::size_t i = 0; i < n; ++i) {
        xkp[i] = h * i * tb.kprime(h * i);
        kk[i] = tb.k(h * i);
    }
    double tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // trapezoid in x of the inner convolution, summed over u: equals (sum xK')(sum K) h^2
        tot -= c2 * h * i * kk[i] * h;
    }
    double sx = 0, sk = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = (i == 0) ? 0.5 : 1.0;
        sx += w * xkp[i] * h;
        sk += w * kk[i] * h;
    }
    tot += -c1 * sx * sk;
    CHECK(tot == doctest::Approx(j_total_integral(a)).epsilon(1e-3));
}

TEST_CASE("drift integrals: convolution reduction vs direct quadrature") {
    double a = 0.3;
    GridSpec g;
    const auto tb = build_kernel_table(a, g);
    double T = default_drift_horizon(a);
    auto fast = drift_integrals(tb, T, {0.02, true});
    auto slow = drift_integrals_direct(tb, T, 1e-9, 24);
    CHECK(fast.I1 == doctest::Approx(slow.I1).epsilon(1e-6));
    CHECK(fast.I2 == doctest::Approx(slow.I2).epsilon(1e-6));
    CHECK(fast.error < 1e-4);
    CHECK_THROWS_AS(drift_integrals(tb, T / 2), mdla::ConfigError);
}

TEST_CASE("drift integral grows linearly in T with the closed-form slope") {
    double a = 0.1;
    const auto& tb = table_for(a);
    double T = default_drift_horizon(a);
    auto d1 = drift_integrals(tb, 2 * T, {0.1, false});
    auto d2 = drift_integrals(tb, 3 * T, {0.1, false});
    double lim = 2 * a * a / (1 + 2 * a);
    double slope = lim * lim * j_total_integral(a);
    CHECK((d2.I2 - d1.I2) / T == doctest::Approx(slope).epsilon(1e-3));
    CHECK(d2.I1 == doctest::Approx(d1.I1).epsilon(2e-2));
}

TEST_CASE("table round trip") {
    const auto& tb = table_for(0.2);
    auto dir = std::filesystem::temp_directory_path();
    auto csv = (dir / "mdla_kt_roundtrip.csv").string(), js = (dir / "mdla_kt_roundtrip.json").string();
    tb.write_csv(csv);
    tb.write_json(js);
    auto back = KernelTable::load(csv, js);
    for (double t : {0.3, 17.0, 555.0}) {
        CHECK(back.k(t) == tb.k(t));
        CHECK(back.kstar(t) == tb.kstar(t));
        CHECK(back.cdf_at(t) == tb.cdf_at(t));
    }
}
