#include "mdla/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>
#include <json.hpp>

#include "mdla/errors.hpp"
#include "mdla/quadrature.hpp"

namespace mdla::kernels {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double pi = std::numbers::pi;

// adaptive G21 that stops once the error is below tol absolutely or relatively;
// Boost's own adaptive driver is purely relative and stalls on integrals that cancel to ~0
template <class F>
double gk_node(const F& f, double a, double b, unsigned depth, double abs_tol, double rel_tol, double& err) {
    double e = 0;
    double v = gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &e);
    if (depth == 0 || e <= abs_tol || e <= rel_tol * std::abs(v)) {
        err += e;
        return v;
    }
    double m = 0.5 * (a + b);
    return gk_node(f, a, m, depth - 1, abs_tol / 2, rel_tol, err) + gk_node(f, m, b, depth - 1, abs_tol / 2, rel_tol, err);
}

template <class F>
double gk(const F& f, double a, double b, unsigned depth, double tol, double* err) {
    double e = 0, v;
    if (std::isinf(b)) {
        // x = a + u/(1-u)
        auto g = [&](double u) {
            double w = 1 - u;
            return f(a + u / w) / (w * w);
        };
        v = gk_node(g, 0.0, 1.0, depth, tol, tol, e);
    } else {
        v = gk_node(f, a, b, depth, tol, tol, e);
    }
    if (err) *err = e;
    return v;
}

void check_alpha(double alpha) {
    if (!(alpha > 0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
}

struct HermiteSeg {
    double t0, h, y0, y1, m0, m1;

    double value(double x) const {
        double s = (x - t0) / h;
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
               (s3 - s2) * h * m1;
    }
    // int_{t0}^{x}
    double integral(double x) const {
        double s = (x - t0) / h;
        double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        return h * (y0 * (s4 / 2 - s3 + s) + h * m0 * (s4 / 4 - 2 * s3 / 3 + s2 / 2) + y1 * (-s4 / 2 + s3) +
                    h * m1 * (s4 / 4 - s3 / 3));
    }
    double full() const { return h / 2 * (y0 + y1) + h * h / 12 * (m0 - m1); }
};

}  // namespace

KernelParams::KernelParams(double a) : alpha(a), xi(1 / (1 + 2 * a)), kstar_limit(2 * a * a / (1 + 2 * a)) {}

double branch_point(double alpha) { return -1 - alpha + std::sqrt(1 + 2 * alpha); }

cplx branch_root(double alpha, cplx s) {
    double b = std::sqrt(1 + 2 * alpha);
    return std::sqrt(s + (1 + alpha + b)) * std::sqrt(s + (1 + alpha - b));
}

cplx phi(double alpha, cplx s) {
    if (s.imag() == 0 && s.real() < branch_point(alpha)) throw DomainError("phi: s on the branch cut");
    return 2 * alpha / (alpha + s + branch_root(alpha, s));
}

cplx tau_transform(double alpha, cplx s) {
    if (s.imag() == 0 && -s.real() < branch_point(alpha))
        throw DomainError("tau_transform: s on the branch cut");
    return 1.0 / (1 + alpha - s + branch_root(alpha, -s));
}

Moments moments(double a) {
    return {(1 + 2 * a) / (2 * a * a), (1 + a) * (1 + 2 * a) / std::pow(a, 4), -1.0, -(1 + 2 * a) / (a * a)};
}

double kprime_at_zero(double a) { return -a * (1 + 2 * a) / 2; }

cplx transform(double a, Transform f, cplx s) {
    cplx R = branch_root(a, s);
    switch (f) {
        case Transform::K:
            return 2 * a / (a + s + R);
        case Transform::Kprime:
            return a * (s - a - R) / (a + s + R);
        case Transform::Kprime2:
            return s * (a * (s - a - R) / (a + s + R)) - kprime_at_zero(a);
        case Transform::Kstar:
            return a * (R + a - s) / ((1 + 2 * a) * s);
        case Transform::KstarPrime:
            return a * (R - s - (1 + a)) / (1 + 2 * a);
        case Transform::Survival:
            return 2 * (1 + 2 * a) / ((R + a - s) * (a + s + R));
    }
    return 0;
}

double value_at_zero(double a, Transform f) {
    switch (f) {
        case Transform::K:
        case Transform::Kstar:
            return a;
        case Transform::Kprime:
            return kprime_at_zero(a);
        case Transform::Kprime2:
            return a * (1 + 2 * a) * (1 + a) / 2;
        case Transform::KstarPrime:
            return kprime_at_zero(a) + a * a;
        case Transform::Survival:
            return 1.0;
    }
    return 0;
}

Inversion invert(double a, Transform f, double t, double tol) {
    check_alpha(a);
    if (t <= 0) return {value_at_zero(a, f), 0.0};
    const unsigned depth = 18;
    double total = 0, err = 0, e = 0;
    auto G = [&](cplx s) { return std::exp(t * s) * transform(a, f, s); };

    if (t <= 1 / (a * a)) {
        double R = 1 / t;
        auto arc = [&](double th) {
            cplx s = std::polar(R, th);
            return (G(s) * cplx(0, 1) * s).imag();
        };
        total += gk(arc, 0.0, pi / 2, depth, tol, &e);
        err += e;
        // s = -w/t + iR, ds = -dw/t
        auto ray = [&](double w) {
            cplx s(-w / t, R);
            return -(G(s)).imag() / t;
        };
        total += gk(ray, 0.0, std::numeric_limits<double>::infinity(), depth,
                                                      tol, &e);
        err += e;
    } else {
        double c = -a * a / 4, H = a * a;
        auto vert = [&](double y) { return G(cplx(c, y)).real(); };
        // split the segment so each piece carries a bounded number of oscillations
        int pieces = std::max(1, static_cast<int>(std::ceil(t * H / pi)));
        for (int k = 0; k < pieces; ++k) {
            total += gk(vert, H * k / pieces, H * (k + 1) / pieces, depth, tol,
                                                          &e);
            err += e;
        }
        auto ray = [&](double w) {
            cplx s(c - w / t, H);
            return -(G(s)).imag() / t;
        };
        total += gk(ray, 0.0, std::numeric_limits<double>::infinity(), depth,
                                                      tol, &e);
        err += e;
    }
    double v = total / pi;
    if (f == Transform::Kstar && t > 1 / (a * a)) v += 2 * a * a / (1 + 2 * a);
    return {v, err / pi};
}

// ---------------------------------------------------------------- table

std::size_t KernelTable::segment(double x) const {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i == 0) return 0;
    return std::min(i - 1, t.size() - 2);
}

double KernelTable::k(double x) const {
    if (x < 0) return 0;
    if (x >= t_tail) return tail_A * std::exp(-tail_rate * (x - t_tail));
    std::size_t i = segment(x);
    return HermiteSeg{t[i], t[i + 1] - t[i], K[i], K[i + 1], Kp[i], Kp[i + 1]}.value(x);
}

double KernelTable::kprime(double x) const {
    if (x < 0) return 0;
    if (x >= t_tail) return -tail_rate * tail_A * std::exp(-tail_rate * (x - t_tail));
    std::size_t i = segment(x);
    return HermiteSeg{t[i], t[i + 1] - t[i], Kp[i], Kp[i + 1], Kpp[i], Kpp[i + 1]}.value(x);
}

double KernelTable::kstar(double x) const {
    if (x < 0) return 0;
    if (x >= t_tail) return params.kstar_limit;
    std::size_t i = segment(x);
    return HermiteSeg{t[i], t[i + 1] - t[i], Kstar[i], Kstar[i + 1], Kstarp[i], Kstarp[i + 1]}.value(x);
}

double KernelTable::kstarprime(double x) const {
    if (x < 0 || x >= t_tail) return 0;
    std::size_t i = segment(x);
    double h = t[i + 1] - t[i];
    // derivative of the Hermite interpolant of K*
    double s = (x - t[i]) / h;
    double s2 = s * s;
    return ((6 * s2 - 6 * s) * Kstar[i] + (3 * s2 - 4 * s + 1) * h * Kstarp[i] + (-6 * s2 + 6 * s) * Kstar[i + 1] +
            (3 * s2 - 2 * s) * h * Kstarp[i + 1]) /
           h;
}

double KernelTable::cdf_at(double x) const {
    if (x <= 0) return 0;
    if (x >= t_tail) return total_mass - survival(x);
    std::size_t i = segment(x);
    return cdf[i] + HermiteSeg{t[i], t[i + 1] - t[i], K[i], K[i + 1], Kp[i], Kp[i + 1]}.integral(x);
}

double KernelTable::survival(double x) const {
    if (x <= 0) return total_mass;
    if (x >= t_tail) return tail_A / tail_rate * std::exp(-tail_rate * (x - t_tail));
    std::size_t i = segment(x);
    HermiteSeg seg{t[i], t[i + 1] - t[i], K[i], K[i + 1], Kp[i], Kp[i + 1]};
    return sf[i + 1] + (seg.full() - seg.integral(x));
}

double KernelTable::quantile(double u) const {
    if (!(u >= 0 && u < 1)) throw RangeError("quantile: u outside [0,1)");
    double target = u * total_mass;
    double rest = total_mass - target;  // survival target
    if (rest <= sf.back()) {
        return t_tail + std::log(sf.back() / rest) / tail_rate;
    }
    // sf is decreasing; find segment with sf[i] >= rest > sf[i+1]
    auto it = std::lower_bound(sf.begin(), sf.end(), rest, [](double a, double b) { return a > b; });
    std::size_t i = static_cast<std::size_t>(it - sf.begin());
    if (i == 0) return 0;
    --i;
    HermiteSeg seg{t[i], t[i + 1] - t[i], K[i], K[i + 1], Kp[i], Kp[i + 1]};
    double need = sf[i] - rest;  // mass to accumulate from t[i]
    double lo = t[i], hi = t[i + 1];
    double x = lo + (hi - lo) * std::clamp(need / std::max(seg.full(), 1e-300), 0.0, 1.0);
    for (int it2 = 0; it2 < 60; ++it2) {
        double g = seg.integral(x) - need;
        if (g > 0) hi = x; else lo = x;
        double d = seg.value(x);
        double xn = d > 0 ? x - g / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * std::max(1.0, x)) { x = xn; break; }
        x = xn;
    }
    return x;
}

double kstar(const KernelTable& table, double t) { return table.kstar(t); }

nlohmann::json KernelTable::header() const {
    return {{"alpha", alpha},
            {"xi", params.xi},
            {"kstar_limit", params.kstar_limit},
            {"t_tail", t_tail},
            {"tail_A", tail_A},
            {"tail_rate", tail_rate},
            {"max_residual", max_residual},
            {"total_mass", total_mass},
            {"n_grid", t.size()}};
}

namespace {
std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}
}  // namespace

void KernelTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "t,K,Kstar,Kprime,CDF,Kprime2,Kstarprime,SF\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        out << fmt(t[i]) << ',' << fmt(K[i]) << ',' << fmt(Kstar[i]) << ',' << fmt(Kp[i]) << ',' << fmt(cdf[i])
            << ',' << fmt(Kpp[i]) << ',' << fmt(Kstarp[i]) << ',' << fmt(sf[i]) << '\n';
}

void KernelTable::write_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << header().dump(2) << '\n';
}

KernelTable KernelTable::load(const std::string& csv_path, const std::string& json_path) {
    std::ifstream jin(json_path);
    if (!jin) throw ConfigError("cannot open " + json_path);
    nlohmann::json h = nlohmann::json::parse(jin);
    KernelTable tb;
    tb.alpha = h.at("alpha").get<double>();
    tb.params = KernelParams(tb.alpha);
    tb.t_tail = h.at("t_tail").get<double>();
    tb.tail_A = h.at("tail_A").get<double>();
    tb.tail_rate = h.at("tail_rate").get<double>();
    tb.max_residual = h.at("max_residual").get<double>();
    tb.total_mass = h.at("total_mass").get<double>();
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open " + csv_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        double v[8];
        for (double& x : v) {
            if (!std::getline(ls, cell, ',')) throw ConfigError("kernel csv: short row");
            x = std::stod(cell);
        }
        tb.t.push_back(v[0]);
        tb.K.push_back(v[1]);
        tb.Kstar.push_back(v[2]);
        tb.Kp.push_back(v[3]);
        tb.cdf.push_back(v[4]);
        tb.Kpp.push_back(v[5]);
        tb.Kstarp.push_back(v[6]);
        tb.sf.push_back(v[7]);
    }
    if (tb.t.size() < 2) throw ConfigError("kernel csv: too few rows");
    return tb;
}

KernelTable build_kernel_table(double alpha, const GridSpec& spec) {
    check_alpha(alpha);
    KernelTable tb;
    tb.alpha = alpha;
    tb.params = KernelParams(alpha);
    double decay = -branch_point(alpha);
    double t_min_tail = spec.t_tail > 0 ? spec.t_tail : 10 / (alpha * alpha) * std::log(1 / alpha);
    double hmax = spec.decay_step / decay;

    auto push = [&](double x) {
        auto k = invert(alpha, Transform::K, x, spec.tol);
        auto kp = invert(alpha, Transform::Kprime, x, spec.tol);
        auto kpp = invert(alpha, Transform::Kprime2, x, spec.tol);
        auto ks = invert(alpha, Transform::Kstar, x, spec.tol);
        auto ksp = invert(alpha, Transform::KstarPrime, x, spec.tol);
        tb.t.push_back(x);
        tb.K.push_back(k.value);
        tb.Kp.push_back(kp.value);
        tb.Kpp.push_back(kpp.value);
        tb.Kstar.push_back(ks.value);
        tb.Kstarp.push_back(ksp.value);
        tb.max_residual = std::max({tb.max_residual, k.error, ks.error});
    };

    double x = 0;
    push(0);
    while (x < spec.t_uniform - 1e-12) {
        x += spec.h0;
        push(x);
    }
    for (;;) {
        double step = std::min(spec.rel_step * x, hmax);
        x += step;
        push(x);
        if (x >= t_min_tail) {
            double k = tb.K.back(), kp = tb.Kp.back();
            if (kp < 0 && k > 0 && k / (-kp / k) < spec.tail_mass) break;
            if (k <= 0 && x > 2 * t_min_tail) break;
        }
        if (tb.t.size() > 200000) throw NumericError("kernel table grid did not terminate", x);
    }
    if (spec.t_tail > 0 && x < spec.t_tail) throw NumericError("tail cutoff not reached", x);

    if (tb.max_residual > spec.residual_floor * alpha)
        throw NumericError("inversion residual above floor", tb.max_residual);

    tb.t_tail = tb.t.back();
    tb.tail_A = std::max(tb.K.back(), 0.0);
    tb.tail_rate = tb.K.back() > 0 && tb.Kp.back() < 0 ? -tb.Kp.back() / tb.K.back() : decay;

    std::size_t n = tb.t.size();
    tb.cdf.assign(n, 0.0);
    std::vector<double> seg(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        seg[i] = HermiteSeg{tb.t[i], tb.t[i + 1] - tb.t[i], tb.K[i], tb.K[i + 1], tb.Kp[i], tb.Kp[i + 1]}.full();
        tb.cdf[i + 1] = tb.cdf[i] + seg[i];
    }
    tb.sf.assign(n, 0.0);
    tb.sf[n - 1] = tb.tail_A / tb.tail_rate;
    for (std::size_t i = n - 1; i-- > 0;) tb.sf[i] = tb.sf[i + 1] + seg[i];
    tb.total_mass = tb.sf[0];
    return tb;
}

// ---------------------------------------------------------------- J

namespace {

// int_s^u K'(x) K(u-x) dx, pieces refined geometrically towards both ends
double kprime_k_conv(const KernelTable& tb, double s, double u, double tol) {
    auto f = [&](double x) { return tb.kprime(x) * tb.k(u - x); };
    std::vector<double> br{s, u};
    for (double d = 0.5; d < (u - s) / 2; d *= 2) {
        br.push_back(s + d);
        br.push_back(u - d);
    }
    std::sort(br.begin(), br.end());
    double conv = 0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i)
        if (br[i + 1] > br[i]) conv += gauss_kronrod<double, 15>::integrate(f, br[i], br[i + 1], 8, tol);
    return conv;
}

std::vector<double> lattice_grid(double h0, double ratio, double xmax) {
    std::vector<double> g{0.0};
    double x = 0;
    while (x < xmax) {
        x += std::max(h0, (ratio - 1) * x);
        g.push_back(std::min(x, xmax));
    }
    return g;
}

}  // namespace

double j_kernel(const KernelTable& tb, double s, double u, double tol) {
    if (!(s >= 0 && s < u)) throw RangeError("j_kernel: need 0 <= s < u");
    double a = tb.alpha;
    double c1 = 1 / (a * a * (1 + 2 * a) * (1 + 2 * a));
    double c2 = 2 / ((1 + 2 * a) * (1 + 2 * a));
    return -c1 * kprime_k_conv(tb, s, u, tol) - c2 * tb.k(u);
}

JLattice::JLattice(const KernelTable& tb, double u_max, double h0, double ratio) : table_(&tb), umax_(u_max) {
    double a = tb.alpha;
    c1_ = 1 / (a * a * (1 + 2 * a) * (1 + 2 * a));
    c2_ = 2 / ((1 + 2 * a) * (1 + 2 * a));
    g_ = lattice_grid(h0, ratio, u_max);
    std::size_t n = g_.size();
    d_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) {
            if (g_[i] + g_[j] > u_max * (1 + 1e-12) + g_[1]) break;
            d_[i * n + j] = kprime_k_conv(tb, g_[i], g_[i] + g_[j], 1e-9);
        }
}

double JLattice::operator()(double s, double u) const {
    if (u > umax_ || s >= u || s < 0) return 0;
    double w = u - s;
    std::size_t n = g_.size();
    auto locate = [&](double x, std::size_t& i, double& f) {
        auto it = std::upper_bound(g_.begin(), g_.end(), x);
        i = static_cast<std::size_t>(it - g_.begin());
        i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
        f = (x - g_[i]) / (g_[i + 1] - g_[i]);
    };
    std::size_t i, j;
    double fs, fw;
    locate(s, i, fs);
    locate(w, j, fw);
    double d = (1 - fs) * ((1 - fw) * d_[i * n + j] + fw * d_[i * n + j + 1]) +
               fs * ((1 - fw) * d_[(i + 1) * n + j] + fw * d_[(i + 1) * n + j + 1]);
    return -c1_ * d - c2_ * table_->k(u);
}

double j_total_integral(double a) { return -2 / (a * (1 + 2 * a) * (1 + 2 * a)); }

// ---------------------------------------------------------------- drift integrals

namespace {

std::mutex fftw_mutex;

// trapezoid convolution c_n = h [sum_k a_k b_{n-k} - (a_0 b_n + a_n b_0)/2]
std::vector<double> conv_trap(const std::vector<double>& a, const std::vector<double>& b, double h) {
    std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<double> x(m, 0.0), y(m, 0.0), r(m);
    std::copy(a.begin(), a.end(), x.begin());
    std::copy(b.begin(), b.end(), y.begin());
    std::size_t mc = m / 2 + 1;
    auto* fx = fftw_alloc_complex(mc);
    auto* fy = fftw_alloc_complex(mc);
    fftw_plan px, py, pr;
    {
        std::lock_guard<std::mutex> lk(fftw_mutex);
        px = fftw_plan_dft_r2c_1d(static_cast<int>(m), x.data(), fx, FFTW_ESTIMATE);
        py = fftw_plan_dft_r2c_1d(static_cast<int>(m), y.data(), fy, FFTW_ESTIMATE);
        pr = fftw_plan_dft_c2r_1d(static_cast<int>(m), fx, r.data(), FFTW_ESTIMATE);
    }
    fftw_execute(px);
    fftw_execute(py);
    for (std::size_t k = 0; k < mc; ++k) {
        double re = fx[k][0] * fy[k][0] - fx[k][1] * fy[k][1];
        double im = fx[k][0] * fy[k][1] + fx[k][1] * fy[k][0];
        fx[k][0] = re;
        fx[k][1] = im;
    }
    fftw_execute(pr);
    {
        std::lock_guard<std::mutex> lk(fftw_mutex);
        fftw_destroy_plan(px);
        fftw_destroy_plan(py);
        fftw_destroy_plan(pr);
    }
    fftw_free(fx);
    fftw_free(fy);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i)
        c[i] = h * (r[i] / static_cast<double>(m) - 0.5 * (a[0] * b[i] + a[i] * b[0]));
    return c;
}

double trap(const std::vector<double>& f, double h) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

std::pair<double, double> drift_at_step(const KernelTable& tb, double T, double h) {
    double a = tb.alpha;
    double c1 = 1 / (a * a * (1 + 2 * a) * (1 + 2 * a));
    double c2 = 2 / ((1 + 2 * a) * (1 + 2 * a));
    std::size_t n = static_cast<std::size_t>(T / h + 0.5) + 1;
    std::vector<double> K(n), Kp(n), Ks(n), Ksp(n), Phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = h * static_cast<double>(i);
        K[i] = tb.k(x);
        Kp[i] = tb.kprime(x);
        Ks[i] = tb.kstar(x);
        Ksp[i] = tb.kstarprime(x);
    }
    Phi[0] = 0;
    for (std::size_t i = 1; i < n; ++i)
        Phi[i] = Phi[i - 1] + h / 2 * (Ks[i - 1] + Ks[i]) + h * h / 12 * (Ksp[i - 1] - Ksp[i]);

    auto mul = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
        return z;
    };
    auto sub = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
        return z;
    };

    auto KPhi = mul(K, Phi);
    auto A1 = conv_trap(Kp, K, h);        // K' * K
    auto B1 = conv_trap(Kp, KPhi, h);     // K' * (K Phi)
    double I1 = -c1 * trap(sub(mul(Phi, A1), B1), h) - c2 * trap(KPhi, h);

    auto C1 = conv_trap(Ks, A1, h);               // K* * K' * K
    auto D1 = conv_trap(Ks, K, h);                // K* * K
    auto E1 = conv_trap(Kp, mul(Phi, D1), h);     // K' * (Phi (K* * K))
    auto F1 = conv_trap(K, mul(Ks, Phi), h);      // K * (K* Phi)
    double I2 = -c1 * trap(sub(mul(Phi, C1), E1), h) - c2 * trap(sub(mul(Phi, D1), F1), h);
    return {I1, I2};
}

}  // namespace

double default_drift_horizon(double a) {
    double l = std::log(1 / a);
    return l * l / (a * a);
}

DriftIntegrals drift_integrals(const KernelTable& tb, double T, const DriftOptions& opt) {
    if (opt.enforce_window && T < default_drift_horizon(tb.alpha) * (1 - 1e-12))
        throw ConfigError("drift_integrals: T below a^-2 log^2(1/a)");
    // step dividing T exactly so both grids end at T
    double m = std::max(1.0, std::ceil(T / opt.h));
    double h = T / m;
    auto [i1h, i2h] = drift_at_step(tb, T, h);
    auto [i1q, i2q] = drift_at_step(tb, T, h / 2);
    DriftIntegrals d;
    d.I1 = (4 * i1q - i1h) / 3;
    d.I2 = (4 * i2q - i2h) / 3;
    d.error = (std::abs(i1q - i1h) + std::abs(i2q - i2h)) / 3;
    if (!std::isfinite(d.I1) || !std::isfinite(d.I2)) throw NumericError("drift integrals not finite");
    d.T_cut = T;
    d.h = h / 2;
    return d;
}

DriftIntegrals drift_integrals_direct(const KernelTable& tb, double T, double tol, int nodes) {
    // x = T r, u = x m, s = u q on Gauss-Legendre nodes in r, m, q
    const auto& gl = gauss_legendre(nodes);
    std::size_t n = gl.x.size();
    std::vector<double> node(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        node[i] = 0.5 * (1 + gl.x[i]);
        w[i] = 0.5 * gl.w[i];
    }
    double I1 = 0, I2 = 0;
    // I1 = int_0^T du u int_0^1 dq J(uq, u) K*(u - uq)
    for (std::size_t i = 0; i < n; ++i) {
        double u = T * node[i];
        double inner = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double s = u * node[k];
            inner += w[k] * j_kernel(tb, s, u, tol) * tb.kstar(u - s);
        }
        I1 += T * w[i] * u * inner;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double x = T * node[i];
        double mid = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double u = x * node[j];
            double inner = 0;
            for (std::size_t k = 0; k < n; ++k) {
                double s = u * node[k];
                inner += w[k] * j_kernel(tb, s, u, tol) * tb.kstar(x - s);
            }
            mid += w[j] * u * inner * tb.kstar(x - u);
        }
        I2 += T * w[i] * x * mid;
    }
    DriftIntegrals d;
    d.I1 = I1;
    d.I2 = I2;
    d.T_cut = T;
    d.error = tol;
    return d;
}

Envelope fit_k_envelope(const KernelTable& tb, double c) {
    double a = tb.alpha;
    double C = 0;
    for (std::size_t i = 0; i < tb.t.size(); ++i) {
        double x = tb.t[i];
        C = std::max(C, std::abs(tb.K[i]) * std::sqrt(x + 1) * std::exp(c * a * a * x) / a);
    }
    return {C, c};
}

}  // namespace mdla::kernels
