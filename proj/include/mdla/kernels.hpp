#pragma once

#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

namespace mdla::kernels {

using cplx = std::complex<double>;

struct KernelParams {
    double alpha;
    double xi;           // 1/(1+2a) = P(T < inf)
    double kstar_limit;  // 2a^2/(1+2a)
    explicit KernelParams(double a);
};

// E[e^{s tau} 1{tau<inf}], cut along real s >= 1+a-sqrt(1+2a)
cplx tau_transform(double alpha, cplx s);
// Laplace transform of K: E e^{-sX}, cut along real s <= -1-a+sqrt(1+2a)
cplx phi(double alpha, cplx s);
// sqrt((1+a+s)^2 - (1+2a)) on the principal sheet of the factorized form
cplx branch_root(double alpha, cplx s);
double branch_point(double alpha);  // -1-a+sqrt(1+2a), the rightmost singularity

struct Moments {
    double m1, m2, d1, d2;
};
Moments moments(double alpha);

// K'(0) from the transform expansion s*phi(s) = a + K'(0)/s + ...
double kprime_at_zero(double alpha);

enum class Transform { K, Kprime, Kprime2, Kstar, KstarPrime, Survival };

// Laplace transform of the chosen function at s
cplx transform(double alpha, Transform f, cplx s);
// value at t = 0 from the large-s expansion
double value_at_zero(double alpha, Transform f);

struct Inversion {
    double value;
    double error;  // quadrature error estimate
};

// numerical Bromwich inversion on the shifted line/arc contour (t <= a^-2)
// or the vertical segment at Re s = -a^2/4 (t > a^-2)
Inversion invert(double alpha, Transform f, double t, double tol = 1e-11);

struct GridSpec {
    double h0 = 0.05;          // uniform spacing on [0, t_uniform]
    double t_uniform = 2.0;
    double rel_step = 0.03;    // geometric spacing beyond t_uniform
    double decay_step = 0.25;  // max step in units of the decay length 1/|branch point|
    double t_tail = 0.0;       // 0 = automatic
    double tail_mass = 1e-12;  // stop when remaining mass drops below this
    double tol = 1e-11;
    double residual_floor = 1e-8;  // numeric error if any inversion error exceeds this (relative to alpha)
};

class KernelTable {
public:
    double alpha = 0;
    KernelParams params{0.25};
    std::vector<double> t, K, Kstar, Kp, Kpp, Kstarp, cdf, sf;
    double t_tail = 0;
    double tail_A = 0, tail_rate = 0;  // K(t) = A exp(-rate (t - t_tail)) beyond t_tail
    double max_residual = 0;           // largest inversion error estimate on the grid
    double total_mass = 0;             // integral of K incl. tail

    double k(double x) const;
    double kprime(double x) const;
    double kstar(double x) const;
    double kstarprime(double x) const;
    double cdf_at(double x) const;       // int_0^x K
    double survival(double x) const;     // int_x^inf K
    double quantile(double u) const;     // inverse of normalized cdf

    std::size_t segment(double x) const;

    nlohmann::json header() const;
    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
    static KernelTable load(const std::string& csv_path, const std::string& json_path);
};

KernelTable build_kernel_table(double alpha, const GridSpec& spec = {});

double kstar(const KernelTable& table, double t);

// J_{s,u}: s = extra barrier jump location, u = threshold, 0 <= s < u
double j_kernel(const KernelTable& table, double s, double u, double tol = 1e-10);

// J on a product lattice in (s, w = u - s), both geometric from h0 with the given ratio;
// D(s, w) = int_s^{s+w} K'(x) K(s+w-x) dx is tabulated and J = -c1 D - c2 K(u). Zero beyond u_max.
class JLattice {
public:
    JLattice(const KernelTable& table, double u_max, double h0 = 0.05, double ratio = 1.02);
    double operator()(double s, double u) const;
    double u_max() const { return umax_; }
    std::size_t size() const { return g_.size(); }

private:
    const KernelTable* table_;
    double umax_, c1_, c2_;
    std::vector<double> g_;
    std::vector<double> d_;
};

// int_0^inf int_0^u J_{s,u} ds du = -2/(a (1+2a)^2)
double j_total_integral(double alpha);

struct DriftIntegrals {
    double I1 = 0, I2 = 0;
    double error = 0;
    double T_cut = 0;
    double h = 0;
};

struct DriftOptions {
    double h = 0.1;           // convolution grid step (halved for the Richardson estimate)
    bool enforce_window = true;
};

// I1 = int_0^T int_0^u J_{s,u} K*(u-s) ds du
// I2 = int_0^T int_0^x int_0^u J_{s,u} K*(x-u) K*(x-s) ds du dx
DriftIntegrals drift_integrals(const KernelTable& table, double T, const DriftOptions& opt = {});
double default_drift_horizon(double alpha);  // a^-2 log^2(1/a)

// direct nested quadrature of the same integrals (slow; small T only)
DriftIntegrals drift_integrals_direct(const KernelTable& table, double T, double tol = 1e-9, int nodes = 48);

struct Envelope {
    double C, c;
};
// smallest C with K(t) <= C a e^{-c a^2 t}/sqrt(t+1) on the table grid, for the given c
Envelope fit_k_envelope(const KernelTable& table, double c);

}  // namespace mdla::kernels
