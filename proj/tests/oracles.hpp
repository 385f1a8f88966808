#pragma once

#include <cmath>

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

namespace oracle {

// density of tau on {tau < inf}: e^{-(1+a)t} I_1(bt)/(bt), b = sqrt(1+2a)
inline double tau_density(double a, double t) {
    double b = std::sqrt(1 + 2 * a);
    if (t == 0) return 0.5;
    double x = b * t;
    return std::exp(-(1 + a - b) * t) * gsl_sf_bessel_I1_scaled(x) / x;
}

inline double kprime(double a, double t) { return -a * (1 + 2 * a) * tau_density(a, t); }

// K(t) = a(1+2a) int_t^inf tau_density
inline double k(double a, double t) {
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
    struct P { double a; } p{a};
    gsl_function F;
    F.function = [](double x, void* pp) { return tau_density(static_cast<P*>(pp)->a, x); };
    F.params = &p;
    double r = 0, err = 0;
    gsl_integration_qagiu(&F, t, 1e-14, 1e-12, 2000, w, &r, &err);
    gsl_integration_workspace_free(w);
    return a * (1 + 2 * a) * r;
}

}  // namespace oracle
