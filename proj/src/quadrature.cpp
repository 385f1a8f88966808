#include "mdla/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace mdla {

namespace {

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex m;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lk(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

}  // namespace mdla
