#pragma once

#include <vector>

namespace mdla {

struct GaussRule {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre rule with n nodes (cached, thread-safe)
const GaussRule& gauss_legendre(int n);

}  // namespace mdla
