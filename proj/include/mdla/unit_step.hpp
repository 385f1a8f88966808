#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "mdla/errors.hpp"

namespace mdla {

// Nondecreasing integer step function: Y(s) = #{jumps < s}, +inf for s > tail.
struct UnitStep {
    std::vector<double> jumps;
    std::optional<double> tail_infinite_after;

    static constexpr double inf = std::numeric_limits<double>::infinity();

    UnitStep() = default;
    explicit UnitStep(std::vector<double> j, std::optional<double> tail = std::nullopt)
        : jumps(std::move(j)), tail_infinite_after(tail) {
        validate();
    }

    void validate() const {
        for (size_t i = 1; i < jumps.size(); ++i)
            if (!(jumps[i] > jumps[i - 1])) throw ConfigError("UnitStep: jump times must be strictly increasing");
        if (!jumps.empty() && jumps.front() < 0) throw ConfigError("UnitStep: negative jump time");
    }

    double operator()(double s) const {
        if (tail_infinite_after && s > *tail_infinite_after) return inf;
        return static_cast<double>(std::lower_bound(jumps.begin(), jumps.end(), s) - jumps.begin());
    }

    // number of jumps in [a, b)
    long count(double a, double b) const {
        auto lo = std::lower_bound(jumps.begin(), jumps.end(), a);
        auto hi = std::lower_bound(jumps.begin(), jumps.end(), b);
        return static_cast<long>(hi - lo);
    }

    // horizon beyond which the barrier is vacuous
    double horizon() const { return tail_infinite_after ? *tail_infinite_after : inf; }
};

}  // namespace mdla
