#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>

#include "mdla/harness.hpp"

namespace mdla::acceptance {

// Sizes of the acceptance suite. The defaults are the full protocol; tools/acceptance.json
// spells them out and the CLI accepts a reduced copy for smoke runs.
struct Params {
    std::uint64_t seed = 20240;
    long hitting_n = 100000;
    long k_hat_n = 1000000;
    long j_hat_n = 1000000;
    int branching_roots = 20000;
    int bound_runs = 200;        // lambda = 1 to T = 1e4; the first compensator_runs are reused
    int compensator_runs = 50;
    int exponent_runs = 50;      // per lambda, T = 1e5
    int limit_runs = 200;        // lambda = 1 runs for the distributional comparison (shares the first exponent_runs)
    int limit_paths = 10000;
    int increment_runs = 400;
    int replay_runs = 3;         // per simulation family in the determinism replay
    double T_bound = 1e4;
    double T_growth = 1e5;
};
Params params_from_json(const harness::json& j);
harness::json to_json(const Params& p);

struct Options {
    Params params;
    std::string out = "acceptance_out";
    std::set<int> only;  // empty = all 14
    std::function<void(const harness::Check&)> on_check;  // progress hook, called as each criterion finishes
};

harness::Report run(const Options& opt);

}  // namespace mdla::acceptance
