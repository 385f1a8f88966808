#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "mdla/acceptance.hpp"
#include "mdla/errors.hpp"
#include "mdla/harness.hpp"
#include "mdla/parallel.hpp"

using namespace mdla;
using harness::json;

namespace {

enum Exit { ok = 0, criteria_failed = 1, config_error = 2, numeric_failure = 3 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::string out;
    unsigned threads = 1;
};

json load_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void add_common(CLI::App* sub, Common& c, bool with_replicas = true) {
    sub->add_option("--config", c.config, "JSON file: a manifest or just the params object");
    sub->add_option("--seed", c.seed, "seed base (overrides the config)");
    if (with_replicas) sub->add_option("--replicas", c.replicas, "number of replicas (overrides the config)");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores); results do not depend on it");
}

int finish(const harness::Report& r) {
    std::cout << r.text();
    return r.all_passed() ? ok : criteria_failed;
}

int run_kind(const std::string& kind, const Common& c) {
    json j = load_json(c.config);
    json manifest;
    if (j.contains("kind")) {
        if (!kind.empty() && j["kind"] != kind) throw ConfigError("manifest kind '" + j["kind"].get<std::string>() + "' does not match subcommand '" + kind + "'");
        manifest = j;
    } else {
        if (kind.empty()) throw ConfigError("run: the manifest needs a 'kind'");
        manifest = {{"kind", kind}, {"params", j}};
    }
    if (c.seed) manifest["seed"] = *c.seed;
    if (c.replicas) manifest["replicas"] = *c.replicas;
    if (!c.out.empty()) manifest["out"] = c.out;
    if (!manifest.contains("out")) manifest["out"] = "out_" + manifest["kind"].get<std::string>();
    auto e = harness::experiment_from_json(manifest);
    return finish(harness::run_experiment(e));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mdla: multi-particle diffusion-limited aggregation experiments"};
    app.require_subcommand(1);

    Common common;
    std::string run_kind_name;
    const char* kinds[] = {"simulate", "kernel", "hitting", "branching", "limit", "diagnose", "exponent", "compare"};
    for (const char* k : kinds) {
        auto* sub = app.add_subcommand(k, std::string("run a '") + k + "' experiment");
        add_common(sub, common);
        sub->callback([&, k] { run_kind_name = k; });
    }
    auto* run = app.add_subcommand("run", "run the experiment described by a manifest (--config)");
    add_common(run, common);
    run->callback([&] { run_kind_name = ""; });

    std::vector<int> only;
    auto* accept = app.add_subcommand("accept", "run the acceptance suite (one line per criterion)");
    add_common(accept, common, false);
    accept->add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 14));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        set_threads(common.threads);
        if (accept->parsed()) {
            acceptance::Options o;
            json j = load_json(common.config);
            if (common.seed) j["seed"] = *common.seed;
            o.params = acceptance::params_from_json(j);
            o.out = common.out.empty() ? "acceptance_out" : common.out;
            o.only.insert(only.begin(), only.end());
            o.on_check = [](const harness::Check& c) {
                std::printf("%-44s %-7s %s  [%.0fs]\n", c.name.c_str(), harness::status_name(c.status),
                            c.detail.c_str(), c.seconds);
                std::fflush(stdout);
            };
            auto rep = acceptance::run(o);
            long failed = 0;
            for (auto& c : rep.checks) failed += c.status == harness::Status::fail;
            std::printf("%ld of %zu criteria failed; report in %s/report.txt\n", failed, rep.checks.size(), o.out.c_str());
            return rep.all_passed() ? ok : criteria_failed;
        }
        if (run->parsed()) return run_kind("", common);
        return run_kind(run_kind_name, common);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const RangeError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << " (residual " << e.residual << ")\n";
        return numeric_failure;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return numeric_failure;
    }
}
