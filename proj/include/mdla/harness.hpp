#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdla/kernels.hpp"
#include "mdla/model.hpp"
#include "mdla/stats.hpp"

namespace mdla::harness {

using nlohmann::json;

enum class Status { pass, fail, skipped };
const char* status_name(Status s);

struct Check {
    std::string name;
    Status status = Status::skipped;
    std::string detail;  // one line: measured values against the tolerance
    json values = json::object();
    double seconds = 0;
};

struct Report {
    std::string title;
    json config = json::object();
    std::vector<Check> checks;
    std::vector<std::string> artifacts;  // relative to the output dir
    bool all_passed() const;
    json to_json() const;
    // plain-text table; the timestamp lives only in its header line
    std::string text() const;
};
void write_report(const Report& r, const std::string& dir);

// CSV artifact: first line "# " + meta (config and seed), then header and rows.
// Replay compares only the body (everything after the comment lines).
struct Table {
    json meta = json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
void write_table(const Table& t, const std::string& path);
std::string csv_body(const std::string& path);
std::string fmt(double v);

enum class Kind { simulate, kernel, hitting, branching, limit, diagnose, exponent, compare };
Kind kind_from_string(const std::string& s);
const char* kind_name(Kind k);

struct Experiment {
    Kind kind = Kind::simulate;
    json params = json::object();
    int replicas = 1;
    std::uint64_t seed = 0;
    std::string out = "out";
    void validate() const;
};
Experiment experiment_from_json(const json& j);
json to_json(const Experiment& e);

// executes one experiment, writes its artifacts plus report.txt and summary.json into e.out
Report run_experiment(const Experiment& e);

// replica r of cfg runs with seed base + r; parallel over replicas, results in replica order
std::vector<model::RunRecord> simulate_replicas(model::ModelConfig cfg, std::uint64_t seed_base, int replicas);

struct KSRow {
    double s = 0;
    stats::KSResult ks;
    double sim_mean = 0, limit_mean = 0;
    long n_sim = 0, n_limit = 0;
};
// for each s: KS between {t^{-2/3} X_{s t}} over runs and {int_0^s Z} over limit paths;
// limit_samples[path][k] is the integral up to s_grid[k]
std::vector<KSRow> compare_limit(const std::vector<std::vector<double>>& sim_jumps,
                                 const std::vector<std::vector<double>>& limit_samples,
                                 const std::vector<double>& s_grid, double t_scale, double sim_horizon);

// int_0^inf t^p K(t) dt from the table (p <= 2): Gauss-Legendre per cell plus the analytic tail
double table_moment(const kernels::KernelTable& table, int p);

// pooled compensator gaps of a set of runs
std::vector<double> compensator_gaps(const std::vector<model::RunRecord>& runs);

}  // namespace mdla::harness
