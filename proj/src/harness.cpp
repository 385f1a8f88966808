#include "mdla/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mdla/branching.hpp"
#include "mdla/diagnostics.hpp"
#include "mdla/errors.hpp"
#include "mdla/hitting.hpp"
#include "mdla/kernels.hpp"
#include "mdla/limit.hpp"
#include "mdla/parallel.hpp"
#include "mdla/quadrature.hpp"

namespace fs = std::filesystem;

namespace mdla::harness {

const char* status_name(Status s) {
    switch (s) {
        case Status::pass: return "PASS";
        case Status::fail: return "FAIL";
        default: return "SKIPPED";
    }
}

bool Report::all_passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == Status::fail; });
}

json Report::to_json() const {
    json j{{"title", title}, {"config", config}, {"artifacts", artifacts}, {"passed", all_passed()}};
    j["checks"] = json::array();
    for (auto& c : checks)
        j["checks"].push_back({{"name", c.name},
                               {"status", status_name(c.status)},
                               {"detail", c.detail},
                               {"values", c.values},
                               {"seconds", c.seconds}});
    return j;
}

std::string Report::text() const {
    std::ostringstream o;
    std::time_t now = std::time(nullptr);
    char ts[64];
    std::strftime(ts, sizeof ts, "%Y-%m-%d %H:%M:%S", std::localtime(&now));
    o << title << "  (" << ts << ")\n";
    std::size_t w = 4;
    for (auto& c : checks) w = std::max(w, c.name.size());
    for (auto& c : checks) {
        o << "  " << c.name << std::string(w - c.name.size() + 2, ' ');
        std::string st = status_name(c.status);
        o << st << std::string(9 - st.size(), ' ') << c.detail;
        if (c.seconds > 0) {
            char b[32];
            std::snprintf(b, sizeof b, "  [%.0fs]", c.seconds);
            o << b;
        }
        o << "\n";
    }
    long n_fail = std::count_if(checks.begin(), checks.end(), [](auto& c) { return c.status == Status::fail; });
    o << (n_fail ? std::to_string(n_fail) + " check(s) failed" : std::string("all checks passed or skipped")) << "\n";
    return o.str();
}

namespace {

void write_text(const std::string& path, const std::string& body) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw ResourceError("cannot write " + path);
    o << body;
}

void ensure_dir(const std::string& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw ResourceError("cannot create " + d + ": " + ec.message());
}

}  // namespace

void write_report(const Report& r, const std::string& dir) {
    ensure_dir(dir);
    write_text(dir + "/report.txt", r.text());
    write_text(dir + "/summary.json", r.to_json().dump(2) + "\n");
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

void write_table(const Table& t, const std::string& path) {
    std::string s = "# " + t.meta.dump() + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + fmt(row[i]);
        s += "\n";
    }
    write_text(path, s);
}

std::string csv_body(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot read " + path);
    std::string line, body;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') body += line + "\n";
    return body;
}

// ---------------------------------------------------------------- manifest

namespace {

const std::map<std::string, Kind> kinds{{"simulate", Kind::simulate},   {"kernel", Kind::kernel},
                                        {"hitting", Kind::hitting},     {"branching", Kind::branching},
                                        {"limit", Kind::limit},         {"diagnose", Kind::diagnose},
                                        {"exponent", Kind::exponent},   {"compare", Kind::compare}};

}  // namespace

Kind kind_from_string(const std::string& s) {
    auto it = kinds.find(s);
    if (it == kinds.end()) throw ConfigError("unknown experiment kind '" + s + "'");
    return it->second;
}

const char* kind_name(Kind k) {
    for (auto& [n, v] : kinds)
        if (v == k) return n.c_str();
    return "?";
}

void Experiment::validate() const {
    if (replicas < 1) throw ConfigError("experiment: replicas must be >= 1");
    if (out.empty()) throw ConfigError("experiment: empty output dir");
    if (!params.is_object()) throw ConfigError("experiment: params must be an object");
}

Experiment experiment_from_json(const json& j) {
    Experiment e;
    try {
        e.kind = kind_from_string(j.at("kind").get<std::string>());
        e.params = j.value("params", json::object());
        e.replicas = j.value("replicas", 1);
        e.seed = j.value("seed", std::uint64_t{0});
        e.out = j.value("out", std::string("out"));
    } catch (const json::exception& x) {
        throw ConfigError(std::string("manifest: ") + x.what());
    }
    e.validate();
    return e;
}

json to_json(const Experiment& e) {
    return {{"kind", kind_name(e.kind)}, {"params", e.params}, {"replicas", e.replicas}, {"seed", e.seed}, {"out", e.out}};
}

// ---------------------------------------------------------------- shared pipelines

std::vector<model::RunRecord> simulate_replicas(model::ModelConfig cfg, std::uint64_t seed_base, int replicas) {
    std::vector<model::RunRecord> out(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        auto c = cfg;
        c.seed = seed_base + r;
        out[r] = model::run(c);
    });
    return out;
}

std::vector<KSRow> compare_limit(const std::vector<std::vector<double>>& sim_jumps,
                                 const std::vector<std::vector<double>>& limit_samples,
                                 const std::vector<double>& s_grid, double t_scale, double sim_horizon) {
    double smax = s_grid.empty() ? 0 : *std::max_element(s_grid.begin(), s_grid.end());
    if (sim_horizon < t_scale * smax * (1 - 1e-12)) throw ConfigError("compare_limit: runs end before t_scale * max s");
    std::vector<KSRow> rows;
    double norm = std::pow(t_scale, -2.0 / 3);
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        double t = s_grid[k] * t_scale;
        std::vector<double> a, b;
        for (auto& j : sim_jumps) a.push_back(norm * double(std::upper_bound(j.begin(), j.end(), t) - j.begin()));
        for (auto& p : limit_samples) b.push_back(p.at(k));
        KSRow r;
        r.s = s_grid[k];
        r.ks = stats::ks_two_sample(a, b);
        r.sim_mean = stats::mean_var(a).mean;
        r.limit_mean = stats::mean_var(b).mean;
        r.n_sim = static_cast<long>(a.size());
        r.n_limit = static_cast<long>(b.size());
        rows.push_back(r);
    }
    return rows;
}

std::vector<double> compensator_gaps(const std::vector<model::RunRecord>& runs) {
    std::vector<double> g;
    for (auto& r : runs) {
        double prev = 0;
        for (double c : r.compensator) {
            g.push_back(c - prev);
            prev = c;
        }
    }
    return g;
}

// ---------------------------------------------------------------- experiments

namespace {

std::string num(double v, int prec = 4) {
    char b[48];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    return b;
}

Check make(const std::string& name, bool ok, const std::string& detail) {
    return {name, ok ? Status::pass : Status::fail, detail};
}

Check skipped(const std::string& name, const std::string& why) { return {name, Status::skipped, why}; }

std::string tag(double a) {
    std::string s = num(a, 6);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

struct Ctx {
    const Experiment& e;
    Report& rep;
    json meta(json extra = json::object()) const {
        json m{{"experiment", to_json(e)}, {"seed", e.seed}};
        m.update(extra);
        return m;
    }
    void table(const Table& t, const std::string& name) {
        write_table(t, e.out + "/" + name);
        rep.artifacts.push_back(name);
    }
};

void exp_simulate(Ctx& c) {
    auto cfg = model::config_from_json(c.e.params);
    auto runs = simulate_replicas(cfg, c.e.seed, c.e.replicas);
    ensure_dir(c.e.out + "/runs");
    Table t{c.meta({{"model", model::to_json(cfg)}}), {"replica", "seed", "x_final", "x_bound", "n_events"}, {}};
    bool bound_ok = true;
    long worst = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "run_%04zu", r);
        model::write_record(runs[r], c.e.out + "/runs", stem);
        c.rep.artifacts.push_back(std::string("runs/") + stem + "_front.csv");
        long x = static_cast<long>(runs[r].jumps.size());
        long b = model::x_bound(cfg.horizon - cfg.t0);
        bound_ok &= x <= b;
        worst = std::max(worst, x);
        t.rows.push_back({double(r), double(runs[r].config.seed), double(x), double(b), double(runs[r].n_events)});
    }
    c.table(t, "runs.csv");
    if (cfg.lambda <= 1 && cfg.init_mode == model::InitMode::poisson)
        c.rep.checks.push_back(make("a-priori bound X_T <= T^{3/4} log^2 T", bound_ok,
                                    "max X_T " + std::to_string(worst) + " vs bound " +
                                        std::to_string(model::x_bound(cfg.horizon - cfg.t0))));
    else
        c.rep.checks.push_back(skipped("a-priori bound X_T <= T^{3/4} log^2 T", "only for lambda <= 1 Poisson fields"));
    auto gaps = compensator_gaps(runs);
    if (gaps.size() >= 100) {
        auto ks = stats::ks_one_sample(gaps, [](double x) { return 1 - std::exp(-x); });
        c.rep.checks.push_back(make("compensator gaps ~ Exp(1)", ks.p_value > 0.01,
                                    "KS " + num(ks.statistic) + ", p " + num(ks.p_value) + " over " +
                                        std::to_string(gaps.size()) + " gaps (need p > 0.01)"));
    } else {
        c.rep.checks.push_back(skipped("compensator gaps ~ Exp(1)", "fewer than 100 absorptions"));
    }
}

void exp_kernel(Ctx& c) {
    auto alphas = c.e.params.value("alphas", std::vector<double>{0.1});
    for (double a : alphas) {
        auto tb = kernels::build_kernel_table(a);
        std::string stem = "kernel_a" + tag(a);
        tb.write_csv(c.e.out + "/" + stem + ".csv");
        tb.write_json(c.e.out + "/" + stem + ".json");
        c.rep.artifacts.push_back(stem + ".csv");
        double m0 = table_moment(tb, 0), m1 = table_moment(tb, 1), m2 = table_moment(tb, 2);
        double e1 = (1 + 2 * a) / (2 * a * a), e2 = (1 + a) * (1 + 2 * a) / std::pow(a, 4);
        double lim = 2 * a * a / (1 + 2 * a), ks = tb.kstar(tb.t_tail * (1 - 1e-12));
        std::string at = " (alpha " + num(a) + ")";
        c.rep.checks.push_back(make("mass" + at, std::abs(m0 - 1) <= 1e-3, num(m0, 8) + " vs 1 +- 1e-3"));
        c.rep.checks.push_back(make("first moment" + at, std::abs(m1 / e1 - 1) <= 5e-3,
                                    num(m1, 8) + " vs " + num(e1, 8) + " within 0.5%"));
        c.rep.checks.push_back(make("second moment" + at, std::abs(m2 / e2 - 1) <= 5e-3,
                                    num(m2, 8) + " vs " + num(e2, 8) + " within 0.5%"));
        c.rep.checks.push_back(make("renewal limit" + at, std::abs(ks / lim - 1) <= 0.01,
                                    "K*(t_tail) " + num(ks, 8) + " vs " + num(lim, 8) + " within 1%"));
    }
}

void exp_hitting(Ctx& c) {
    auto alphas = c.e.params.value("alphas", std::vector<double>{0.1});
    long n = c.e.params.value("n", 100000L);
    Table t{c.meta(), {"alpha", "n", "hits", "censored", "p_hat", "stderr", "xi", "z"}, {}};
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        double a = alphas[i];
        hitting::HittingConfig h;
        h.alpha = a;
        h.n_samples = n;
        h.seed = c.e.seed + i;
        auto s = hitting::estimate_hit_probability(h);
        double xi = 1 / (1 + 2 * a), z = (s.p - xi) / s.stderr_;
        t.rows.push_back({a, double(s.n), double(s.hits), double(s.censored), s.p, s.stderr_, xi, z});
        c.rep.checks.push_back(make("P(T<inf) = 1/(1+2a) (alpha " + num(a) + ")", std::abs(z) <= 3,
                                    num(s.p, 6) + " +- " + num(s.stderr_, 3) + " vs " + num(xi, 6) +
                                        ", z = " + num(z, 3)));
    }
    c.table(t, "hitting.csv");
}

void exp_branching(Ctx& c) {
    double a = c.e.params.value("alpha", 0.2);
    int roots = c.e.params.value("roots", 20000);
    int G = c.e.params.value("max_generation", 30);
    auto tb = kernels::build_kernel_table(a);
    branching::BranchConfig b;
    b.alpha = a;
    b.t0_minus = -1;
    b.t0 = 0;
    b.roots.assign(roots, 0.0);
    b.max_generation = G;
    b.seed = c.e.seed;
    auto tree = branching::simulate_cluster(b, tb);
    double sum = 0, cnt = 0;
    for (auto& p : tree.points)
        if (p.generation < G) {
            sum += p.children;
            ++cnt;
        }
    double mean = sum / cnt, se = 1 / std::sqrt(cnt);
    c.rep.checks.push_back(make("mean direct offspring = 1", std::abs(mean - 1) <= 3 * se,
                                num(mean, 6) + " +- " + num(se, 3) + " over " + num(cnt, 8) + " points"));
    auto p = branching::survival_by_generation(G);
    auto d = tree.root_depths();
    Table t{c.meta({{"alpha", a}, {"roots", roots}}), {"generation", "survival_hat", "survival_pgf", "stderr"}, {}};
    double worst = 0;
    for (int n = 1; n <= G; ++n) {
        double alive = 0;
        for (int x : d) alive += x >= n;
        double ph = alive / roots, s = std::sqrt(p[n] * (1 - p[n]) / roots);
        worst = std::max(worst, std::abs(ph - p[n]) / s);
        t.rows.push_back({double(n), ph, p[n], s});
    }
    c.table(t, "generations.csv");
    c.rep.checks.push_back(make("generation survival vs pgf recursion", worst <= 3,
                                "max |z| " + num(worst, 3) + " over generations 1.." + std::to_string(G)));
}

limit::LimitConfig limit_config(const json& p, std::uint64_t seed, int paths) {
    limit::LimitConfig l;
    std::string sc = p.value("scheme", std::string("exact_besq"));
    if (sc == "exact_besq") l.scheme = limit::Scheme::exact_besq;
    else if (sc == "euler_bessel") l.scheme = limit::Scheme::euler_bessel;
    else if (sc == "euler_z") l.scheme = limit::Scheme::euler_z;
    else throw ConfigError("limit: unknown scheme '" + sc + "'");
    l.s_max = p.value("s_max", 1.0);
    if (p.contains("z0") && !p["z0"].is_null()) l.z0 = p["z0"].get<double>();
    if (p.contains("sigma2")) {
        limit::Generalized g{p["sigma2"].get<double>(), std::nullopt};
        if (p.contains("drift")) g.drift_coeff = p["drift"].get<double>();
        l.generalized = g;
    }
    l.n_paths = paths;
    l.seed = seed;
    l.euler_step = p.value("euler_step", l.euler_step);
    l.step_factor = p.value("step_factor", l.step_factor);
    l.validate();
    return l;
}

void exp_limit(Ctx& c) {
    auto l = limit_config(c.e.params, c.e.seed, c.e.params.value("n_paths", 1000));
    auto s_points = c.e.params.value("s_points", std::vector<double>{l.s_max});
    for (double s : s_points) {
        if (!(s > 0 && s <= l.s_max)) throw RangeError("limit: s point outside (0, s_max]");
        l.extra_times.push_back(s);
    }
    auto grid = limit::time_grid(l);
    std::vector<std::size_t> idx;
    for (double s : s_points) idx.push_back(std::lower_bound(grid.begin(), grid.end(), s * (1 - 1e-14)) - grid.begin());
    std::vector<std::vector<double>> rows(l.n_paths);
    std::vector<double> v2(l.n_paths);
    std::vector<char> ex(l.n_paths);
    parallel_for(l.n_paths, [&](std::size_t k) {
        auto p = limit::sample_path(l, k);
        rows[k].push_back(double(k));
        for (auto i : idx) rows[k].push_back(p.exploded && p.times[i] >= p.explosion_time ? INFINITY : p.cumZ[i]);
        v2[k] = p.V.back() * p.V.back();
        ex[k] = p.exploded;
    });
    Table t{c.meta({{"s_points", s_points}}), {"path"}, rows};
    for (double s : s_points) t.columns.push_back("int_Z_to_" + num(s));
    c.table(t, "functional.csv");
    bool from_zero = std::isinf(l.z0) && !l.generalized && l.scheme != limit::Scheme::euler_z;
    if (from_zero && l.n_paths >= 30) {
        auto mv = stats::mean_var(v2);
        double e = 8.0 / 3 * l.s_max;
        c.rep.checks.push_back(make("E V_s^2 = (8/3) s", std::abs(mv.mean - e) <= 3 * mv.stderr_,
                                    num(mv.mean, 6) + " +- " + num(mv.stderr_, 3) + " vs " + num(e, 6)));
    } else {
        c.rep.checks.push_back(skipped("E V_s^2 = (8/3) s", "needs V started at 0 and >= 30 paths"));
    }
    if (l.generalized) {
        double f = double(std::count(ex.begin(), ex.end(), 1)) / l.n_paths;
        c.rep.checks.push_back({"explosion fraction", Status::skipped, "measured " + num(f, 4) + " (no threshold)",
                                {{"fraction", f}}});
    }
}

model::ModelConfig sandwich_config(const json& p) {
    model::ModelConfig m;
    m.lambda = p.value("lambda", 1.0);
    m.init_mode = p.value("mode", std::string("upper")) == "lower" ? model::InitMode::sandwich_lower
                                                                   : model::InitMode::sandwich_upper;
    m.alpha = p.value("alpha", 0.05);
    m.t0 = p.value("t0", std::pow(m.alpha, -3));
    return m;
}

void exp_diagnose(Ctx& c) {
    auto m = sandwich_config(c.e.params);
    double a = m.alpha;
    double delta = c.e.params.value("delta", 25 / (a * a));
    double back = c.e.params.value("window", std::pow(a, -3));
    m.horizon = m.t0 + 2 * delta;
    auto tb = kernels::build_kernel_table(a);
    auto runs = simulate_replicas(m, c.e.seed, c.e.replicas);
    double t0m = m.t0 - back;
    Table inc{c.meta({{"model", model::to_json(m)}, {"delta", delta}}), {"replica", "seed", "dL_delta", "dL_2delta"}, {}};
    std::vector<double> d1, d2;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        auto pts = diagnostics::absorptions(runs[r], t0m, m.horizon);
        double L0 = diagnostics::smoothed_speed(pts, tb, m.t0);
        d1.push_back(diagnostics::smoothed_speed(pts, tb, m.t0 + delta) - L0);
        d2.push_back(diagnostics::smoothed_speed(pts, tb, m.t0 + 2 * delta) - L0);
        inc.rows.push_back({double(r), double(runs[r].config.seed), d1.back(), d2.back()});
    }
    c.table(inc, "increments.csv");
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(m.t0 + 2 * delta * k / 100);
    auto ss = diagnostics::speed_series(runs[0], tb, t0m, grid);
    Table sp{c.meta({{"replica", 0}}), {"t", "h", "S1", "L"}, {}};
    for (std::size_t k = 0; k < grid.size(); ++k) sp.rows.push_back({ss.t[k], ss.h[k], ss.S1[k], ss.L[k]});
    c.table(sp, "speed_series_0.csv");
    if (c.e.replicas >= 10) {
        auto s1 = diagnostics::increment_stats(d1, a, delta, 1000, c.e.seed);
        c.rep.checks.push_back(make("Var(dL)/(4 a^5 Delta) in [0.6, 1.6]", s1.ratio >= 0.6 && s1.ratio <= 1.6,
                                    "ratio " + num(s1.ratio, 4) + " (Delta " + num(delta) + ")"));
    } else {
        c.rep.checks.push_back(skipped("Var(dL)/(4 a^5 Delta) in [0.6, 1.6]", "needs >= 10 replicas"));
    }
}

double expected_slope(double lambda) { return lambda == 1 ? 2.0 / 3 : 0.5; }

void exp_exponent(Ctx& c) {
    model::ModelConfig m;
    m.lambda = c.e.params.value("lambda", 1.0);
    double t_min = c.e.params.value("t_min", 1e3), t_max = c.e.params.value("t_max", 1e5);
    int np = c.e.params.value("n_points", 20);
    m.horizon = t_max;
    auto runs = simulate_replicas(m, c.e.seed, c.e.replicas);
    auto grid = stats::log_grid(t_min, t_max, np);
    Table t{c.meta({{"model", model::to_json(m)}}), {"t", "mean_X", "min_X"}, {}};
    std::vector<std::vector<double>> jumps;
    for (auto& r : runs) jumps.push_back(r.jumps);
    for (double x : grid) {
        double s = 0, lo = INFINITY;
        for (auto& j : jumps) {
            double v = double(std::upper_bound(j.begin(), j.end(), x) - j.begin());
            s += v;
            lo = std::min(lo, v);
        }
        t.rows.push_back({x, s / jumps.size(), lo});
    }
    c.table(t, "trajectories.csv");
    std::string name = "growth exponent (lambda " + num(m.lambda) + ")";
    if (c.e.replicas < 10 || t_max / t_min < 10) {
        c.rep.checks.push_back(skipped(name, "needs >= 10 runs and t_max/t_min >= 10"));
        return;
    }
    auto fit = stats::fit_exponent_jumps(jumps, t_min, t_max, np, 1000, c.e.seed);
    c.rep.config["fit"] = {{"slope", fit.slope}, {"ci", {fit.ci_lo, fit.ci_hi}}, {"intercept", fit.intercept}};
    std::string d = "slope " + num(fit.slope, 4) + " [" + num(fit.ci_lo, 4) + ", " + num(fit.ci_hi, 4) + "]";
    if (m.lambda > 1)
        c.rep.checks.push_back(make(name, fit.slope >= 0.9, d + ", need >= 0.9"));
    else
        c.rep.checks.push_back(make(name, std::abs(fit.slope - expected_slope(m.lambda)) <= 0.05,
                                    d + ", need " + num(expected_slope(m.lambda)) + " +- 0.05"));
}

void exp_compare(Ctx& c) {
    auto scales = c.e.params.value("t_scales", std::vector<double>{1e3, 1e4});
    auto s_grid = c.e.params.value("s_grid", std::vector<double>{0.25, 0.5, 1.0});
    int paths = c.e.params.value("n_paths", 2000);
    if (scales.empty() || s_grid.empty()) throw ConfigError("compare: empty t_scales or s_grid");
    double smax = *std::max_element(s_grid.begin(), s_grid.end());
    model::ModelConfig m;
    m.lambda = 1;
    m.horizon = *std::max_element(scales.begin(), scales.end()) * smax;
    auto runs = simulate_replicas(m, c.e.seed, c.e.replicas);
    std::vector<std::vector<double>> jumps;
    for (auto& r : runs) jumps.push_back(r.jumps);
    limit::LimitConfig l;
    l.s_max = smax;
    l.n_paths = paths;
    l.seed = c.e.seed + 1'000'003;
    auto lim = limit::sample_functional(l, s_grid);
    Table t{c.meta({{"n_paths", paths}}), {"t_scale", "s", "ks", "p", "sim_mean", "limit_mean"}, {}};
    std::vector<double> ks_at_max;  // KS at the largest s, per scale
    for (double sc : scales) {
        auto rows = compare_limit(jumps, lim, s_grid, sc, m.horizon);
        for (auto& r : rows) t.rows.push_back({sc, r.s, r.ks.statistic, r.ks.p_value, r.sim_mean, r.limit_mean});
        for (auto& r : rows)
            if (r.s == smax) ks_at_max.push_back(r.ks.statistic);
    }
    c.table(t, "ks_table.csv");
    std::string name = "KS(t^{-2/3} X, int Z) <= 0.15 at the largest scale";
    if (c.e.replicas >= 50)
        c.rep.checks.push_back(make(name, ks_at_max.back() <= 0.15, "KS " + num(ks_at_max.back(), 4)));
    else
        c.rep.checks.push_back(skipped(name, "needs >= 50 replicas"));
    if (scales.size() >= 3 && std::is_sorted(scales.begin(), scales.end())) {
        bool mono = true;
        std::string d;
        for (std::size_t i = 0; i < ks_at_max.size(); ++i) {
            d += (i ? " > " : "") + num(ks_at_max[i], 3);
            if (i && !(ks_at_max[i] < ks_at_max[i - 1])) mono = false;
        }
        c.rep.checks.push_back(make("KS decreases with t", mono, d));
    } else {
        c.rep.checks.push_back(skipped("KS decreases with t", "needs >= 3 increasing scales"));
    }
}

}  // namespace

double table_moment(const kernels::KernelTable& tb, int p) {
    const auto& gl = gauss_legendre(10);
    double s = 0;
    for (std::size_t i = 0; i + 1 < tb.t.size(); ++i) {
        double lo = tb.t[i], hi = tb.t[i + 1];
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q];
            s += 0.5 * (hi - lo) * gl.w[q] * std::pow(x, p) * tb.k(x);
        }
    }
    // exponential tail A e^{-r(x - T)}
    double T = tb.t_tail, A = tb.tail_A, r = tb.tail_rate;
    if (p == 0) s += A / r;
    if (p == 1) s += A * (T / r + 1 / (r * r));
    if (p == 2) s += A * (T * T / r + 2 * T / (r * r) + 2 / (r * r * r));
    return s;
}

Report run_experiment(const Experiment& e) {
    e.validate();
    ensure_dir(e.out);
    Report rep;
    rep.title = std::string("experiment ") + kind_name(e.kind);
    rep.config = {{"experiment", to_json(e)}};
    Ctx c{e, rep};
    auto t0 = std::chrono::steady_clock::now();
    try {
        switch (e.kind) {
            case Kind::simulate: exp_simulate(c); break;
            case Kind::kernel: exp_kernel(c); break;
            case Kind::hitting: exp_hitting(c); break;
            case Kind::branching: exp_branching(c); break;
            case Kind::limit: exp_limit(c); break;
            case Kind::diagnose: exp_diagnose(c); break;
            case Kind::exponent: exp_exponent(c); break;
            case Kind::compare: exp_compare(c); break;
        }
    } catch (const json::exception& x) {
        throw ConfigError(std::string(kind_name(e.kind)) + ": " + x.what());
    }
    for (auto& a : rep.artifacts)
        if (!fs::exists(e.out + "/" + a)) throw ResourceError("artifact missing after run: " + a);
    rep.config["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(rep, e.out);
    return rep;
}

}  // namespace mdla::harness
