#include "mdla/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace mdla::model {

using nlohmann::json;

namespace {

long poisson(double mean, Philox& rng) {
    if (mean <= 0) return 0;
    boost::random::poisson_distribution<long, double> d(mean);
    return d(rng);
}

const char* mode_name(InitMode m) {
    switch (m) {
        case InitMode::poisson: return "poisson";
        case InitMode::iid_counts: return "iid_counts";
        case InitMode::sandwich_upper: return "sandwich_upper";
        case InitMode::sandwich_lower: return "sandwich_lower";
        case InitMode::explicit_history: return "explicit";
    }
    return "?";
}

InitMode mode_from(const std::string& s) {
    if (s == "poisson") return InitMode::poisson;
    if (s == "iid_counts") return InitMode::iid_counts;
    if (s == "sandwich_upper") return InitMode::sandwich_upper;
    if (s == "sandwich_lower") return InitMode::sandwich_lower;
    if (s == "explicit") return InitMode::explicit_history;
    throw ConfigError("unknown init_mode '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------- count laws

void CountLaw::validate() const {
    if (!(mean >= 0)) throw ConfigError("count law: mean must be >= 0");
    if (name == "poisson" || name == "geometric") return;
    if (name == "deterministic") {
        if (mean != std::floor(mean)) throw ConfigError("count law: deterministic mean must be an integer");
        return;
    }
    if (name == "negative_binomial") {
        if (!(variance > mean)) throw ConfigError("count law: negative_binomial needs variance > mean");
        return;
    }
    if (name == "binomial") {
        if (trials < 1 || mean > trials) throw ConfigError("count law: binomial needs trials >= mean");
        return;
    }
    throw ConfigError("count law: unknown distribution '" + name + "'");
}

double CountLaw::implied_variance() const {
    if (name == "poisson") return mean;
    if (name == "deterministic") return 0;
    if (name == "geometric") return mean * (1 + mean);
    if (name == "binomial") return mean * (1 - mean / trials);
    return variance;
}

long CountLaw::sample(Philox& rng) const {
    if (name == "poisson") return poisson(mean, rng);
    if (name == "deterministic") return static_cast<long>(mean);
    if (name == "geometric") {
        if (mean == 0) return 0;
        double p = 1 / (1 + mean);
        return static_cast<long>(std::floor(std::log(rng.uniform()) / std::log1p(-p)));
    }
    if (name == "binomial") {
        double p = mean / trials;
        long k = 0;
        for (int i = 0; i < trials; ++i) k += rng.uniform() < p;
        return k;
    }
    // negative binomial as a gamma mixture of Poissons
    double r = mean * mean / (variance - mean), theta = (variance - mean) / mean;
    boost::random::gamma_distribution<double> g(r, theta);
    return poisson(g(rng), rng);
}

// ---------------------------------------------------------------- config

void ModelConfig::validate() const {
    if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
    if (!(truncation_epsilon > 0 && truncation_epsilon < 1)) throw ConfigError("truncation_epsilon must be in (0,1)");
    if (!(horizon > t0)) throw ConfigError("horizon must exceed t0");
    if (hazard_grid < 0) throw ConfigError("hazard_grid must be >= 0");
    if (init_mode == InitMode::iid_counts) {
        counts.validate();
        if (std::abs(counts.mean - lambda) > 1e-12) throw ConfigError("iid_counts: count mean must equal lambda");
    }
    if (init_mode == InitMode::sandwich_upper || init_mode == InitMode::sandwich_lower) {
        if (!(alpha > 0 && alpha < 0.5)) throw ConfigError("sandwich modes need 0 < alpha < 1/2");
        if (lower_history < 0) throw ConfigError("lower_history must be >= 0");
    }
    if (init_mode == InitMode::explicit_history) {
        y0.validate();
        if (y0.tail_infinite_after && *y0.tail_infinite_after < 0) throw ConfigError("explicit: negative tail time");
    }
}

json to_json(const ModelConfig& c) {
    json j{{"lambda", c.lambda},
           {"init_mode", mode_name(c.init_mode)},
           {"t0", c.t0},
           {"horizon", c.horizon},
           {"truncation_epsilon", c.truncation_epsilon},
           {"seed", c.seed},
           {"record_hazard", c.record_hazard},
           {"hazard_grid", c.hazard_grid},
           {"max_particles", c.max_particles}};
    if (c.init_mode == InitMode::iid_counts)
        j["counts"] = {{"name", c.counts.name}, {"mean", c.counts.mean}, {"variance", c.counts.variance},
                       {"trials", c.counts.trials}};
    if (c.init_mode == InitMode::sandwich_upper || c.init_mode == InitMode::sandwich_lower) {
        j["alpha"] = c.alpha;
        j["lower_history"] = c.lower_history;
    }
    if (c.init_mode == InitMode::explicit_history) {
        j["y0"] = {{"jumps", c.y0.jumps}};
        if (c.y0.tail_infinite_after) j["y0"]["tail_infinite_after"] = *c.y0.tail_infinite_after;
    }
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    try {
        c.lambda = j.value("lambda", c.lambda);
        c.init_mode = mode_from(j.value("init_mode", std::string("poisson")));
        c.t0 = j.value("t0", c.t0);
        c.horizon = j.value("horizon", c.horizon);
        c.truncation_epsilon = j.value("truncation_epsilon", c.truncation_epsilon);
        c.seed = j.value("seed", c.seed);
        c.record_hazard = j.value("record_hazard", c.record_hazard);
        c.hazard_grid = j.value("hazard_grid", c.hazard_grid);
        c.max_particles = j.value("max_particles", c.max_particles);
        c.alpha = j.value("alpha", c.alpha);
        c.lower_history = j.value("lower_history", c.lower_history);
        if (j.contains("counts")) {
            auto& k = j["counts"];
            c.counts.name = k.value("name", std::string("poisson"));
            c.counts.mean = k.value("mean", c.lambda);
            c.counts.variance = k.value("variance", c.counts.mean);
            c.counts.trials = k.value("trials", 0);
        } else {
            c.counts.mean = c.counts.variance = c.lambda;
        }
        if (j.contains("y0")) {
            auto& y = j["y0"];
            c.y0.jumps = y.value("jumps", std::vector<double>{});
            if (y.contains("tail_infinite_after")) c.y0.tail_infinite_after = y["tail_infinite_after"].get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------- window bounds

long x_bound(double T) {
    if (T <= std::exp(1.0)) return 1;
    double l = std::log(T);
    return static_cast<long>(std::ceil(std::pow(T, 0.75) * l * l));
}

double displacement_tail(double T, double d) {
    if (d <= 0) return 1.0;
    if (T <= 0) return 0.0;
    double x = d / T;
    double g = x * std::asinh(x) - std::sqrt(1 + x * x) + 1;
    return std::min(1.0, 2 * std::exp(-T * g));
}

namespace {

// sum_{d >= m} tail(d), summed until terms are negligible
double tail_sum(double T, long m) {
    double s = 0;
    for (long d = std::max<long>(m, 0);; ++d) {
        double v = displacement_tail(T, static_cast<double>(d));
        s += v;
        if (v < 1e-18 * std::max(s, 1e-300) || v < 1e-300) break;
    }
    return s;
}

// smallest m >= 0 with f(m) <= eps for a nonincreasing f
template <class F>
long smallest_margin(F f, double eps) {
    long hi = 1;
    while (f(hi) > eps) hi *= 2;
    long lo = 0;
    if (f(0) <= eps) return 0;
    while (hi - lo > 1) {
        long mid = (lo + hi) / 2;
        (f(mid) <= eps ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

long window_policy(double T, double lambda, double eps) {
    if (!(eps > 0 && eps < 1)) throw ConfigError("window_policy: eps must be in (0,1)");
    long xb = x_bound(T);
    if (lambda <= 0) return xb;
    long m = smallest_margin([&](long mm) { return lambda * tail_sum(T, mm); }, eps);
    return xb + m;
}

long lazy_margin(double T, double lambda, double eps, double* bound_out) {
    long xb = x_bound(T);
    auto f = [&](long m) { return lambda * (xb * displacement_tail(T, double(m)) + tail_sum(T, m)); };
    long m = lambda > 0 ? smallest_margin(f, eps) : 1;
    m = std::max<long>(m, 1);
    if (bound_out) *bound_out = lambda > 0 ? f(m) : 0.0;
    return m;
}

// ---------------------------------------------------------------- field

long ParticleField::active() const {
    long a = 0;
    for (long p : pos) a += p > front;
    return a;
}

namespace {

enum class FieldKind { fresh, stationary, empty };

struct Source {
    FieldKind kind = FieldKind::fresh;
    const ModelConfig* cfg = nullptr;
    double xi = 0;

    long draw(long site, Philox& rng) const {
        switch (kind) {
            case FieldKind::empty: return 0;
            case FieldKind::stationary:
                return poisson(cfg->lambda * (1 - std::pow(xi, double(site))), rng);
            case FieldKind::fresh:
                if (cfg->init_mode == InitMode::iid_counts) return cfg->counts.sample(rng);
                return poisson(cfg->lambda, rng);
        }
        return 0;
    }
};

Source source_for(const ModelConfig& cfg) {
    Source s;
    s.cfg = &cfg;
    if (cfg.init_mode == InitMode::sandwich_lower) {
        s.kind = FieldKind::stationary;
        s.xi = 1 / (1 + 2 * cfg.alpha);
    } else if (cfg.init_mode == InitMode::explicit_history && !cfg.y0.tail_infinite_after) {
        s.kind = FieldKind::empty;
    } else if (cfg.lambda <= 0) {
        s.kind = FieldKind::empty;
    }
    return s;
}

inline void bump(std::vector<int>& count, long site, int by) {
    if (site >= static_cast<long>(count.size())) count.resize(std::max<std::size_t>(site + 1, count.size() * 3 / 2 + 16), 0);
    count[site] += by;
}

void materialize(ParticleField& f, const Source& src, const ModelConfig& cfg, long new_wall, double elapsed,
                 long* violations) {
    for (long k = f.wall + 1; k <= new_wall; ++k) {
        Philox rng(cfg.seed, streams::extension_base + static_cast<std::uint64_t>(k));
        long n = src.draw(k, rng);
        f.instantiated += n;
        for (long i = 0; i < n; ++i) {
            long p = k;
            if (elapsed > 0) p += poisson(elapsed / 2, rng) - poisson(elapsed / 2, rng);
            if (p <= f.front) {
                // would have touched the aggregate before being materialized
                ++f.frozen_mass;
                if (violations) ++*violations;
                continue;
            }
            f.pos.push_back(p);
            bump(f.count, p, 1);
        }
    }
    f.wall = std::max(f.wall, new_wall);
}

}  // namespace

ParticleField init_field(const ModelConfig& cfg, long wall0) {
    cfg.validate();
    ParticleField f;
    f.count.assign(static_cast<std::size_t>(wall0) + 2, 0);
    materialize(f, source_for(cfg), cfg, wall0, 0.0, nullptr);
    return f;
}

void extend_window(ParticleField& f, const ModelConfig& cfg, long new_wall, double elapsed, long* violations) {
    if (new_wall <= f.wall) throw RangeError("extend_window: new wall must exceed the current wall");
    materialize(f, source_for(cfg), cfg, new_wall, elapsed, violations);
}

// ---------------------------------------------------------------- run

long RunRecord::x_at(double t) const {
    return static_cast<long>(std::upper_bound(jumps.begin(), jumps.end(), t) - jumps.begin());
}

double RunRecord::hazard_at(double t) const {
    auto it = std::upper_bound(hazard.begin(), hazard.end(), t, [](double v, const HazardPoint& p) { return v < p.t; });
    if (it == hazard.begin()) return 0;
    return std::prev(it)->h;
}

namespace {

std::vector<double> poisson_times(double rate, double a, double b, Philox& rng) {
    std::vector<double> out;
    double t = a;
    for (;;) {
        t += rng.exponential() / rate;
        if (t >= b) return out;
        out.push_back(t);
    }
}

}  // namespace

RunRecord run(const ModelConfig& cfg) {
    cfg.validate();
    auto wall0 = std::chrono::steady_clock::now();
    auto rec = std::make_shared<RunRecord>();
    rec->config = cfg;

    // history and clock start
    double t_start = cfg.t0;
    std::vector<double> forced;
    switch (cfg.init_mode) {
        case InitMode::poisson:
        case InitMode::iid_counts: rec->tail_at = t_start; break;
        case InitMode::sandwich_upper:
        case InitMode::sandwich_lower: {
            double H = std::pow(cfg.alpha, -3);
            if (cfg.init_mode == InitMode::sandwich_lower && cfg.lower_history > 0) H = cfg.lower_history;
            t_start = cfg.t0 - H;
            Philox hr(cfg.seed, streams::history);
            forced = poisson_times(cfg.alpha, t_start, cfg.t0, hr);
            if (cfg.init_mode == InitMode::sandwich_upper)
                rec->tail_at = t_start;
            else
                rec->continuation_alpha = cfg.alpha;
            break;
        }
        case InitMode::explicit_history: {
            const auto& y = cfg.y0;
            if (y.tail_infinite_after) {
                t_start = cfg.t0 - *y.tail_infinite_after;
                rec->tail_at = t_start;
            }
            for (auto it = y.jumps.rbegin(); it != y.jumps.rend(); ++it)
                if (!y.tail_infinite_after || *it < *y.tail_infinite_after) forced.push_back(cfg.t0 - *it);
            if (!y.tail_infinite_after && !forced.empty()) t_start = std::min(t_start, forced.front());
            break;
        }
    }
    rec->t_start = t_start;
    rec->history = forced;

    const double T = cfg.horizon;
    const double duration = T - t_start;
    const Source src = source_for(cfg);
    const double lam_eff = src.kind == FieldKind::empty ? 0.0 : cfg.lambda;
    double bound = 0;
    const long m = lazy_margin(duration, std::max(lam_eff, 1e-300), cfg.truncation_epsilon, &bound);
    rec->margin = m;
    rec->x_bound = x_bound(duration);
    rec->truncation_bound_used = lam_eff > 0 ? bound : 0.0;

    ParticleField f;
    f.t = t_start;
    f.count.assign(static_cast<std::size_t>(m) + 2, 0);
    long violations = 0;
    materialize(f, src, cfg, m, 0.0, &violations);

    Philox rng(cfg.seed, streams::main);
    boost::random::exponential_distribution<double> expo(1.0);
    std::size_t next_forced = 0;
    double next_grid = cfg.hazard_grid > 0 ? cfg.t0 + cfg.hazard_grid : std::numeric_limits<double>::infinity();
    bool started = cfg.t0 <= t_start;  // growth phase reached
    int h_count = 0;                   // particles at front+1 when h was last updated
    double h_since = std::max(t_start, cfg.t0), comp = 0;

    auto site_count = [&](long s) -> int { return s < static_cast<long>(f.count.size()) ? f.count[s] : 0; };
    auto h_update = [&](double t) {
        int c = site_count(f.front + 1);
        if (c == h_count) return;
        if (started) {
            comp += 0.5 * h_count * (t - h_since);
            h_since = t;
            if (cfg.record_hazard) rec->hazard.push_back({t, 0.5 * c});
        }
        h_count = c;
    };
    auto advance_front = [&](double t) {
        ++f.front;
        int c = site_count(f.front);
        f.frozen_mass += c;
        if (c) f.count[f.front] = 0;
        if (f.front + m > f.wall) {
            materialize(f, src, cfg, f.front + m, t - t_start, &violations);
            ++rec->n_window_extensions;
        }
    };
    h_count = site_count(1);
    if (started && cfg.record_hazard) rec->hazard.push_back({t_start, 0.5 * h_count});

    auto finish = [&](double t) {
        if (started) comp += 0.5 * h_count * (t - h_since);
        rec->frozen_mass = f.frozen_mass;
        rec->instantiated = f.instantiated;
        rec->active_at_end = f.active();
        rec->window_violations = violations;
        rec->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    };

    double t = t_start;
    for (;;) {
        std::size_t n = f.pos.size();
        if (n > cfg.max_particles) {
            finish(t);
            throw RunAborted("run: particle cap exceeded", rec);
        }
        double t_event = n ? t + expo(rng) / double(n) : std::numeric_limits<double>::infinity();
        double t_forced = next_forced < forced.size() ? forced[next_forced] : std::numeric_limits<double>::infinity();
        double t_start_growth = started ? std::numeric_limits<double>::infinity() : cfg.t0;
        double t_stop = std::min({t_forced, next_grid, T, t_start_growth});
        if (t_stop <= t_event) {
            // scheduled change first; the exponential clock is memoryless
            t = t_stop;
            if (t == T) break;
            if (t == t_start_growth) {
                started = true;
                h_since = t;
                h_count = site_count(f.front + 1);
                if (cfg.record_hazard) rec->hazard.push_back({t, 0.5 * h_count});
            } else if (t == t_forced) {
                ++next_forced;
                advance_front(t);
                h_update(t);
            } else {
                if (cfg.record_hazard || cfg.hazard_grid > 0) rec->hazard.push_back({t, 0.5 * h_count});
                next_grid += cfg.hazard_grid;
            }
            continue;
        }
        t = t_event;
        bool right;
        std::size_t i = rng.below_with_bit(n, right);
        long p = f.pos[i];
        if (p <= f.front) {
            // frozen earlier; drop it (null event)
            f.pos[i] = f.pos.back();
            f.pos.pop_back();
            ++rec->n_null_events;
            continue;
        }
        ++rec->n_events;
        if (right) {
            --f.count[p];
            f.pos[i] = p + 1;
            bump(f.count, p + 1, 1);
        } else if (p == f.front + 1) {
            if (!started) {
                // history: the front is prescribed, the particle is absorbed without growth
                --f.count[p];
                ++f.frozen_mass;
                f.pos[i] = f.pos.back();
                f.pos.pop_back();
            } else {
                rec->jumps.push_back(t);
                rec->compensator.push_back(comp + 0.5 * h_count * (t - h_since));
                advance_front(t);
                h_update(t);
                continue;
            }
        } else {
            --f.count[p];
            f.pos[i] = p - 1;
            ++f.count[p - 1];
        }
        h_update(t);
    }
    finish(T);
    rec->config = cfg;
    return std::move(*rec);
}

RunRecord run_with_initial_condition(const UnitStep& y0, double t0, ModelConfig cfg) {
    y0.validate();
    cfg.init_mode = InitMode::explicit_history;
    cfg.y0 = y0;
    cfg.t0 = t0;
    if (y0.tail_infinite_after && !(*y0.tail_infinite_after >= 0))
        throw ConfigError("run_with_initial_condition: tail must be >= 0");
    return run(cfg);
}

UnitStep y_profile(const RunRecord& rec, double t) {
    if (t > rec.config.horizon) throw RangeError("y_profile: t beyond the run horizon");
    std::vector<double> s;
    auto add = [&](const std::vector<double>& v) {
        for (double x : v)
            if (x <= t) s.push_back(t - x);
    };
    add(rec.jumps);
    add(rec.history);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::optional<double> tail;
    if (rec.tail_at) tail = t - *rec.tail_at;
    if (tail) {
        while (!s.empty() && s.back() > *tail) s.pop_back();
    }
    return UnitStep(std::move(s), tail);
}

// ---------------------------------------------------------------- coupled pair

CoupledPair run_coupled(double lambda_small, double lambda_large, double T, std::uint64_t seed, double eps) {
    if (!(lambda_small >= 0 && lambda_small <= lambda_large && lambda_large > 0))
        throw ConfigError("run_coupled: need 0 <= lambda_small <= lambda_large, lambda_large > 0");
    long W = window_policy(T, lambda_large, eps);
    Philox init(seed, streams::init), rng(seed, streams::main);
    struct P {
        long pos;
        bool alive[2];
    };
    std::vector<P> ps;
    std::vector<std::vector<int>> occ(W + 2);
    for (long k = 1; k <= W; ++k) {
        long n = poisson(lambda_large, init);
        for (long i = 0; i < n; ++i) {
            bool in_small = init.uniform() * lambda_large < lambda_small;
            ps.push_back({k, {in_small, true}});
            occ[k].push_back(static_cast<int>(ps.size() - 1));
        }
    }
    std::vector<int> live;  // alive in at least one system
    for (int i = 0; i < static_cast<int>(ps.size()); ++i) live.push_back(i);
    long front[2] = {0, 0};
    CoupledPair out;
    auto move_occ = [&](int id, long from, long to) {
        auto& v = occ[from];
        v.erase(std::find(v.begin(), v.end(), id));
        if (to >= static_cast<long>(occ.size())) occ.resize(to + 16);
        occ[to].push_back(id);
    };
    double t = 0;
    for (;;) {
        if (live.empty()) break;
        t += rng.exponential() / double(live.size());
        if (t >= T) break;
        std::size_t li = rng.below(live.size());
        int id = live[li];
        P& q = ps[id];
        if (!q.alive[0] && !q.alive[1]) {
            live[li] = live.back();
            live.pop_back();
            continue;
        }
        bool right = rng() >> 63;
        long to = q.pos + (right ? 1 : -1);
        if (!right) {
            for (int sys = 0; sys < 2; ++sys) {
                if (!q.alive[sys] || q.pos != front[sys] + 1) continue;
                long site = ++front[sys];
                for (int other : occ[site]) ps[other].alive[sys] = false;
                (sys == 0 ? out.small_jumps : out.large_jumps).push_back(t);
            }
        }
        if (to >= 0) move_occ(id, q.pos, to);
        q.pos = to;
        for (int sys = 0; sys < 2; ++sys)
            if (q.alive[sys] && q.pos <= front[sys]) q.alive[sys] = false;
    }
    return out;
}

// ---------------------------------------------------------------- io

json record_summary(const RunRecord& r) {
    json j{{"config", to_json(r.config)},
           {"seed", r.config.seed},
           {"t_start", r.t_start},
           {"x_final", static_cast<long>(r.jumps.size())},
           {"n_history", static_cast<long>(r.history.size())},
           {"n_events", r.n_events},
           {"n_null_events", r.n_null_events},
           {"n_window_extensions", r.n_window_extensions},
           {"frozen_mass", r.frozen_mass},
           {"instantiated", r.instantiated},
           {"active_at_end", r.active_at_end},
           {"window_violations", r.window_violations},
           {"margin", r.margin},
           {"x_bound", r.x_bound},
           {"truncation_bound_used", r.truncation_bound_used},
           {"continuation_alpha", r.continuation_alpha},
           {"wall_seconds", r.wall_seconds}};
    j["tail_at"] = r.tail_at ? json(*r.tail_at) : json(nullptr);
    return j;
}

namespace {

void write_text(const std::string& path, const std::string& body) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw ResourceError("cannot write " + path);
    o << body;
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

}  // namespace

void write_record(const RunRecord& r, const std::string& dir, const std::string& stem) {
    std::string base = dir + "/" + stem;
    write_text(base + ".json", record_summary(r).dump(2) + "\n");
    std::string s = "index,t,compensator\n";
    for (std::size_t i = 0; i < r.jumps.size(); ++i)
        s += std::to_string(i + 1) + "," + fmt(r.jumps[i]) + "," + fmt(r.compensator[i]) + "\n";
    write_text(base + "_front.csv", s);
    if (!r.history.empty()) {
        std::string h = "t\n";
        for (double x : r.history) h += fmt(x) + "\n";
        write_text(base + "_history.csv", h);
    }
    if (!r.hazard.empty()) {
        std::string h = "t,h\n";
        for (auto& p : r.hazard) h += fmt(p.t) + "," + fmt(p.h) + "\n";
        write_text(base + "_hazard.csv", h);
    }
}

RunRecord read_record(const std::string& dir, const std::string& stem) {
    std::string base = dir + "/" + stem;
    std::ifstream js(base + ".json");
    if (!js) throw ConfigError("missing record " + base + ".json");
    json j;
    js >> j;
    RunRecord r;
    r.config = config_from_json(j["config"]);
    r.t_start = j.value("t_start", 0.0);
    if (!j["tail_at"].is_null()) r.tail_at = j["tail_at"].get<double>();
    r.continuation_alpha = j.value("continuation_alpha", 0.0);
    r.n_events = j.value("n_events", 0L);
    r.n_window_extensions = j.value("n_window_extensions", 0L);
    r.frozen_mass = j.value("frozen_mass", 0L);
    r.margin = j.value("margin", 0L);
    r.truncation_bound_used = j.value("truncation_bound_used", 0.0);
    auto rows = [](const std::string& path) {
        std::vector<std::vector<double>> out;
        std::ifstream in(path);
        if (!in) return out;
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            out.push_back(row);
        }
        return out;
    };
    for (auto& row : rows(base + "_front.csv")) {
        r.jumps.push_back(row.at(1));
        r.compensator.push_back(row.at(2));
    }
    for (auto& row : rows(base + "_history.csv")) r.history.push_back(row.at(0));
    for (auto& row : rows(base + "_hazard.csv")) r.hazard.push_back({row.at(0), row.at(1)});
    return r;
}

}  // namespace mdla::model
