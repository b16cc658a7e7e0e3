// driver.hpp - single runs, method comparisons and PMA success-rate experiments
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "io.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "pma.hpp"
#include "sht.hpp"

namespace slb {

struct RunSummary {
    std::string method;
    long iterations = 0;
    double seconds = 0.0;
    double energy = 0.0;  // reported units
    double grad_sup = 0.0;
    bool converged = false;
    bool diverged = false;
    bool stalled = false;
    long restarts = 0;
    double radius_squared = 0.0;
    std::uint64_t seed = 0;
    std::optional<FeatureCount> features;
    std::string error;  // non-empty when the run could not be carried out
};

struct RunOutcome {
    RunSummary summary;
    RunResult result;
};

// Offset separating the radius stream from the field stream of one seed.
inline constexpr std::uint64_t radius_seed_offset = 0x9E3779B97F4A7C15ull;

inline InitialState build_initial(const RunConfig& cfg) {
    const int n = cfg.bandlimit;
    InitialState s;
    switch (cfg.init.kind) {
        case InitKind::s10: s = preset_s10(n, cfg.seed); break;
        case InitKind::s15: s = preset_s15(n, cfg.seed); break;
        case InitKind::legendre: s = preset_l(cfg.init.ell, n); break;
        case InitKind::pma: {
            const auto g = parse_subgroup(cfg.init.subgroup);
            if (!g) throw ConfigError("unknown subgroup " + cfg.init.subgroup);
            SingleOperatorOptions opt;
            opt.convention = cfg.init.convention;
            s = {single_operator_field(*g, cfg.init.ell, n, opt), radius_for_degree(cfg.init.ell),
                 g->name() + std::to_string(cfg.init.ell)};
            break;
        }
        case InitKind::random: s = {random_field(n, cfg.seed), cfg.model.radius, "random"}; break;
        case InitKind::file: s = {read_coefficients_file(cfg.init.path, n), cfg.model.radius, "file"}; break;
    }
    switch (cfg.radius_mode) {
        case RadiusMode::fixed: s.radius = cfg.model.radius; break;
        case RadiusMode::random:
            s.radius = random_radius(cfg.seed + radius_seed_offset, cfg.radius_min, cfg.radius_max);
            break;
        case RadiusMode::from_init: break;
    }
    return s;
}

inline std::unique_ptr<SHTPlan> make_plan(const RunConfig& cfg) {
    return std::make_unique<SHTPlan>(cfg.bandlimit, cfg.grid_n_theta(), cfg.grid_n_phi());
}

inline KeyValues summary_key_values(const RunSummary& s) {
    KeyValues kv{{"method", s.method},
                 {"iterations", std::to_string(s.iterations)},
                 {"seconds", format_double(s.seconds, 6)},
                 {"energy", format_double(s.energy, 15)},
                 {"grad_sup", format_double(s.grad_sup, 6)},
                 {"converged", s.converged ? "true" : "false"},
                 {"diverged", s.diverged ? "true" : "false"},
                 {"stalled", s.stalled ? "true" : "false"},
                 {"restarts", std::to_string(s.restarts)},
                 {"radius_squared", format_double(s.radius_squared, 17)},
                 {"seed", std::to_string(s.seed)}};
    if (s.features) {
        kv.emplace_back("feature_count", std::to_string(s.features->count));
        kv.emplace_back("flat", s.features->flat ? "true" : "false");
    }
    if (!s.error.empty()) kv.emplace_back("error", s.error);
    return kv;
}

// Runs one configuration on a plan matching its bandlimit and grid, writing
// the requested artifacts into cfg.output_dir.
inline RunOutcome run(const RunConfig& cfg, const SHTPlan& plan, const Observer& observer = {}) {
    cfg.validate();
    if (plan.bandlimit() != cfg.bandlimit || plan.n_theta() != cfg.grid_n_theta() || plan.n_phi() != cfg.grid_n_phi())
        throw ConfigError("run: plan does not match the configured bandlimit and grid");
    const InitialState init = build_initial(cfg);
    ModelParams p = cfg.model;
    p.radius = init.radius;
    LBObjective obj(p, plan, cfg.variant);
    RunOutcome out;
    out.result = run_method(obj, init.field, cfg.optimizer, observer);
    const double k = energy_scale_factor(cfg.scale);
    RunSummary& s = out.summary;
    s.method = std::string(method_name(cfg.optimizer.method));
    s.iterations = out.result.iterations;
    s.seconds = out.result.seconds;
    s.energy = out.result.energy * k;
    s.grad_sup = out.result.grad_sup;
    s.converged = out.result.converged;
    s.diverged = out.result.diverged;
    s.stalled = out.result.stalled;
    s.restarts = out.result.restarts;
    s.radius_squared = init.radius.squared();
    s.seed = cfg.seed;

    std::optional<GridField> grid;
    if (cfg.count || cfg.emit_grid) grid = plan.synthesize(out.result.x);
    if (cfg.count) s.features = count_features(*grid, *cfg.count);

    if (!cfg.output_dir.empty() && (cfg.emit_trace || cfg.emit_coefficients || cfg.emit_grid || cfg.emit_summary)) {
        namespace fs = std::filesystem;
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        if (cfg.emit_trace) {
            std::ofstream f(dir / "trace.csv");
            out.result.trace.write_csv(f, k);
        }
        if (cfg.emit_coefficients) write_coefficients_file((dir / "coefficients.txt").string(), out.result.x);
        if (cfg.emit_grid) {
            std::ofstream f(dir / "grid.csv");
            write_grid_csv(f, *grid, plan.grid());
        }
        if (cfg.emit_summary) {
            std::ofstream f(dir / "summary.txt");
            write_key_values(f, summary_key_values(s));
        }
    }
    return out;
}

inline RunOutcome run(const RunConfig& cfg, const Observer& observer = {}) {
    const auto plan = make_plan(cfg);
    return run(cfg, *plan, observer);
}

// Runs every method from the same initial field. Method-scoped keys in the
// map (`sis.alpha0`) supply per-method settings. Each method writes into
// <output_dir>/<method>. Failures are recorded in the row's error field.
inline std::vector<RunSummary> compare_methods(const ConfigMap& map, const std::vector<Method>& methods) {
    std::vector<RunSummary> rows;
    std::unique_ptr<SHTPlan> plan;
    for (Method m : methods) {
        RunSummary row;
        row.method = std::string(method_name(m));
        try {
            RunConfig cfg = make_run_config(map, m);
            if (!cfg.output_dir.empty())
                cfg.output_dir = (std::filesystem::path(cfg.output_dir) / std::string(method_name(m))).string();
            if (!plan || plan->bandlimit() != cfg.bandlimit || plan->n_theta() != cfg.grid_n_theta() ||
                plan->n_phi() != cfg.grid_n_phi())
                plan = make_plan(cfg);
            row = run(cfg, *plan).summary;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string comparison_table(const std::vector<RunSummary>& rows) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %10s %12s %20s %12s %9s %9s\n", "method", "iterations", "seconds", "energy",
                  "grad_sup", "converged", "restarts");
    os << buf;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            std::snprintf(buf, sizeof buf, "%-10s error: %s\n", r.method.c_str(), r.error.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%-10s %10ld %12.3f %20.12f %12.3e %9s %9ld\n", r.method.c_str(),
                          r.iterations, r.seconds, r.energy, r.grad_sup, r.converged ? "yes" : "no", r.restarts);
        }
        os << buf;
    }
    return os.str();
}

inline std::string comparison_csv(const std::vector<RunSummary>& rows) {
    std::ostringstream os;
    os << "method,iterations,seconds,energy,grad_sup,converged,restarts,error\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%ld,%.6f,%.15g,%.6e,%d,%ld,", r.method.c_str(), r.iterations, r.seconds,
                      r.energy, r.grad_sup, r.converged ? 1 : 0, r.restarts);
        os << buf << r.error << "\n";
    }
    return os.str();
}

// One of the four initial-field x radius combinations.
struct SuccessCase {
    std::string name;
    bool random_init = false;
    bool random_radius = false;
};

inline std::vector<SuccessCase> standard_success_cases() {
    return {{"pma-init/pma-radius", false, false},
            {"random-init/pma-radius", true, false},
            {"pma-init/random-radius", false, true},
            {"random-init/random-radius", true, true}};
}

struct SuccessCaseReport {
    SuccessCase which;
    int trials = 0;
    int successes = 0;
    std::vector<RunSummary> runs;
    double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

// Runs `trials` seeds (seed, seed+1, ...) per case. The PMA init and radius
// come from the configured preset; a random radius is drawn on
// [radius_min, radius_max]. Success means converged with the expected count.
inline std::vector<SuccessCaseReport> success_rate_experiment(const ConfigMap& map, int trials, int expected,
                                                              FeatureKind kind,
                                                              const std::vector<SuccessCase>& cases =
                                                                  standard_success_cases()) {
    if (trials < 1) throw ConfigError("success-rate: trials must be >= 1");
    const RunConfig base = make_run_config(map);
    if (base.init.kind == InitKind::random || base.init.kind == InitKind::file)
        throw ConfigError("success-rate: the configured init must be a PMA preset (S10, S15, L<l> or pma)");
    const auto plan = make_plan(base);
    const Radius pma_radius = build_initial(base).radius;
    std::vector<SuccessCaseReport> reports;
    for (const auto& c : cases) {
        SuccessCaseReport rep;
        rep.which = c;
        rep.trials = trials;
        for (int t = 0; t < trials; ++t) {
            RunConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(t);
            cfg.count = kind;
            cfg.output_dir.clear();
            if (c.random_init) cfg.init.kind = InitKind::random;
            if (c.random_radius) {
                cfg.radius_mode = RadiusMode::random;
            } else {
                cfg.radius_mode = RadiusMode::fixed;
                cfg.model.radius = pma_radius;
            }
            RunSummary s;
            try {
                s = run(cfg, *plan).summary;
            } catch (const std::exception& e) {
                s.method = std::string(method_name(cfg.optimizer.method));
                s.error = e.what();
            }
            if (s.error.empty() && s.converged && s.features && s.features->count == expected) ++rep.successes;
            rep.runs.push_back(std::move(s));
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

inline std::string success_rate_table(const std::vector<SuccessCaseReport>& reports) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-28s %7s %9s %8s\n", "case", "trials", "successes", "rate");
    os << buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-28s %7d %9d %7.1f%%\n", r.which.name.c_str(), r.trials, r.successes,
                      100.0 * r.rate());
        os << buf;
    }
    return os.str();
}

}  // namespace slb
