// config.hpp - flat `key = value` run configuration
#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "pma.hpp"

namespace slb {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Keys in insertion order; later assignments overwrite earlier ones.
class ConfigMap {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_)
            if (k == key) {
                v = value;
                return;
            }
        entries_.emplace_back(key, value);
    }
    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        return std::nullopt;
    }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    void merge(const ConfigMap& o) {
        for (const auto& [k, v] : o.entries_) set(k, v);
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// One `key = value` per line; '#' starts a comment.
inline ConfigMap parse_config(std::istream& is, const std::string& source = "config") {
    ConfigMap m;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        m.set(key, value);
    }
    return m;
}

inline ConfigMap parse_config_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

enum class InitKind { s10, s15, legendre, pma, random, file };
enum class RadiusMode { fixed, from_init, random };

// Default grid when n_theta/n_phi are not given:
//   fine   : 4(N+1) x 16(N+1), i.e. 512 x 2048 at N = 127
//   compact: the smallest grid that still integrates quartic products exactly
enum class GridKind { fine, compact };

struct InitSpec {
    InitKind kind = InitKind::s15;
    int ell = 15;                   // L(l) and pma degree
    std::string subgroup = "I";     // pma subgroup
    HarmonicConvention convention = HarmonicConvention::schmidt_real;
    std::string path;               // file init
};

struct RunConfig {
    ModelParams model{1.0, -1.0, 0.8, Radius::from_squared(240.0)};
    RadiusMode radius_mode = RadiusMode::from_init;
    double radius_min = 5.0, radius_max = 80.0;
    int bandlimit = 127;
    // 0: grid from `grid_kind`
    int n_theta = 0;
    int n_phi = 0;
    GridKind grid_kind = GridKind::fine;
    OptimizerConfig optimizer;
    GradientVariant variant = GradientVariant::squared;
    EnergyScale scale = EnergyScale::mode_zero;
    InitSpec init;
    std::uint64_t seed = 1;
    std::string output_dir;
    bool emit_trace = false;
    bool emit_coefficients = false;
    bool emit_grid = false;
    bool emit_summary = false;
    std::optional<FeatureKind> count;

    int grid_n_theta() const {
        if (n_theta > 0) return n_theta;
        return grid_kind == GridKind::fine ? 4 * (bandlimit + 1) : SHTPlan::default_n_theta(bandlimit);
    }
    int grid_n_phi() const {
        if (n_phi > 0) return n_phi;
        return grid_kind == GridKind::fine ? 16 * (bandlimit + 1) : SHTPlan::default_n_phi(bandlimit);
    }

    void validate() const {
        model.validate();
        if (bandlimit < 1) throw ConfigError("bandlimit must be >= 1");
        if (!has_exact_quartic_capacity(bandlimit, grid_n_theta(), grid_n_phi()))
            throw ConfigError("grid " + std::to_string(grid_n_theta()) + "x" + std::to_string(grid_n_phi()) +
                              " is too coarse for bandlimit " + std::to_string(bandlimit) +
                              " (need 2*n_theta-1 >= 4N and n_phi >= 4N+1)");
        if (grid_n_phi() % 2 != 0) throw ConfigError("n_phi must be even");
        if (radius_mode == RadiusMode::random && !(radius_min > 0.0 && radius_min <= radius_max))
            throw ConfigError("radius_min/radius_max must satisfy 0 < radius_min <= radius_max");
        if ((init.kind == InitKind::legendre || init.kind == InitKind::pma) && (init.ell < 1 || init.ell > bandlimit))
            throw ConfigError("initial degree " + std::to_string(init.ell) + " outside [1, bandlimit]");
        if (init.kind == InitKind::s10 && bandlimit < 10) throw ConfigError("S10 needs bandlimit >= 10");
        if (init.kind == InitKind::s15 && bandlimit < 15) throw ConfigError("S15 needs bandlimit >= 15");
        if (init.kind == InitKind::file && init.path.empty()) throw ConfigError("init = file needs init_file");
        if (radius_mode == RadiusMode::from_init && init.kind == InitKind::random)
            throw ConfigError("a random init has no principal degree; set radius to a value or to random");
        if (radius_mode == RadiusMode::from_init && init.kind == InitKind::file)
            throw ConfigError("a file init has no principal degree; set radius to a value");
        try {
            optimizer.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("`" + key + "`: expected a number, got `" + v + "`");
}

inline long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw ConfigError("`" + key + "`: expected an integer, got `" + v + "`");
    return out;
}

inline int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_long(key, v)); }

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("`" + key + "`: expected true/false, got `" + v + "`");
}

template <class E>
E to_enum(const std::string& key, const std::string& v, const std::vector<std::pair<std::string, E>>& table) {
    std::string options;
    for (const auto& [name, e] : table) {
        if (name == v) return e;
        options += (options.empty() ? "" : ", ") + name;
    }
    throw ConfigError("`" + key + "`: unknown value `" + v + "` (expected one of " + options + ")");
}

inline void parse_init(InitSpec& init, const std::string& key, const std::string& v) {
    if (v == "S10") init.kind = InitKind::s10;
    else if (v == "S15") init.kind = InitKind::s15;
    else if (v == "pma") init.kind = InitKind::pma;
    else if (v == "random") init.kind = InitKind::random;
    else if (v == "file") init.kind = InitKind::file;
    else if (v.size() > 1 && v[0] == 'L') {
        init.kind = InitKind::legendre;
        init.ell = to_int(key, v.substr(1));
    } else {
        throw ConfigError("`" + key + "`: unknown init `" + v + "` (expected S10, S15, L<degree>, pma, random, file)");
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [](double OptimizerConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.*f = to_double(k, v); };
        };
        t["method"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const auto m = parse_method(v);
            if (!m) throw ConfigError("`" + k + "`: unknown method `" + v + "`");
            c.optimizer.method = *m;
        };
        t["bandlimit"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.bandlimit = to_int(k, v); };
        t["n_theta"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n_theta = to_int(k, v); };
        t["grid"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.grid_kind = to_enum<GridKind>(k, v, {{"fine", GridKind::fine}, {"compact", GridKind::compact}});
        };
        t["n_phi"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n_phi = to_int(k, v); };
        t["xi"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.xi = to_double(k, v); };
        t["epsilon"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.epsilon = to_double(k, v); };
        t["lambda"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.lambda = to_double(k, v); };
        t["radius"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "pma") {
                c.radius_mode = RadiusMode::from_init;
            } else if (v == "random") {
                c.radius_mode = RadiusMode::random;
            } else {
                try {
                    c.model.radius = Radius::from_value(to_double(k, v));
                } catch (const ConfigError&) {
                    throw;
                } catch (const std::invalid_argument& e) {
                    throw ConfigError("`" + k + "`: " + e.what());
                }
                c.radius_mode = RadiusMode::fixed;
            }
        };
        t["radius_squared"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            try {
                c.model.radius = Radius::from_squared(to_double(k, v));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                throw ConfigError("`" + k + "`: " + e.what());
            }
            c.radius_mode = RadiusMode::fixed;
        };
        t["radius_min"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.radius_min = to_double(k, v); };
        t["radius_max"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.radius_max = to_double(k, v); };
        t["alpha0"] = num(&OptimizerConfig::alpha0);
        t["alpha_min"] = num(&OptimizerConfig::alpha_min);
        t["alpha_max"] = num(&OptimizerConfig::alpha_max);
        t["rho_initial"] = num(&OptimizerConfig::rho_initial);
        t["rho_late"] = num(&OptimizerConfig::rho_late);
        t["eta"] = num(&OptimizerConfig::eta);
        t["w_bar"] = num(&OptimizerConfig::w_bar);
        t["extrapolation_sign"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const double s = to_double(k, v);
            if (s != 1.0 && s != -1.0) throw ConfigError("`" + k + "`: must be 1 or -1");
            c.optimizer.extrapolation_sign = s;
        };
        t["a"] = num(&OptimizerConfig::a);
        t["b"] = num(&OptimizerConfig::b);
        t["tau"] = num(&OptimizerConfig::tau);
        t["p_bound"] = num(&OptimizerConfig::p_bound);
        t["newton_tol"] = num(&OptimizerConfig::newton_tol);
        t["rho_switch"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.optimizer.rho_switch = to_int(k, v);
        };
        t["n_tol"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.n_tol = to_long(k, v); };
        t["newton_max"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.optimizer.newton_max = to_int(k, v);
        };
        t["bb"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "auto") {
                c.optimizer.bb.reset();
                return;
            }
            c.optimizer.bb = to_enum<BBVariant>(k, v, {{"first", BBVariant::first}, {"second", BBVariant::second}});
        };
        t["bb_gradient"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.optimizer.bb_gradient = to_enum<BBGradient>(k, v, {{"full", BBGradient::full}, {"bulk", BBGradient::bulk}});
        };
        t["nesterov_reject"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.optimizer.nesterov_reject = to_enum<RejectPolicy>(k, v,
                                                                {{"accept_anyway", RejectPolicy::accept_anyway},
                                                                 {"hold", RejectPolicy::hold},
                                                                 {"keep", RejectPolicy::keep},
                                                                 {"restart", RejectPolicy::restart}});
        };
        t["gradient_variant"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.variant = to_enum<GradientVariant>(
                k, v, {{"squared", GradientVariant::squared}, {"unsquared", GradientVariant::unsquared}});
        };
        t["energy_scale"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.scale = to_enum<EnergyScale>(k, v,
                                           {{"mode_zero", EnergyScale::mode_zero},
                                            {"unit_sphere", EnergyScale::unit_sphere},
                                            {"area_mean", EnergyScale::area_mean}});
        };
        t["init"] = [](RunConfig& c, const std::string& k, const std::string& v) { parse_init(c.init, k, v); };
        t["init_file"] = [](RunConfig& c, const std::string&, const std::string& v) { c.init.path = v; };
        t["pma_subgroup"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (!parse_subgroup(v)) throw ConfigError("`" + k + "`: unknown subgroup `" + v + "` (T, O, I or Z<n>)");
            c.init.subgroup = v;
        };
        t["pma_degree"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.init.ell = to_int(k, v); };
        t["pma_convention"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.init.convention = to_enum<HarmonicConvention>(k, v,
                                                            {{"schmidt_real", HarmonicConvention::schmidt_real},
                                                             {"orthonormal_literal", HarmonicConvention::orthonormal_literal}});
        };
        t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const long s = to_long(k, v);
            if (s < 0) throw ConfigError("`" + k + "`: must be nonnegative");
            c.seed = static_cast<std::uint64_t>(s);
        };
        t["output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; };
        t["emit_trace"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.emit_trace = to_bool(k, v); };
        t["emit_coefficients"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.emit_coefficients = to_bool(k, v);
        };
        t["emit_grid"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.emit_grid = to_bool(k, v); };
        t["emit_summary"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.emit_summary = to_bool(k, v);
        };
        t["count"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "none") {
                c.count.reset();
                return;
            }
            const auto f = parse_feature_kind(v);
            if (!f) throw ConfigError("`" + k + "`: expected none, spots or stripes");
            c.count = *f;
        };
        return t;
    }();
    return table;
}

}  // namespace detail

inline bool is_known_key(const std::string& key) { return detail::setters().count(key) > 0; }

// Builds a run configuration. Plain keys apply first; keys prefixed by a
// method name (`sis.alpha0 = 0.6`) apply afterwards, only for that method.
// `method` overrides the `method` key.
inline RunConfig make_run_config(const ConfigMap& map, std::optional<Method> method = std::nullopt) {
    RunConfig cfg;
    const auto& table = detail::setters();
    std::vector<std::pair<std::string, std::string>> scoped;
    for (const auto& [key, value] : map.entries()) {
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            const auto m = parse_method(key.substr(0, dot));
            if (!m) throw ConfigError("unknown method prefix in key `" + key + "`");
            if (!table.count(key.substr(dot + 1)) || key.substr(dot + 1) == "method")
                throw ConfigError("unknown key `" + key + "`");
            scoped.emplace_back(key, value);
            continue;
        }
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown key `" + key + "`");
        it->second(cfg, key, value);
    }
    if (method) cfg.optimizer.method = *method;
    for (const auto& [key, value] : scoped) {
        const auto dot = key.find('.');
        if (*parse_method(key.substr(0, dot)) != cfg.optimizer.method) continue;
        table.at(key.substr(dot + 1))(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

}  // namespace slb
