// slb - command-line front end: run, compare, success-rate, count, transform
//
// Exit status: 0 converged (or utility success), 2 not converged,
// 64 invalid configuration or usage, 1 other failures (I/O).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <slb/config.hpp>
#include <slb/diagnostics.hpp>
#include <slb/driver.hpp>
#include <slb/io.hpp>

namespace {

constexpr int exit_converged = 0;
constexpr int exit_failure = 1;
constexpr int exit_not_converged = 2;
constexpr int exit_usage = 64;

// Options shared by the configuration-driven subcommands.
struct ConfigOptions {
    std::string file;
    std::vector<std::string> sets;
};

void add_config_options(CLI::App* sub, ConfigOptions& o) {
    sub->add_option("-c,--config", o.file, "key = value configuration file");
    sub->add_option("-s,--set", o.sets, "override, key=value (repeatable)");
    sub->allow_extras();
    sub->footer("Any configuration key can also be given as --key value; flags win over the file.");
}

// File first, then --set, then trailing --key value pairs.
slb::ConfigMap gather_config(const ConfigOptions& o, const std::vector<std::string>& extras) {
    slb::ConfigMap map;
    if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) throw slb::ConfigError("cannot open config file " + o.file);
        map = slb::parse_config(in, o.file);
    }
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw slb::ConfigError("--set expects key=value, got `" + s + "`");
        map.set(slb::trim(s.substr(0, eq)), slb::trim(s.substr(eq + 1)));
    }
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0) throw slb::ConfigError("unexpected argument `" + tok + "`");
        std::string key = tok.substr(2);
        if (const auto eq = key.find('='); eq != std::string::npos) {
            map.set(key.substr(0, eq), key.substr(eq + 1));
            continue;
        }
        if (i + 1 >= extras.size()) throw slb::ConfigError("option `" + tok + "` needs a value");
        map.set(key, extras[++i]);
    }
    return map;
}

std::vector<slb::Method> parse_method_list(const std::string& s) {
    std::vector<slb::Method> out;
    if (s.empty() || s == "all") return {slb::all_methods.begin(), slb::all_methods.end()};
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto m = slb::parse_method(slb::trim(tok));
        if (!m) throw slb::ConfigError("unknown method `" + tok + "`");
        out.push_back(*m);
    }
    return out;
}

int cmd_run(const ConfigOptions& o, const std::vector<std::string>& extras) {
    const auto cfg = slb::make_run_config(gather_config(o, extras));
    const auto out = slb::run(cfg);
    slb::write_key_values(std::cout, slb::summary_key_values(out.summary));
    return out.summary.converged ? exit_converged : exit_not_converged;
}

int cmd_compare(const ConfigOptions& o, const std::vector<std::string>& extras, const std::string& methods,
                const std::string& csv) {
    const auto map = gather_config(o, extras);
    (void)slb::make_run_config(map);  // validate before the first run
    const auto rows = slb::compare_methods(map, parse_method_list(methods));
    std::cout << slb::comparison_table(rows);
    if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw std::runtime_error("cannot write " + csv);
        f << slb::comparison_csv(rows);
    }
    for (const auto& r : rows)
        if (!r.error.empty() || !r.converged) return exit_not_converged;
    return exit_converged;
}

int cmd_success(const ConfigOptions& o, const std::vector<std::string>& extras, int trials, int expect,
                const std::string& kind_name) {
    const auto kind = slb::parse_feature_kind(kind_name);
    if (!kind) throw slb::ConfigError("--kind must be spots or stripes");
    const auto reports = slb::success_rate_experiment(gather_config(o, extras), trials, expect, *kind);
    std::cout << slb::success_rate_table(reports);
    return exit_converged;
}

int cmd_count(const std::string& grid_path, const std::string& coeff_path, const std::string& kind_name) {
    const auto kind = slb::parse_feature_kind(kind_name);
    if (!kind) throw slb::ConfigError("--kind must be spots or stripes");
    if (grid_path.empty() == coeff_path.empty())
        throw slb::ConfigError("count needs exactly one of --grid or --coefficients");
    slb::GridField f;
    if (!grid_path.empty()) {
        f = slb::read_grid_csv_file(grid_path);
    } else {
        const auto c = slb::read_coefficients_file(coeff_path);
        const slb::SHTPlan plan(c.bandlimit());
        f = plan.synthesize(c);
    }
    const auto r = slb::count_features(f, *kind);
    std::cout << "count = " << r.count << "\nflat = " << (r.flat ? "true" : "false") << "\n";
    return exit_converged;
}

int cmd_transform(const std::string& in, const std::string& out, bool to_grid, int bandlimit, int n_theta,
                  int n_phi) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    if (to_grid) {
        const auto c = slb::read_coefficients_file(in, bandlimit);
        const int n = c.bandlimit();
        const slb::SHTPlan plan(n, n_theta > 0 ? n_theta : slb::SHTPlan::default_n_theta(n),
                                n_phi > 0 ? n_phi : slb::SHTPlan::default_n_phi(n));
        slb::write_grid_csv(os, plan.synthesize(c), plan.grid());
    } else {
        if (bandlimit < 0) throw slb::ConfigError("--bandlimit is required for grid -> coefficients");
        const auto f = slb::read_grid_csv_file(in);
        const slb::SHTPlan plan(bandlimit, f.n_theta, f.n_phi);
        slb::write_coefficients(os, plan.analyze(f));
    }
    return exit_converged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary states of the Landau-Brazovskii model on the sphere"};
    app.require_subcommand(1);

    ConfigOptions run_opts, cmp_opts, sr_opts;
    auto* run = app.add_subcommand("run", "run one optimizer from a configuration");
    add_config_options(run, run_opts);

    auto* cmp = app.add_subcommand("compare", "run several methods from the same initial field");
    add_config_options(cmp, cmp_opts);
    std::string methods = "all", csv;
    cmp->add_option("-m,--methods", methods, "comma-separated methods or `all`");
    cmp->add_option("--csv", csv, "also write the table as CSV");

    auto* sr = app.add_subcommand("success-rate", "PMA success rates over the four init x radius cases");
    add_config_options(sr, sr_opts);
    int trials = 20, expect = 0;
    std::string sr_kind = "spots";
    sr->add_option("-n,--trials", trials, "trials per case")->check(CLI::PositiveNumber);
    sr->add_option("-e,--expect", expect, "expected feature count")->required();
    sr->add_option("-k,--kind", sr_kind, "spots or stripes");

    auto* cnt = app.add_subcommand("count", "count spots or stripes of a saved field");
    std::string grid_path, coeff_path, cnt_kind = "spots";
    cnt->add_option("-g,--grid", grid_path, "grid CSV");
    cnt->add_option("--coefficients", coeff_path, "coefficient file (synthesized on the default grid)");
    cnt->add_option("-k,--kind", cnt_kind, "spots or stripes");

    auto* tr = app.add_subcommand("transform", "convert between coefficient files and grid CSV");
    std::string tr_in, tr_out, direction;
    int tr_n = -1, tr_nt = 0, tr_np = 0;
    tr->add_option("direction", direction, "to-grid or to-coefficients")
        ->required()
        ->check(CLI::IsMember({"to-grid", "to-coefficients"}));
    tr->add_option("-i,--input", tr_in, "input file")->required();
    tr->add_option("-o,--output", tr_out, "output file")->required();
    tr->add_option("-N,--bandlimit", tr_n, "bandlimit (required for to-coefficients)");
    tr->add_option("--n-theta", tr_nt, "latitude rings (to-grid)");
    tr->add_option("--n-phi", tr_np, "longitudes (to-grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_usage;
    }

    try {
        if (*run) return cmd_run(run_opts, run->remaining());
        if (*cmp) return cmd_compare(cmp_opts, cmp->remaining(), methods, csv);
        if (*sr) return cmd_success(sr_opts, sr->remaining(), trials, expect, sr_kind);
        if (*cnt) return cmd_count(grid_path, coeff_path, cnt_kind);
        if (*tr) return cmd_transform(tr_in, tr_out, direction == "to-grid", tr_n, tr_nt, tr_np);
    } catch (const slb::ConfigError& e) {
        std::cerr << "slb: invalid configuration: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "slb: invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "slb: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}
