// optim.hpp - first-order and accelerated Bregman-proximal minimizers for the
// mass-constrained energy E = G + F with diagonal quadratic part G
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "sht.hpp"

namespace slb {

// What an optimizer needs: energy-only evaluation, a combined evaluation
// (energy, mass-projected full gradient, bulk gradient) and the diagonal D_l
// of the quadratic part.
template <class O>
concept Objective = requires(const O& o, const SpectralField& x, int l) {
    { o.energy(x) } -> std::convertible_to<double>;
    { o.evaluate(x) } -> std::same_as<Evaluation>;
    { o.diagonal(l) } -> std::convertible_to<double>;
    { o.bandlimit() } -> std::convertible_to<int>;
};

enum class Method { sis, asis, agd, acg, nesterov, anesterov, aabpg2, aabpg4 };

inline constexpr std::array<Method, 8> all_methods{Method::aabpg2, Method::aabpg4,   Method::sis, Method::asis,
                                                    Method::nesterov, Method::anesterov, Method::acg, Method::agd};

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::sis: return "SIS";
        case Method::asis: return "ASIS";
        case Method::agd: return "AGD";
        case Method::acg: return "ACG";
        case Method::nesterov: return "Nesterov";
        case Method::anesterov: return "ANesterov";
        case Method::aabpg2: return "AA-BPG-2";
        case Method::aabpg4: return "AA-BPG-4";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    std::string t;
    for (char ch : s)
        if (ch != '-' && ch != '_') t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (t == "sis") return Method::sis;
    if (t == "asis") return Method::asis;
    if (t == "agd") return Method::agd;
    if (t == "acg") return Method::acg;
    if (t == "nesterov") return Method::nesterov;
    if (t == "anesterov") return Method::anesterov;
    if (t == "aabpg2") return Method::aabpg2;
    if (t == "aabpg4") return Method::aabpg4;
    return std::nullopt;
}

enum class BBVariant { first, second };

// Gradient used in the BB gradient difference of the proximal methods:
// the full gradient or the bulk (explicitly treated) part only.
enum class BBGradient { full, bulk };

// What happens when the candidate fails the decrease test against the
// current iterate.
enum class RejectPolicy {
    accept_anyway,  // take the candidate regardless
    hold,           // keep the iterate, skip one extrapolation, keep the momentum schedule
    keep,           // keep both iterates, advance the momentum schedule
    restart,        // keep the iterate and reset the momentum (AA-BPG)
};


struct OptimizerConfig {
    Method method = Method::aabpg2;
    double alpha0 = 0.02;      // initial step; the fixed step for SIS and Nesterov
    double alpha_min = 0.01;
    double alpha_max = 5.0;
    double rho_initial = (std::sqrt(5.0) - 1.0) / 2.0;  // shrink factor for the first backtracks
    double rho_late = 0.1;                              // shrink factor afterwards
    int rho_switch = 8;                                 // backtracks done with rho_initial
    double eta = 1e-14;
    double w_bar = 1.0;
    double extrapolation_sign = 1.0;  // psi = x + sign * w (x - x_prev)
    double a = 0.01;  // quartic Bregman coefficients
    double b = 1.0;
    double tau = 1e-6;
    long n_tol = 200000;
    double p_bound = 100.0;
    double newton_tol = 1e-14;
    int newton_max = 50;
    // unset: the long step for the line-search methods (AGD, ACG, ASIS) and
    // the short step for the step-search methods (ANesterov, AA-BPG)
    std::optional<BBVariant> bb;
    BBGradient bb_gradient = BBGradient::full;
    RejectPolicy nesterov_reject = RejectPolicy::hold;

    void validate() const {
        auto bad = [](const std::string& m) { throw std::invalid_argument("OptimizerConfig: " + m); };
        if (!(alpha_min > 0.0)) bad("alpha_min must be positive");
        if (!(alpha_min <= alpha_max)) bad("alpha_min must not exceed alpha_max");
        const bool fixed = method == Method::sis || method == Method::nesterov;
        if (!(alpha0 > 0.0)) bad("alpha0 must be positive");
        if (!fixed && !(alpha0 >= alpha_min && alpha0 <= alpha_max)) bad("alpha0 must lie in [alpha_min, alpha_max]");
        if (!(rho_initial > 0.0 && rho_initial < 1.0) || !(rho_late > 0.0 && rho_late < 1.0))
            bad("rho must lie in (0,1)");
        if (rho_switch < 0) bad("rho_switch must be >= 0");
        if (!(eta > 0.0)) bad("eta must be positive");
        if (!(w_bar >= 0.0)) bad("w_bar must be nonnegative");
        if (method == Method::aabpg4 && !(a > 0.0 && b > 0.0)) bad("a and b must be positive for AA-BPG-4");
        if (!(tau > 0.0)) bad("tau must be positive");
        if (n_tol < 0) bad("n_tol must be nonnegative");
        if (!(p_bound > 0.0)) bad("p_bound must be positive");
        if (newton_max < 1) bad("newton_max must be >= 1");
    }

    double rho(int backtracks_done) const { return backtracks_done < rho_switch ? rho_initial : rho_late; }

    BBVariant bb_variant() const {
        if (bb) return *bb;
        switch (method) {
            case Method::agd:
            case Method::acg:
            case Method::asis: return BBVariant::first;
            default: return BBVariant::second;
        }
    }

    // gradient entering the BB difference of the proximal methods
    const SpectralField& bb_grad(const Evaluation& e) const {
        return bb_gradient == BBGradient::bulk ? e.bulk_grad : e.gradient;
    }
};

struct TraceRecord {
    long iter = 0;
    double seconds = 0.0;
    double energy = 0.0;
    double grad_sup = 0.0;
    double alpha = 0.0;
    bool restart = false;
    int backtracks = 0;
};

struct EnergyTrace {
    std::vector<TraceRecord> records;

    // energy_scale converts objective units into reported units
    void write_csv(std::ostream& os, double energy_scale = 1.0) const {
        os << "iter,seconds,energy,grad_sup,alpha,restart,backtracks\n";
        char buf[256];
        for (const auto& r : records) {
            std::snprintf(buf, sizeof buf, "%ld,%.6f,%.15g,%.6e,%.10g,%d,%d\n", r.iter, r.seconds,
                          r.energy * energy_scale, r.grad_sup, r.alpha, r.restart ? 1 : 0, r.backtracks);
            os << buf;
        }
    }
};

// Snapshot handed to an observer after every iteration.
struct IterationState {
    const SpectralField* x = nullptr;       // new iterate
    const SpectralField* x_prev = nullptr;  // iterate before the update
    const SpectralField* gradient = nullptr;  // projected gradient at x_prev
    double energy_prev = 0.0;                 // energy at x_prev
    double energy = 0.0;                      // energy at x
    double w = 0.0;
    double alpha = 0.0;
    bool restart = false;
    long n = 0;
    // proximal methods: the extrapolated point, its bulk gradient and the
    // candidate accepted by the step search (null otherwise)
    const SpectralField* psi = nullptr;
    const SpectralField* bulk_grad_psi = nullptr;
    const SpectralField* z = nullptr;
};

using Observer = std::function<void(const IterationState&)>;

struct RunResult {
    SpectralField x;
    EnergyTrace trace;
    bool converged = false;
    long iterations = 0;
    double energy = 0.0;    // objective units
    double grad_sup = 0.0;  // projected gradient sup-norm at x
    long restarts = 0;
    double seconds = 0.0;
    bool diverged = false;  // energy or gradient became non-finite
    bool stalled = false;   // a rejected step from psi = x would repeat forever
};

// ---------------------------------------------------------------------------
// building blocks

// Barzilai-Borwein step from an iterate difference d and gradient difference e.
// Returns nullopt when the denominator vanishes or the value is not finite.
inline std::optional<double> bb_step(const SpectralField& d, const SpectralField& e, BBVariant which) {
    const double dd = inner(d, d), de = inner(d, e), ee = inner(e, e);
    const double num = which == BBVariant::first ? dd : de;
    const double den = which == BBVariant::first ? de : ee;
    if (den == 0.0) return std::nullopt;
    const double v = num / den;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

// Initial trial step: BB if available and positive, else alpha0; clamped.
inline double initial_step(const std::optional<double>& bb, const OptimizerConfig& cfg) {
    double a = (bb && *bb > 0.0) ? *bb : cfg.alpha0;
    return std::clamp(a, cfg.alpha_min, cfg.alpha_max);
}

// Semi-implicit step (alpha D + I)^{-1} (psi - alpha gradF(psi)) with the
// (0,0) component set to zero. Returns nullopt if alpha D_l + 1 <= 0 for some l.
template <Objective O>
std::optional<SpectralField> prox_step_sis(const SpectralField& psi, const SpectralField& grad_f_psi, double alpha,
                                           const O& obj) {
    const int n = psi.bandlimit();
    SpectralField z(n);
    for (int l = 0; l <= n; ++l) {
        const double den = alpha * obj.diagonal(l) + 1.0;
        if (!(den > 0.0)) return std::nullopt;
        for (int m = 0; m <= l; ++m) z(l, m) = (psi(l, m) - alpha * grad_f_psi(l, m)) / den;
    }
    z(0, 0) = cplx{0.0, 0.0};
    return z;
}

struct QuarticProxInfo {
    double r = 0.0;          // ||z||^2
    int newton_iterations = 0;
    bool used_bisection = false;
};

namespace detail {

// g(r) = sum_full |rhs|^2 / (alpha D_l + a r + b)^2 - r and its derivative.
struct QuarticScalar {
    std::vector<double> weight;  // per-degree sum of |rhs_lm|^2 over the full m range
    std::vector<double> diag;    // alpha D_l + b
    double a = 0.0;

    bool admissible(double r) const {
        for (double d : diag)
            if (!(d + a * r > 0.0)) return false;
        return true;
    }
    double value(double r) const {
        double s = 0.0;
        for (std::size_t l = 0; l < weight.size(); ++l) {
            const double den = diag[l] + a * r;
            s += weight[l] / (den * den);
        }
        return s - r;
    }
    double derivative(double r) const {
        double s = 0.0;
        for (std::size_t l = 0; l < weight.size(); ++l) {
            const double den = diag[l] + a * r;
            s += weight[l] / (den * den * den);
        }
        return -2.0 * a * s - 1.0;
    }
};

}  // namespace detail

// Root of g on [0, g(0)] by bisection; the oracle for the Newton solve.
inline double quartic_scalar_bisection(const detail::QuarticScalar& g, int iterations = 200) {
    double lo = 0.0, hi = std::max(0.0, g.value(0.0));
    for (int i = 0; i < iterations && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (g.value(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

template <Objective O>
detail::QuarticScalar quartic_scalar(const SpectralField& rhs, double alpha, const O& obj, double a, double b) {
    const int n = rhs.bandlimit();
    detail::QuarticScalar g;
    g.a = a;
    g.weight.assign(n + 1, 0.0);
    g.diag.resize(n + 1);
    for (int l = 0; l <= n; ++l) {
        g.diag[l] = alpha * obj.diagonal(l) + b;
        double w = std::norm(rhs(l, 0));
        for (int m = 1; m <= l; ++m) w += 2.0 * std::norm(rhs(l, m));
        g.weight[l] = w;
    }
    return g;
}

// Right-hand side (a ||psi||^2 + b) psi - alpha gradF(psi), (0,0) removed.
inline SpectralField quartic_rhs(const SpectralField& psi, const SpectralField& grad_f_psi, double alpha, double a,
                                 double b) {
    SpectralField rhs = psi;
    rhs *= a * norm_squared(psi) + b;
    rhs.axpy(-alpha, grad_f_psi);
    rhs(0, 0) = cplx{0.0, 0.0};
    return rhs;
}

// Solves z = (alpha D + (a ||z||^2 + b) I)^{-1} rhs through the scalar
// equation for r = ||z||^2 (Newton from r = ||psi||^2, bisection fallback).
template <Objective O>
std::optional<SpectralField> prox_step_quartic(const SpectralField& psi, const SpectralField& grad_f_psi, double alpha,
                                               const O& obj, const OptimizerConfig& cfg,
                                               QuarticProxInfo* info = nullptr) {
    const double a = cfg.a, b = cfg.b;
    const SpectralField rhs = quartic_rhs(psi, grad_f_psi, alpha, a, b);
    const auto g = quartic_scalar(rhs, alpha, obj, a, b);
    if (!g.admissible(0.0)) return std::nullopt;

    QuarticProxInfo local;
    double r = std::max(0.0, norm_squared(psi));
    bool ok = false;
    for (int it = 0; it < cfg.newton_max; ++it) {
        ++local.newton_iterations;
        const double v = g.value(r);
        const double dv = g.derivative(r);
        if (!std::isfinite(v) || !std::isfinite(dv) || dv == 0.0) break;
        const double next = std::max(0.0, r - v / dv);
        const double step = std::abs(next - r);
        r = next;
        if (step <= cfg.newton_tol * std::max(1.0, r)) {
            ok = true;
            break;
        }
    }
    if (!ok || !std::isfinite(r)) {
        r = quartic_scalar_bisection(g);
        local.used_bisection = true;
    }
    const int n = psi.bandlimit();
    SpectralField z(n);
    for (int l = 0; l <= n; ++l) {
        const double den = g.diag[l] + a * r;
        for (int m = 0; m <= l; ++m) z(l, m) = rhs(l, m) / den;
    }
    z(0, 0) = cplx{0.0, 0.0};
    local.r = r;
    if (info) *info = local;
    return z;
}

// Componentwise residual of the defining equation of an accepted proximal
// step, excluding the (0,0) multiplier component:
//   alpha (D z + gradF(psi)) + c(z) z - c(psi) psi,
// with c(x) = 1 for the semi-implicit step and a ||x||^2 + b for the quartic one.
template <Objective O>
double prox_residual(const SpectralField& z, const SpectralField& psi, const SpectralField& grad_f_psi, double alpha,
                     const O& obj, bool quartic, double a = 0.0, double b = 1.0) {
    const double cz = quartic ? a * norm_squared(z) + b : 1.0;
    const double cp = quartic ? a * norm_squared(psi) + b : 1.0;
    const int n = z.bandlimit();
    double worst = 0.0;
    for (int l = 0; l <= n; ++l) {
        const double d = obj.diagonal(l);
        for (int m = 0; m <= l; ++m) {
            if (l == 0) continue;
            const cplx r = alpha * (d * z(l, m) + grad_f_psi(l, m)) + cz * z(l, m) - cp * psi(l, m);
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

struct DescentStep {
    double alpha = 0.0;
    SpectralField x;
    Evaluation eval;
    int backtracks = 0;
    bool floor_hit = false;
};

// Backtracking along a direction p from x: shrink while the energy rises or
// the next direction (computed by next_direction from the trial evaluation)
// points uphill; the first iteration uses alpha0 without backtracking.
template <Objective O, class NextDirection>
DescentStep line_search_descent(const O& obj, const SpectralField& x, double energy_x, const SpectralField& p,
                                const std::optional<double>& bb, bool first_iteration, const OptimizerConfig& cfg,
                                NextDirection&& next_direction) {
    DescentStep s;
    auto trial = [&](double alpha) {
        s.x = x;
        s.x.axpy(alpha, p);
        s.x(0, 0) = cplx{0.0, 0.0};
        s.eval = obj.evaluate(s.x);
    };
    if (first_iteration) {
        s.alpha = cfg.alpha0;
        trial(s.alpha);
        return s;
    }
    s.alpha = initial_step(bb, cfg);
    trial(s.alpha);
    auto uphill = [&] {
        if (!std::isfinite(s.eval.energy) || s.eval.energy > energy_x) return true;
        const SpectralField pn = next_direction(s.eval);
        return inner(pn, s.eval.gradient) > 0.0;
    };
    while (uphill()) {
        s.alpha *= cfg.rho(s.backtracks);
        ++s.backtracks;
        trial(s.alpha);
        if (s.alpha <= cfg.alpha_min) {
            s.floor_hit = true;
            break;
        }
    }
    const double clamped = std::clamp(s.alpha, cfg.alpha_min, cfg.alpha_max);
    if (clamped != s.alpha) {
        s.alpha = clamped;
        trial(s.alpha);
    }
    return s;
}

struct ProxStep {
    double alpha = 0.0;
    SpectralField z;
    double energy_z = 0.0;
    int backtracks = 0;
    bool floor_hit = false;
};

// Step-size search at psi with sufficient decrease
// E(psi) - E(z) >= eta ||z - psi||^2, exiting at the alpha floor.
template <Objective O, class Prox>
ProxStep step_size_search_prox(const O& obj, const SpectralField& psi, double energy_psi, double alpha_init,
                               const OptimizerConfig& cfg, Prox&& prox) {
    ProxStep s;
    s.alpha = alpha_init;
    auto trial = [&](double alpha) {
        auto z = prox(alpha);
        if (!z) {
            s.z = psi;
            s.energy_z = std::numeric_limits<double>::infinity();
            return;
        }
        s.z = std::move(*z);
        s.energy_z = obj.energy(s.z);
    };
    for (;;) {
        trial(s.alpha);
        const double decrease = energy_psi - s.energy_z;
        if (std::isfinite(s.energy_z) && decrease >= cfg.eta * norm_squared(s.z - psi)) break;
        if (s.alpha < cfg.alpha_min) {
            s.floor_hit = true;
            break;
        }
        s.alpha *= cfg.rho(s.backtracks);
        ++s.backtracks;
    }
    const double clamped = std::clamp(s.alpha, cfg.alpha_min, cfg.alpha_max);
    if (clamped != s.alpha) {
        s.alpha = clamped;
        trial(s.alpha);
    }
    return s;
}

// FISTA-type momentum schedule capped at w_bar.
struct Momentum {
    double t = 1.0;
    double w_bar = 1.0;

    double next() {
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double w = std::min((t - 1.0) / t_new, w_bar);
        t = t_new;
        return w;
    }
    void reset() { t = 1.0; }
};

// ---------------------------------------------------------------------------
// drivers

namespace detail {

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline void push(RunResult& r, const Clock& clk, long iter, double energy, double grad_sup, double alpha,
                 bool restart, int backtracks) {
    r.trace.records.push_back({iter, clk.seconds(), energy, grad_sup, alpha, restart, backtracks});
}

}  // namespace detail

// AGD and ACG: explicit steps along -grad E or a conjugate direction.
template <Objective O>
RunResult run_gradient(const O& obj, SpectralField x0, const OptimizerConfig& cfg, bool conjugate,
                       const Observer& observer = {}) {
    cfg.validate();
    detail::Clock clk;
    RunResult res;
    SpectralField x = project_mass(std::move(x0));
    Evaluation ev = obj.evaluate(x);
    double gsup = sup_norm(ev.gradient);
    detail::push(res, clk, 0, ev.energy, gsup, 0.0, false, 0);

    SpectralField p = ev.gradient;
    p *= -1.0;
    SpectralField x_prev, g_prev;
    bool have_prev = false;
    long n = 0;
    while (gsup >= cfg.tau && n < cfg.n_tol && std::isfinite(ev.energy) && std::isfinite(gsup)) {
        std::optional<double> bb;
        if (have_prev) bb = bb_step(x - x_prev, ev.gradient - g_prev, cfg.bb_variant());

        auto next_dir = [&](const Evaluation& e) {
            SpectralField pn = e.gradient;
            pn *= -1.0;
            if (conjugate) {
                const double gg = norm_squared(ev.gradient);
                if (gg > 0.0) {
                    const double prp = std::abs(inner(e.gradient - ev.gradient, e.gradient)) / gg;
                    const double fr = norm_squared(e.gradient) / gg;
                    pn.axpy(std::min(prp, fr), p);
                }
            }
            return pn;
        };
        DescentStep s = line_search_descent(obj, x, ev.energy, p, bb, n == 0, cfg, next_dir);

        bool reset = false;
        if (conjugate) {
            SpectralField pn = next_dir(s.eval);
            if (std::sqrt(norm_squared(pn)) > cfg.p_bound || inner(pn, s.eval.gradient) > 0.0) {
                pn = s.eval.gradient;
                pn *= -1.0;
                reset = true;
            }
            p = std::move(pn);
        } else {
            p = s.eval.gradient;
            p *= -1.0;
        }

        x_prev = std::move(x);
        g_prev = std::move(ev.gradient);
        const double e_prev = ev.energy;
        have_prev = true;
        x = std::move(s.x);
        ev = std::move(s.eval);
        gsup = sup_norm(ev.gradient);
        ++n;
        detail::push(res, clk, n, ev.energy, gsup, s.alpha, reset, s.backtracks);
        if (reset) ++res.restarts;
        if (observer) {
            IterationState st;
            st.x = &x;
            st.x_prev = &x_prev;
            st.gradient = &g_prev;
            st.energy_prev = e_prev;
            st.energy = ev.energy;
            st.alpha = s.alpha;
            st.restart = reset;
            st.n = n;
            observer(st);
        }
    }
    res.x = std::move(x);
    res.energy = ev.energy;
    res.grad_sup = gsup;
    res.iterations = n;
    res.diverged = !std::isfinite(res.energy) || !std::isfinite(gsup);
    res.converged = !res.diverged && gsup < cfg.tau;
    res.seconds = clk.seconds();
    return res;
}

template <Objective O>
RunResult run_agd(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_gradient(obj, std::move(x0), cfg, false, observer);
}

template <Objective O>
RunResult run_acg(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_gradient(obj, std::move(x0), cfg, true, observer);
}

// SIS (fixed step) and ASIS (step chosen by energy backtracking).
template <Objective O>
RunResult run_semi_implicit(const O& obj, SpectralField x0, const OptimizerConfig& cfg, bool adaptive,
                            const Observer& observer = {}) {
    cfg.validate();
    detail::Clock clk;
    RunResult res;
    SpectralField x = project_mass(std::move(x0));
    Evaluation ev = obj.evaluate(x);
    double gsup = sup_norm(ev.gradient);
    detail::push(res, clk, 0, ev.energy, gsup, 0.0, false, 0);
    SpectralField x_prev, gf_prev, bb_g;
    bool have_prev = false;
    long n = 0;
    while (gsup >= cfg.tau && n < cfg.n_tol && std::isfinite(ev.energy) && std::isfinite(gsup)) {
        double alpha = cfg.alpha0;
        int backtracks = 0;
        SpectralField z;
        auto step = [&](double a) {
            auto r = prox_step_sis(x, ev.bulk_grad, a, obj);
            if (!r) throw std::runtime_error("semi-implicit step is singular for this step size");
            return std::move(*r);
        };
        if (adaptive && n > 0) {
            std::optional<double> bb;
            if (have_prev) bb = bb_step(x - x_prev, cfg.bb_grad(ev) - bb_g, cfg.bb_variant());
            alpha = initial_step(bb, cfg);
            z = step(alpha);
            double ez = obj.energy(z);
            while (!(ez <= ev.energy)) {
                alpha *= cfg.rho(backtracks);
                ++backtracks;
                z = step(alpha);
                ez = obj.energy(z);
                if (alpha <= cfg.alpha_min) break;
            }
            const double clamped = std::clamp(alpha, cfg.alpha_min, cfg.alpha_max);
            if (clamped != alpha) {
                alpha = clamped;
                z = step(alpha);
            }
        } else {
            z = step(alpha);
        }
        x_prev = std::move(x);
        bb_g = cfg.bb_grad(ev);
        gf_prev = std::move(ev.bulk_grad);
        const SpectralField g_prev = ev.gradient;
        const double e_prev = ev.energy;
        have_prev = true;
        x = std::move(z);
        ev = obj.evaluate(x);
        gsup = sup_norm(ev.gradient);
        ++n;
        detail::push(res, clk, n, ev.energy, gsup, alpha, false, backtracks);
        if (observer) {
            IterationState st;
            st.x = &x;
            st.x_prev = &x_prev;
            st.gradient = &g_prev;
            st.energy_prev = e_prev;
            st.energy = ev.energy;
            st.alpha = alpha;
            st.n = n;
            st.psi = &x_prev;
            st.bulk_grad_psi = &gf_prev;
            st.z = &x;
            observer(st);
        }
    }
    res.x = std::move(x);
    res.energy = ev.energy;
    res.grad_sup = gsup;
    res.iterations = n;
    res.diverged = !std::isfinite(res.energy) || !std::isfinite(gsup);
    res.converged = !res.diverged && gsup < cfg.tau;
    res.seconds = clk.seconds();
    return res;
}

template <Objective O>
RunResult run_sis(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_semi_implicit(obj, std::move(x0), cfg, false, observer);
}

template <Objective O>
RunResult run_asis(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_semi_implicit(obj, std::move(x0), cfg, true, observer);
}

enum class ProxKind { semi_implicit, quartic };

struct ExtrapolatedOptions {
    ProxKind prox = ProxKind::semi_implicit;
    bool adaptive = true;  // step-size search; otherwise fixed alpha0
    RejectPolicy on_reject = RejectPolicy::restart;
};

// Nesterov, ANesterov and AA-BPG-M: extrapolate, take a proximal step from the
// extrapolated point, then accept or restart.
template <Objective O>
RunResult run_extrapolated(const O& obj, SpectralField x0, const OptimizerConfig& cfg, ExtrapolatedOptions opt,
                           const Observer& observer = {}) {
    cfg.validate();
    detail::Clock clk;
    RunResult res;
    SpectralField x = project_mass(std::move(x0));
    SpectralField x_prev = x;
    Evaluation ev = obj.evaluate(x);
    double gsup = sup_norm(ev.gradient);
    detail::push(res, clk, 0, ev.energy, gsup, 0.0, false, 0);

    // BB pair: last two distinct accepted iterates and their bulk gradients
    SpectralField bb_x, bb_g;
    bool have_bb = false;
    Momentum mom{1.0, cfg.w_bar};
    double w = 0.0;
    long n = 0;
    while (gsup >= cfg.tau && n < cfg.n_tol && std::isfinite(ev.energy) && std::isfinite(gsup)) {
        SpectralField psi = x;
        if (w != 0.0) {
            psi.axpy(cfg.extrapolation_sign * w, x - x_prev);
            psi(0, 0) = cplx{0.0, 0.0};
        }
        const bool at_x = (w == 0.0);
        // psi coincides with x also when the pair was collapsed by a rejection
        const bool psi_is_x = at_x || x == x_prev;
        // a copy at psi = x: ev is replaced once the candidate is accepted
        const Evaluation ev_psi = at_x ? ev : obj.evaluate(psi);

        auto prox = [&](double alpha) -> std::optional<SpectralField> {
            if (opt.prox == ProxKind::quartic) return prox_step_quartic(psi, ev_psi.bulk_grad, alpha, obj, cfg);
            return prox_step_sis(psi, ev_psi.bulk_grad, alpha, obj);
        };

        ProxStep s;
        if (opt.adaptive) {
            std::optional<double> bb;
            if (have_bb) bb = bb_step(x - bb_x, cfg.bb_grad(ev) - bb_g, cfg.bb_variant());
            const double a0 = have_bb ? initial_step(bb, cfg) : std::clamp(cfg.alpha0, cfg.alpha_min, cfg.alpha_max);
            s = step_size_search_prox(obj, psi, ev_psi.energy, a0, cfg, prox);
        } else {
            s.alpha = cfg.alpha0;
            auto z = prox(s.alpha);
            if (!z) throw std::runtime_error("proximal step is singular for the fixed step size");
            s.z = std::move(*z);
            s.energy_z = obj.energy(s.z);
        }

        const bool decrease = ev.energy - s.energy_z >= cfg.eta * norm_squared(x - s.z);
        const bool accept = opt.on_reject == RejectPolicy::accept_anyway || decrease || s.floor_hit;
        const SpectralField g_before = ev.gradient;
        const double e_before = ev.energy;
        SpectralField x_before = x;
        if (accept) {
            bb_x = x;
            bb_g = cfg.bb_grad(ev);
            have_bb = true;
            x_prev = std::move(x);
            x = s.z;
            ev = obj.evaluate(x);
            w = mom.next();
        } else {
            // keep the iterate; unless told to keep the pair, the next extrapolation vanishes
            if (opt.on_reject != RejectPolicy::keep) x_prev = x;
            if (opt.on_reject == RejectPolicy::restart) {
                mom.reset();
                w = 0.0;
            } else {
                w = mom.next();
            }
            ++res.restarts;
        }
        gsup = sup_norm(ev.gradient);
        ++n;
        detail::push(res, clk, n, ev.energy, gsup, s.alpha, !accept, s.backtracks);
        if (observer) {
            IterationState st;
            st.x = &x;
            st.x_prev = &x_before;
            st.gradient = &g_before;
            st.energy_prev = e_before;
            st.energy = ev.energy;
            st.w = w;
            st.alpha = s.alpha;
            st.restart = !accept;
            st.n = n;
            st.psi = &psi;
            st.bulk_grad_psi = &ev_psi.bulk_grad;
            st.z = &s.z;
            observer(st);
        }
        // the step from psi = x depends only on x and the unchanged BB pair,
        // so every later iteration would reject the same candidate
        if (!accept && psi_is_x && opt.on_reject != RejectPolicy::keep) {
            res.stalled = true;
            break;
        }
    }
    res.x = std::move(x);
    res.energy = ev.energy;
    res.grad_sup = gsup;
    res.iterations = n;
    res.diverged = !std::isfinite(res.energy) || !std::isfinite(gsup);
    res.converged = !res.diverged && gsup < cfg.tau;
    res.seconds = clk.seconds();
    return res;
}

template <Objective O>
RunResult run_nesterov(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_extrapolated(obj, std::move(x0), cfg, {ProxKind::semi_implicit, false, cfg.nesterov_reject}, observer);
}

template <Objective O>
RunResult run_anesterov(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    return run_extrapolated(obj, std::move(x0), cfg, {ProxKind::semi_implicit, true, cfg.nesterov_reject}, observer);
}

enum class BregmanOrder { M2, M4 };

template <Objective O>
RunResult run_aabpg(const O& obj, SpectralField x0, const OptimizerConfig& cfg, BregmanOrder order,
                    const Observer& observer = {}) {
    const ProxKind k = order == BregmanOrder::M4 ? ProxKind::quartic : ProxKind::semi_implicit;
    return run_extrapolated(obj, std::move(x0), cfg, {k, true, RejectPolicy::restart}, observer);
}

template <Objective O>
RunResult run_method(const O& obj, SpectralField x0, const OptimizerConfig& cfg, const Observer& observer = {}) {
    switch (cfg.method) {
        case Method::sis: return run_sis(obj, std::move(x0), cfg, observer);
        case Method::asis: return run_asis(obj, std::move(x0), cfg, observer);
        case Method::agd: return run_agd(obj, std::move(x0), cfg, observer);
        case Method::acg: return run_acg(obj, std::move(x0), cfg, observer);
        case Method::nesterov: return run_nesterov(obj, std::move(x0), cfg, observer);
        case Method::anesterov: return run_anesterov(obj, std::move(x0), cfg, observer);
        case Method::aabpg2: return run_aabpg(obj, std::move(x0), cfg, BregmanOrder::M2, observer);
        case Method::aabpg4: return run_aabpg(obj, std::move(x0), cfg, BregmanOrder::M4, observer);
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace slb
