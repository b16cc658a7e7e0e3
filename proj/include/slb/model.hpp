// model.hpp - discretized spherical Landau-Brazovskii energy and gradient
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sht.hpp"

namespace slb {

struct ModelParams {
    double xi = 1.0;
    double epsilon = -1.0;
    double lambda = 0.0;
    Radius radius = Radius::from_squared(2.0);

    void validate() const {
        if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("ModelParams: xi must be positive");
        if (!std::isfinite(epsilon) || !std::isfinite(lambda))
            throw std::invalid_argument("ModelParams: epsilon and lambda must be finite");
    }
};

// Operator factor 1 - l(l+1)/R^2 of (1 + Laplacian) on degree l.
inline double operator_factor(int l, Radius radius) { return 1.0 + laplacian_eigenvalue(l, radius); }

// Which diagonal enters the gradient and the proximal operator:
// squared is the exact derivative of the quadratic energy; unsquared uses
// the unsquared operator factor.
enum class GradientVariant { squared, unsquared };

// How energies are reported. The optimizers always work with the integral
// over the unit sphere; this only rescales reported values.
//   mode_zero   : integral / sqrt(4 pi), i.e. the Y_0^0 coefficient of the
//                 energy density (reproduces published energies)
//   unit_sphere : the plain integral over the unit sphere
//   area_mean   : integral / (4 pi)
enum class EnergyScale { mode_zero, unit_sphere, area_mean };

inline double energy_scale_factor(EnergyScale s) {
    switch (s) {
        case EnergyScale::mode_zero: return 1.0 / std::sqrt(four_pi);
        case EnergyScale::unit_sphere: return 1.0;
        case EnergyScale::area_mean: return 1.0 / four_pi;
    }
    return 1.0;
}

struct EnergyBreakdown {
    double g = 0.0;
    double f = 0.0;
    double total = 0.0;
};

inline EnergyBreakdown scaled(EnergyBreakdown e, EnergyScale s) {
    const double k = energy_scale_factor(s);
    return {e.g * k, e.f * k, e.g * k + e.f * k};
}

// Diagonal D_l used in the gradient of the quadratic part and in the
// semi-implicit/proximal steps.
inline double diagonal_entry(int l, const ModelParams& p, GradientVariant v = GradientVariant::squared) {
    const double f = operator_factor(l, p.radius);
    return p.xi * p.xi * (v == GradientVariant::squared ? f * f : f);
}

// Quadratic part (xi^2/2) sum_{l,|m|<=l} (1 - l(l+1)/R^2)^2 |phi_lm|^2.
inline double quadratic_energy(const SpectralField& c, const ModelParams& p) {
    const int n = c.bandlimit();
    double m0 = 0.0, rest = 0.0;
    for (int m = 0; m <= n; ++m) {
        for (int l = m; l <= n; ++l) {
            const double f = operator_factor(l, p.radius);
            const double v = f * f * std::norm(c(l, m));
            (m == 0 ? m0 : rest) += v;
        }
    }
    return 0.5 * p.xi * p.xi * (m0 + 2.0 * rest);
}

// Pointwise bulk density (eps/2) x^2 - (lambda/6) x^3 + x^4/24.
inline double bulk_density(double x, const ModelParams& p) {
    const double x2 = x * x;
    return x2 * (0.5 * p.epsilon - x * p.lambda / 6.0 + x2 / 24.0);
}

// Bulk part: integral of the density over the unit sphere.
inline double bulk_energy(const GridField& f, const ModelParams& p, const SHTPlan& plan) {
    GridField d(f.n_theta, f.n_phi);
    for (std::size_t i = 0; i < f.values.size(); ++i) d.values[i] = bulk_density(f.values[i], p);
    return plan.integrate(d);
}

// Unscaled (unit-sphere integral) energy.
inline EnergyBreakdown energy_integral(const SpectralField& c, const ModelParams& p, const SHTPlan& plan) {
    EnergyBreakdown e;
    e.g = quadratic_energy(c, p);
    e.f = bulk_energy(plan.synthesize(c), p, plan);
    e.total = e.g + e.f;
    return e;
}

inline EnergyBreakdown energy(const SpectralField& c, const ModelParams& p, const SHTPlan& plan,
                              EnergyScale scale = EnergyScale::mode_zero) {
    return scaled(energy_integral(c, p, plan), scale);
}

inline SpectralField project_mass(SpectralField c) {
    c(0, 0) = cplx{0.0, 0.0};
    return c;
}

// Gradient of the bulk part: eps phi - (lambda/2) (phi^2)^ + (1/6) (phi^3)^.
// The linear eps term is applied in coefficient space; only the nonlinear
// remainder goes through the grid.
inline SpectralField bulk_gradient_from_grid(const SpectralField& c, const GridField& f, const ModelParams& p,
                                             const SHTPlan& plan) {
    GridField nl(f.n_theta, f.n_phi);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double x = f.values[i];
        nl.values[i] = x * x * (x / 6.0 - 0.5 * p.lambda);
    }
    SpectralField g = plan.analyze(nl);
    if (c.bandlimit() != g.bandlimit()) throw std::invalid_argument("gradient: field and plan bandlimit differ");
    g.axpy(p.epsilon, c);
    return g;
}

inline SpectralField bulk_gradient(const SpectralField& c, const ModelParams& p, const SHTPlan& plan) {
    return bulk_gradient_from_grid(c, plan.synthesize(c), p, plan);
}

inline void add_quadratic_gradient(SpectralField& g, const SpectralField& c, const ModelParams& p,
                                   GradientVariant v) {
    const int n = c.bandlimit();
    for (int l = 0; l <= n; ++l) {
        const double d = diagonal_entry(l, p, v);
        for (int m = 0; m <= l; ++m) g(l, m) += d * c(l, m);
    }
}

inline SpectralField gradient(const SpectralField& c, const ModelParams& p, const SHTPlan& plan,
                              GradientVariant v = GradientVariant::squared) {
    SpectralField g = bulk_gradient(c, p, plan);
    add_quadratic_gradient(g, c, p, v);
    return g;
}

// Everything an optimizer needs from one evaluation.
struct Evaluation {
    double energy = 0.0;        // unit-sphere integral
    SpectralField gradient;     // mass-projected full gradient
    SpectralField bulk_grad;    // gradient of the bulk part (unprojected)
};

// The energy seen by the optimizers: unit-sphere integral, gradient with the
// (0,0) component removed (it is absorbed by the mass-constraint multiplier).
class LBObjective {
public:
    LBObjective(const ModelParams& p, const SHTPlan& plan, GradientVariant v = GradientVariant::squared)
        : params_(p), plan_(&plan), variant_(v) {
        p.validate();
    }

    int bandlimit() const { return plan_->bandlimit(); }
    const ModelParams& params() const { return params_; }
    const SHTPlan& plan() const { return *plan_; }
    GradientVariant variant() const { return variant_; }

    double energy(const SpectralField& c) const {
        ++energy_calls_;
        return quadratic_energy(c, params_) + bulk_energy(plan_->synthesize(c), params_, *plan_);
    }

    Evaluation evaluate(const SpectralField& c) const {
        ++gradient_calls_;
        Evaluation ev;
        const GridField f = plan_->synthesize(c);
        ev.energy = quadratic_energy(c, params_) + bulk_energy(f, params_, *plan_);
        ev.bulk_grad = bulk_gradient_from_grid(c, f, params_, *plan_);
        ev.gradient = ev.bulk_grad;
        add_quadratic_gradient(ev.gradient, c, params_, variant_);
        ev.gradient(0, 0) = cplx{0.0, 0.0};
        return ev;
    }

    double diagonal(int l) const { return diagonal_entry(l, params_, variant_); }

    long energy_calls() const { return energy_calls_; }
    long gradient_calls() const { return gradient_calls_; }

private:
    ModelParams params_;
    const SHTPlan* plan_;
    GradientVariant variant_;
    mutable long energy_calls_ = 0;
    mutable long gradient_calls_ = 0;
};

}  // namespace slb
