#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <slb/optim.hpp>
#include <slb/pma.hpp>

#include "support.hpp"

using namespace slb;
using slb::testing::random_coefficients;

namespace {

// Small spotted-phase problem: degree-10 principal mode at N = 31.
struct SmallProblem {
    SHTPlan plan{31};
    ModelParams params{1.0, -0.4, 0.4, Radius::from_squared(110.0)};
    LBObjective obj{params, plan};
    SpectralField init = preset_s10(31, 3).field;
};

OptimizerConfig small_config(Method m) {
    OptimizerConfig cfg;
    cfg.method = m;
    cfg.alpha0 = 0.1;
    cfg.alpha_min = 1e-3;
    cfg.alpha_max = 5.0;
    cfg.n_tol = 4000;
    if (m == Method::sis || m == Method::nesterov) cfg.alpha0 = 0.3;
    if (m == Method::agd || m == Method::acg) {
        cfg.alpha0 = 0.01;
        cfg.alpha_min = 1e-6;
    }
    return cfg;
}

}  // namespace

TEST_CASE("method names round trip") {
    for (Method m : all_methods) CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("AA-BPG-2") == Method::aabpg2);
    CHECK(!parse_method("newton"));
}

TEST_CASE("config validation") {
    OptimizerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.alpha0 = 10.0;  // outside [alpha_min, alpha_max] for an adaptive method
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.method = Method::sis;  // fixed-step methods use alpha0 as given
    CHECK_NOTHROW(cfg.validate());
    cfg = {};
    cfg.method = Method::aabpg4;
    cfg.a = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("BB steps") {
    SpectralField d(2), e(2);
    d(1, 0) = 2.0;
    e(1, 0) = 4.0;
    e(2, 0) = 1.0;
    // <d,d> = 4, <d,e> = 8, <e,e> = 17
    CHECK(*bb_step(d, e, BBVariant::first) == doctest::Approx(0.5));
    CHECK(*bb_step(d, e, BBVariant::second) == doctest::Approx(8.0 / 17.0));
    CHECK(!bb_step(d, SpectralField(2), BBVariant::first));
    OptimizerConfig cfg;
    CHECK(initial_step(std::nullopt, cfg) == cfg.alpha0);
    CHECK(initial_step(-1.0, cfg) == cfg.alpha0);
    CHECK(initial_step(1e9, cfg) == cfg.alpha_max);
    CHECK(initial_step(1e-9, cfg) == cfg.alpha_min);
}

TEST_CASE("momentum schedule") {
    Momentum m{1.0, 1.0};
    CHECK(m.next() == doctest::Approx(0.0));
    const double w2 = m.next();
    CHECK(w2 > 0.0);
    CHECK(w2 < 1.0);
    Momentum capped{1.0, 0.1};
    for (int i = 0; i < 50; ++i) CHECK(capped.next() <= 0.1);
    m.reset();
    CHECK(m.next() == doctest::Approx(0.0));
}

TEST_CASE("Newton solve of the quartic scalar equation matches bisection") {
    SmallProblem pb;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto psi = random_coefficients(31, 10'000 + trial, 0.05 + u(rng));
        const auto ev = pb.obj.evaluate(psi);
        OptimizerConfig cfg;
        cfg.a = 0.001 + 0.05 * u(rng);
        cfg.b = 0.5 + u(rng);
        const double alpha = 0.01 + 2.0 * u(rng);
        QuarticProxInfo info;
        const auto z = prox_step_quartic(psi, ev.bulk_grad, alpha, pb.obj, cfg, &info);
        REQUIRE(z);
        const auto rhs = quartic_rhs(psi, ev.bulk_grad, alpha, cfg.a, cfg.b);
        const auto g = quartic_scalar(rhs, alpha, pb.obj, cfg.a, cfg.b);
        const double r_bis = quartic_scalar_bisection(g);
        worst = std::max(worst, std::abs(info.r - r_bis) / std::max(1.0, r_bis));
        CHECK(std::abs(norm_squared(*z) - info.r) <= 1e-12 * std::max(1.0, info.r));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("semi-implicit step solves its defining equation") {
    SmallProblem pb;
    const auto psi = random_coefficients(31, 55, 0.3);
    const auto ev = pb.obj.evaluate(psi);
    const auto z = prox_step_sis(psi, ev.bulk_grad, 0.7, pb.obj);
    REQUIRE(z);
    CHECK(prox_residual(*z, psi, ev.bulk_grad, 0.7, pb.obj, false) < 1e-12);
    CHECK((*z)(0, 0) == cplx{0.0, 0.0});
}

TEST_CASE("huge tolerance stops before the first iteration") {
    SmallProblem pb;
    for (Method m : all_methods) {
        auto cfg = small_config(m);
        cfg.tau = 1e3;
        const auto r = run_method(pb.obj, pb.init, cfg);
        CHECK(r.iterations == 0);
        CHECK(r.converged);
        CHECK(r.trace.records.size() == 1);
    }
}

TEST_CASE("every method conserves mass exactly on every iterate") {
    SmallProblem pb;
    for (Method m : all_methods) {
        auto cfg = small_config(m);
        cfg.n_tol = 60;
        long checked = 0;
        bool exact = true;
        const auto r = run_method(pb.obj, pb.init, cfg, [&](const IterationState& s) {
            ++checked;
            if ((*s.x)(0, 0) != cplx{0.0, 0.0}) exact = false;
            if (s.z && (*s.z)(0, 0) != cplx{0.0, 0.0}) exact = false;
        });
        INFO(method_name(m));
        CHECK(checked == r.iterations);
        CHECK(exact);
        CHECK(r.x(0, 0) == cplx{0.0, 0.0});
    }
}

TEST_CASE("AA-BPG accepted iterates never increase the energy and solve the proximal equation") {
    SmallProblem pb;
    for (Method m : {Method::aabpg2, Method::aabpg4}) {
        auto cfg = small_config(m);
        bool monotone = true;
        double worst_residual = 0.0;
        const auto r = run_method(pb.obj, pb.init, cfg, [&](const IterationState& s) {
            if (s.energy > s.energy_prev) monotone = false;
            if (!s.restart) {
                const double res = prox_residual(*s.z, *s.psi, *s.bulk_grad_psi, s.alpha, pb.obj,
                                                 m == Method::aabpg4, cfg.a, cfg.b);
                worst_residual = std::max(worst_residual, res);
            }
        });
        INFO(method_name(m));
        CHECK(r.converged);
        CHECK(monotone);
        CHECK(worst_residual < 1e-10);
    }
}

TEST_CASE("methods reach the same stationary state on a small problem") {
    SmallProblem pb;
    const auto ref = run_method(pb.obj, pb.init, small_config(Method::aabpg2));
    REQUIRE(ref.converged);
    for (Method m : all_methods) {
        const auto r = run_method(pb.obj, pb.init, small_config(m));
        INFO(method_name(m) << ": " << r.iterations << " iterations, E = " << r.energy);
        // Nesterov carries no convergence guarantee; a miss is not a failure here
        if (m == Method::nesterov || m == Method::anesterov) {
            if (!r.converged) continue;
        }
        CHECK(r.converged);
        CHECK(r.grad_sup < 1e-6);
        CHECK(std::abs(r.energy - ref.energy) < 1e-8);
    }
}

TEST_CASE("runs are deterministic") {
    SmallProblem pb;
    const auto a = run_method(pb.obj, pb.init, small_config(Method::aabpg4));
    const auto b = run_method(pb.obj, pb.init, small_config(Method::aabpg4));
    CHECK(a.iterations == b.iterations);
    CHECK(a.x == b.x);
}

TEST_CASE("divergence is reported, not mistaken for convergence") {
    SmallProblem pb;
    auto cfg = small_config(Method::sis);
    cfg.alpha0 = 1e6;
    cfg.n_tol = 500;
    const auto r = run_method(pb.obj, random_coefficients(31, 8, 3.0), cfg);
    if (r.diverged) CHECK(!r.converged);
    CHECK(r.converged == (r.grad_sup < cfg.tau));
}

TEST_CASE("a fixed-step Nesterov run that rejects its plain step stops as stalled") {
    SmallProblem pb;
    auto cfg = small_config(Method::nesterov);
    cfg.alpha0 = 50.0;
    cfg.n_tol = 100000;
    long rejected_at_x = 0;
    const auto r = run_method(pb.obj, pb.init, cfg, [&](const IterationState& s) {
        if (s.restart && *s.psi == *s.x) ++rejected_at_x;
    });
    REQUIRE(r.stalled);
    CHECK(!r.converged);
    CHECK(r.iterations < cfg.n_tol);
    CHECK(rejected_at_x == 1);
    // running on changes nothing: the same step is rejected again
    const auto r2 = run_method(pb.obj, r.x, cfg);
    CHECK(r2.stalled);
    CHECK(r2.x == r.x);
}

TEST_CASE("trace CSV") {
    SmallProblem pb;
    auto cfg = small_config(Method::asis);
    cfg.n_tol = 5;
    const auto r = run_method(pb.obj, pb.init, cfg);
    std::ostringstream os;
    r.trace.write_csv(os, 0.5);
    std::istringstream is(os.str());
    std::string header, first;
    std::getline(is, header);
    std::getline(is, first);
    CHECK(header == "iter,seconds,energy,grad_sup,alpha,restart,backtracks");
    CHECK(first.rfind("0,", 0) == 0);
    long rows = 0;
    std::string line;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == r.iterations);
}
