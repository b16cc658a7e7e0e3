#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <slb/model.hpp>
#include <slb/pma.hpp>

using namespace slb;

namespace {

using Vec = std::array<double, 3>;
using Mat = std::array<Vec, 3>;

double field_at(const SpectralField& c, const Vec& v) {
    return evaluate_at(c, std::acos(std::clamp(v[2], -1.0, 1.0)), std::atan2(v[1], v[0])).real();
}

Mat rotation(Vec u, double angle) {
    const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for (auto& x : u) x /= n;
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    return {{{t * u[0] * u[0] + c, t * u[0] * u[1] - s * u[2], t * u[0] * u[2] + s * u[1]},
             {t * u[0] * u[1] + s * u[2], t * u[1] * u[1] + c, t * u[1] * u[2] - s * u[0]},
             {t * u[0] * u[2] - s * u[1], t * u[1] * u[2] + s * u[0], t * u[2] * u[2] + c}}};
}

Vec rotate(const Mat& r, const Vec& v) {
    return {r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2], r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]};
}

// max |f(R v) - f(v)| over random unit vectors
double invariance_defect(const SpectralField& c, const Mat& r, int samples = 40) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec v{g(rng), g(rng), g(rng)};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (auto& x : v) x /= n;
        const double a = field_at(c, v), b = field_at(c, rotate(r, v));
        worst = std::max(worst, std::abs(a - b));
        scale = std::max(scale, std::abs(a));
    }
    return worst / scale;
}

// A second five-fold axis of an icosahedron with a five-fold axis on z:
// the vertex at polar angle atan(2) and longitude phi0.
Mat icosahedral_rotation(double phi0) {
    const double th = std::atan(2.0);
    return rotation({std::sin(th) * std::cos(phi0), std::sin(th) * std::sin(phi0), std::cos(th)},
                    2.0 * std::numbers::pi / 5.0);
}

// smallest defect over the two possible azimuthal orientations
double icosahedral_defect(const SpectralField& c) {
    return std::min(invariance_defect(c, icosahedral_rotation(0.0)),
                    invariance_defect(c, icosahedral_rotation(std::numbers::pi / 5.0)));
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

TEST_CASE("radius from the principal degree") {
    CHECK(radius_for_degree(6).squared() == 42.0);
    CHECK(radius_for_degree(10).squared() == 110.0);
    CHECK(radius_for_degree(15).squared() == 240.0);
    CHECK(radius_for_degree(60).squared() == 3660.0);
    CHECK(radius_for_degree(6).value() == doctest::Approx(std::sqrt(42.0)).epsilon(1e-15));
    for (int l = 1; l <= 200; ++l) CHECK(radius_for_degree(l).squared() == static_cast<double>(l * (l + 1)));
    CHECK_THROWS_AS(radius_for_degree(0), std::invalid_argument);
}

TEST_CASE("degree decomposition examples") {
    using V = std::vector<DegreeSplit>;
    CHECK(degree_decomposition(SymmetrySubgroup::icosahedral(), 6) == V{{0, 0, 1}});
    CHECK(degree_decomposition(SymmetrySubgroup::icosahedral(), 7).empty());
    CHECK(degree_decomposition(SymmetrySubgroup::octahedral(), 10) == V{{0, 1, 1}});
    CHECK(degree_decomposition(SymmetrySubgroup::icosahedral(), 0) == V{{0, 0, 0}});
}

TEST_CASE("degree decomposition matches exhaustive enumeration for l <= 40") {
    std::vector<SymmetrySubgroup> groups{SymmetrySubgroup::tetrahedral(), SymmetrySubgroup::octahedral(),
                                         SymmetrySubgroup::icosahedral()};
    for (int n = 1; n <= 8; ++n) groups.push_back(SymmetrySubgroup::cyclic(n));
    for (const auto& g : groups) {
        const auto d = g.generator_degrees();
        const int s_max = g.kind == SymmetrySubgroup::Kind::Z ? 0 : 1;
        for (int l = 0; l <= 40; ++l) {
            std::vector<DegreeSplit> brute;
            for (int s = 0; s <= s_max; ++s)
                for (int p = 0; p <= 40; ++p)
                    for (int q = 0; q <= 40; ++q)
                        if (d[0] * s + d[1] * p + d[2] * q == l) brute.push_back({s, p, q});
            const auto got = degree_decomposition(g, l);
            INFO(g.name() << " l=" << l);
            CHECK(got == brute);
            for (const auto& x : got) CHECK(d[0] * x.s + d[1] * x.p + d[2] * x.q == l);
        }
    }
}

TEST_CASE("subgroup parsing") {
    CHECK(parse_subgroup("I")->kind == SymmetrySubgroup::Kind::I);
    CHECK(parse_subgroup("Z15")->n == 15);
    CHECK(!parse_subgroup("Z0"));
    CHECK(!parse_subgroup("Q"));
    CHECK_THROWS_AS(SymmetrySubgroup::cyclic(0), std::invalid_argument);
}

TEST_CASE("I6 field: support, 11:1 structure and icosahedral symmetry") {
    SingleOperatorOptions raw;
    raw.normalize = false;
    const auto c = single_operator_field(SymmetrySubgroup::icosahedral(), 6, 10, raw);
    for (int l = 0; l <= 10; ++l)
        for (int m = 0; m <= l; ++m) {
            const bool support = l == 6 && (m == 0 || m == 5);
            if (!support) CHECK(c(l, m) == cplx{0.0, 0.0});
            else CHECK(std::abs(c(l, m)) > 0.0);
        }
    // 11 z^6 -> 11 * 6! Re Y_6^0 and z C5 -> -sqrt(2 * 1! * 11!) Re Y_6^5 in
    // Schmidt harmonics; orthonormal amplitudes carry sqrt(4pi/13), times
    // sqrt(2) for m > 0, and Re Y^5 stores half its amplitude
    const double c0 = 11.0 * factorial(6) * std::sqrt(four_pi / 13.0);
    const double c5 = -0.5 * std::sqrt(2.0 * factorial(1) * factorial(11)) * std::sqrt(2.0 * four_pi / 13.0);
    CHECK(c(6, 0).real() == doctest::Approx(c0).epsilon(1e-13));
    CHECK(c(6, 5).real() == doctest::Approx(c5).epsilon(1e-13));
    CHECK(c(6, 5).imag() == 0.0);

    CHECK(icosahedral_defect(c) < 1e-12);
    CHECK(invariance_defect(c, rotation({0, 0, 1}, 2.0 * std::numbers::pi / 5.0)) < 1e-12);
}

TEST_CASE("the literal orthonormal reading breaks the icosahedral symmetry") {
    SingleOperatorOptions lit;
    lit.convention = HarmonicConvention::orthonormal_literal;
    const auto c = single_operator_field(SymmetrySubgroup::icosahedral(), 6, 6, lit);
    CHECK(icosahedral_defect(c) > 1e-3);
}

TEST_CASE("I10 and I15 fields") {
    const auto c10 = single_operator_field(SymmetrySubgroup::icosahedral(), 10, 12);
    for (int m = 0; m <= 10; ++m) {
        if (m % 5 == 0) CHECK(std::abs(c10(10, m)) > 0.0);
        else CHECK(c10(10, m) == cplx{0.0, 0.0});
    }
    CHECK(invariance_defect(c10, rotation({0, 0, 1}, 2.0 * std::numbers::pi / 5.0)) < 1e-10);
    CHECK(icosahedral_defect(c10) < 1e-10);
    CHECK(std::abs(norm_squared(c10) - 1.0) < 1e-13);

    const auto c15 = single_operator_field(SymmetrySubgroup::icosahedral(), 15, 15);
    for (int m = 0; m <= 15; ++m) {
        if (m % 5 == 0 && m > 0) CHECK(std::abs(c15(15, m)) > 0.0);
        else CHECK(c15(15, m) == cplx{0.0, 0.0});
    }
    CHECK(icosahedral_defect(c15) < 1e-10);
}

TEST_CASE("octahedral and tetrahedral operators") {
    const Mat quarter_x = rotation({1, 0, 0}, std::numbers::pi / 2.0);
    const Mat third_diag = rotation({1, 1, 1}, 2.0 * std::numbers::pi / 3.0);
    for (int l : {4, 6, 9}) {
        const auto c = single_operator_field(SymmetrySubgroup::octahedral(), l, l);
        INFO("O" << l);
        CHECK(invariance_defect(c, quarter_x) < 1e-12);
        CHECK(invariance_defect(c, third_diag) < 1e-12);
    }
    for (int l : {3, 4, 6}) {
        const auto c = single_operator_field(SymmetrySubgroup::tetrahedral(), l, l);
        INFO("T" << l);
        CHECK(invariance_defect(c, rotation({0, 0, 1}, std::numbers::pi)) < 1e-12);
        // T3 = xyz is invariant under the 3-fold axis in either orientation of the x, y axes
        const double d = std::min(invariance_defect(c, third_diag), invariance_defect(c, rotation({1, -1, 1}, 2.0 * std::numbers::pi / 3.0)));
        CHECK(d < 1e-12);
    }
}

TEST_CASE("cyclic fields") {
    const auto c = single_operator_field(SymmetrySubgroup::cyclic(15), 15, 20);
    for (int l = 0; l <= 20; ++l)
        for (int m = 0; m <= l; ++m)
            if (!(l == 15 && m == 15)) CHECK(c(l, m) == cplx{0.0, 0.0});
    CHECK(std::abs(c(15, 15)) > 0.0);
    CHECK(invariance_defect(c, rotation({0, 0, 1}, 2.0 * std::numbers::pi / 15.0)) < 1e-10);

    const auto z = single_operator_field(SymmetrySubgroup::cyclic(4), 9, 9);
    CHECK(std::abs(z(9, 4)) > 0.0);
    CHECK(invariance_defect(z, rotation({0, 0, 1}, std::numbers::pi / 2.0)) < 1e-10);

    const auto below = single_operator_field(SymmetrySubgroup::cyclic(7), 5, 5);  // z^5 only
    CHECK(std::abs(below(5, 0)) == doctest::Approx(1.0));
}

TEST_CASE("unsupported requests") {
    CHECK_THROWS_WITH_AS(single_operator_field(SymmetrySubgroup::icosahedral(), 12, 12),
                         doctest::Contains("compositions are not supported"), std::invalid_argument);
    CHECK_THROWS_AS(single_operator_field(SymmetrySubgroup::icosahedral(), 7, 12), std::invalid_argument);
    CHECK_THROWS_AS(single_operator_field(SymmetrySubgroup::icosahedral(), 15, 12), std::invalid_argument);
    CHECK_THROWS_AS(mode_list_field(5, {6}, {cplx{1, 0}}, 8, false), std::invalid_argument);
    CHECK_THROWS_AS(mode_list_field(5, {2}, {cplx{0, 0}}, 8, false), std::invalid_argument);
}

TEST_CASE("L presets") {
    const auto s = preset_l(60, 127);
    CHECK(s.radius.squared() == 3660.0);
    int nonzero = 0;
    for (const auto& v : s.field.data()) nonzero += v != cplx{0.0, 0.0};
    CHECK(nonzero == 1);
    CHECK(s.field(60, 0) == cplx{1.0, 0.0});
    CHECK(preset_l(15, 31).radius.squared() == 240.0);
}

TEST_CASE("S10 preset") {
    const auto a = preset_s10(31, 42), b = preset_s10(31, 42), c = preset_s10(31, 43);
    CHECK(a.field == b.field);
    CHECK(!(a.field == c.field));
    CHECK(a.radius.squared() == 110.0);
    for (int m = 0; m <= 10; ++m) {
        const cplx v = a.field(10, m);
        if (m % 5 == 0) {
            CHECK(v.imag() == 0.0);
            CHECK(v.real() > 0.0);
            CHECK(v.real() <= 1.0);
        } else {
            CHECK(v == cplx{0.0, 0.0});
        }
    }
}

TEST_CASE("S15 preset") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto s = preset_s15(127, seed);
        CHECK(std::abs(norm_squared(s.field) - 1.0) < 1e-13);
        CHECK(s.radius.squared() == 240.0);
        CHECK(s.field(0, 0) == cplx{0.0, 0.0});
        for (int m = 0; m <= 15; ++m) {
            if (m == 5 || m == 10 || m == 15) CHECK(std::abs(s.field(15, m)) > 0.0);
            else CHECK(s.field(15, m) == cplx{0.0, 0.0});
            CHECK(s.field(15, m).real() == 0.0);  // sine family
        }
    }
}

TEST_CASE("initial fields are mass-free and quadratic-energy-free at the principal radius") {
    ModelParams p;
    const std::vector<InitialState> states{preset_s10(20, 1), preset_s15(20, 1), preset_l(15, 20)};
    for (const auto& s : states) {
        CHECK(s.field(0, 0) == cplx{0.0, 0.0});
        p.radius = s.radius;
        CHECK(quadratic_energy(s.field, p) == 0.0);
    }
    const auto f = single_operator_field(SymmetrySubgroup::octahedral(), 9, 12);
    p.radius = radius_for_degree(9);
    CHECK(quadratic_energy(f, p) == 0.0);
}

TEST_CASE("random baselines") {
    const auto a = random_field(15, 5), b = random_field(15, 5);
    CHECK(a == b);
    CHECK(a(0, 0) == cplx{0.0, 0.0});
    CHECK(std::abs(norm_squared(a) - 1.0) < 1e-13);
    for (int l = 0; l <= 15; ++l) CHECK(a(l, 0).imag() == 0.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const double r = random_radius(s).value();
        CHECK(r >= 5.0);
        CHECK(r <= 80.0);
    }
}
