#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <slb/model.hpp>
#include <slb/wigner.hpp>

#include "support.hpp"

using namespace slb;
using slb::testing::random_coefficients;

TEST_CASE("3-j symbols: tabulated values") {
    // (1 1 0; 0 0 0) = -1/sqrt(3), (1 1 2; 0 0 0) = sqrt(2/15)
    CHECK(wigner3j(1, 1, 0, 0, 0, 0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(wigner3j(1, 1, 2, 0, 0, 0) == doctest::Approx(std::sqrt(2.0 / 15.0)).epsilon(1e-14));
    // (2 2 2; 0 0 0) = -sqrt(2/35)
    CHECK(wigner3j(2, 2, 2, 0, 0, 0) == doctest::Approx(-std::sqrt(2.0 / 35.0)).epsilon(1e-14));
    // (1 1 1; 1 -1 0) = 1/sqrt(6)
    CHECK(wigner3j(1, 1, 1, 1, -1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("3-j selection rules") {
    CHECK(wigner3j(1, 1, 1, 0, 0, 0) == 0.0);  // odd sum with zero orders
    CHECK(wigner3j(1, 1, 3, 0, 0, 0) == 0.0);  // triangle
    CHECK(wigner3j(2, 2, 2, 1, 1, 1) == 0.0);  // order sum
    CHECK_THROWS_AS(wigner3j(1, 1, 1, 2, -2, 0), std::invalid_argument);
}

TEST_CASE("3-j orthogonality over orders") {
    // sum_{m1,m2} (l1 l2 L; m1 m2 M)(l1 l2 L'; m1 m2 M) = delta_{LL'} / (2L+1)
    const int l1 = 3, l2 = 4, M = 1;
    for (int L = 1; L <= 7; ++L)
        for (int Lp = 1; Lp <= 7; ++Lp) {
            if (std::abs(M) > L || std::abs(M) > Lp) continue;
            double s = 0.0;
            for (int m1 = -l1; m1 <= l1; ++m1) {
                const int m2 = -M - m1;
                if (std::abs(m2) > l2) continue;
                s += wigner3j(l1, l2, L, m1, m2, M) * wigner3j(l1, l2, Lp, m1, m2, M);
            }
            const double expected = (L == Lp && L >= 1 && L <= 7) ? 1.0 / (2 * L + 1) : 0.0;
            CHECK(std::abs(s - expected) < 1e-13);
        }
}

TEST_CASE("triple products match quadrature for all degrees up to 5") {
    const int n = 5;
    const QuadratureGrid grid(3 * n + 2, 4 * n + 4);
    const int nt = grid.n_theta, np = grid.n_phi;
    const double dphi = 2.0 * std::numbers::pi / np;
    // complex Y_l^m samples
    std::vector<std::vector<cplx>> y;
    std::vector<std::pair<int, int>> idx;
    for (int l = 0; l <= n; ++l)
        for (int m = -l; m <= l; ++m) {
            std::vector<cplx> s(static_cast<std::size_t>(nt) * np);
            for (int j = 0; j < nt; ++j) {
                const auto p = legendre_values(n, grid.nodes[j]);
                const int am = std::abs(m);
                double pl = p[SpectralField::m_offset(n, am) + (l - am)];
                if (m < 0 && am % 2 == 1) pl = -pl;
                for (int k = 0; k < np; ++k) s[static_cast<std::size_t>(j) * np + k] = pl * std::polar(1.0, m * grid.phis[k]);
            }
            y.push_back(std::move(s));
            idx.emplace_back(l, m);
        }
    double worst = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a; b < idx.size(); ++b)
            for (std::size_t c = b; c < idx.size(); ++c) {
                const auto [l1, m1] = idx[a];
                const auto [l2, m2] = idx[b];
                const auto [l3, m3] = idx[c];
                cplx q{0.0, 0.0};
                for (int j = 0; j < nt; ++j) {
                    cplx ring{0.0, 0.0};
                    for (int k = 0; k < np; ++k) {
                        const std::size_t i = static_cast<std::size_t>(j) * np + k;
                        ring += y[a][i] * y[b][i] * y[c][i];
                    }
                    q += grid.weights[j] * dphi * ring;
                }
                const double t = triple_coeff(l1, l2, l3, m1, m2, m3);
                worst = std::max(worst, std::abs(q - cplx{t, 0.0}));
            }
    CHECK(worst < 1e-11);
}

TEST_CASE("direct bulk energy equals the pseudo-spectral evaluation") {
    for (int n : {4, 6, 8}) {
        const SHTPlan plan(n);
        for (int s = 0; s < 10; ++s) {
            const auto c = random_coefficients(n, 900 + 10 * n + s, 0.5);
            for (double lambda : {0.0, 0.8}) {
                ModelParams p{1.0, -0.9, lambda, Radius::from_squared(30.0)};
                const double spectral = energy(c, p, plan).f;
                const double direct = direct_nonlinear_energy(c, p);
                INFO("N = " << n << ", seed " << s << ", lambda " << lambda);
                CHECK(std::abs(spectral - direct) <= 1e-10 * std::abs(spectral));
            }
        }
    }
}

TEST_CASE("direct evaluation is guarded to small bandlimits") {
    SpectralField big(direct_energy_max_bandlimit + 1);
    CHECK_THROWS_AS(direct_bulk_terms(big), std::invalid_argument);
}
