// wigner.hpp - Wigner 3-j symbols, Gaunt triple products and a direct
// coefficient-space evaluation of the bulk energy (small bandlimits only)
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "sht.hpp"

namespace slb {

namespace detail {

inline long double log_fact(int n) { return std::lgammal(static_cast<long double>(n) + 1.0L); }

inline void check_orders(int l, int m) {
    if (l < 0 || std::abs(m) > l)
        throw std::invalid_argument("wigner: invalid (l, m) = (" + std::to_string(l) + ", " + std::to_string(m) + ")");
}

}  // namespace detail

inline bool triangle_ok(int l1, int l2, int l3) { return l3 >= std::abs(l1 - l2) && l3 <= l1 + l2; }

// Wigner 3-j symbol (l1 l2 l3; m1 m2 m3) by the Racah sum in log-factorial form.
inline double wigner3j(int l1, int l2, int l3, int m1, int m2, int m3) {
    detail::check_orders(l1, m1);
    detail::check_orders(l2, m2);
    detail::check_orders(l3, m3);
    if (m1 + m2 + m3 != 0 || !triangle_ok(l1, l2, l3)) return 0.0;
    if (m1 == 0 && m2 == 0 && m3 == 0 && (l1 + l2 + l3) % 2 != 0) return 0.0;

    using detail::log_fact;
    const long double log_pre =
        0.5L * (log_fact(l1 + l2 - l3) + log_fact(l1 - l2 + l3) + log_fact(-l1 + l2 + l3) - log_fact(l1 + l2 + l3 + 1) +
                log_fact(l1 + m1) + log_fact(l1 - m1) + log_fact(l2 + m2) + log_fact(l2 - m2) + log_fact(l3 + m3) +
                log_fact(l3 - m3));
    const int kmin = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
    const int kmax = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});
    long double sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        const long double lt = log_pre - (log_fact(k) + log_fact(l3 - l2 + k + m1) + log_fact(l3 - l1 + k - m2) +
                                          log_fact(l1 + l2 - l3 - k) + log_fact(l1 - k - m1) + log_fact(l2 - k + m2));
        const long double term = std::exp(lt);
        sum += (k % 2 == 0) ? term : -term;
    }
    const int phase = l1 - l2 - m3;
    return static_cast<double>(((phase % 2) == 0) ? sum : -sum);
}

// C = integral over the unit sphere of Y_{l1}^{m1} Y_{l2}^{m2} Y_{l3}^{m3}
// (no conjugation), nonzero only when m1 + m2 + m3 = 0, l1 + l2 + l3 is even
// and the triangle inequality holds.
inline double triple_coeff(int l1, int l2, int l3, int m1, int m2, int m3) {
    if (m1 + m2 + m3 != 0 || (l1 + l2 + l3) % 2 != 0 || !triangle_ok(l1, l2, l3)) {
        detail::check_orders(l1, m1);
        detail::check_orders(l2, m2);
        detail::check_orders(l3, m3);
        return 0.0;
    }
    const double pre = std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0) * (2.0 * l3 + 1.0) / four_pi);
    return pre * wigner3j(l1, l2, l3, 0, 0, 0) * wigner3j(l1, l2, l3, m1, m2, m3);
}

inline constexpr int direct_energy_max_bandlimit = 8;

struct DirectBulkTerms {
    double quadratic = 0.0;  // integral of phi^2
    double cubic = 0.0;      // integral of phi^3
    double quartic = 0.0;    // integral of phi^4
};

// Integrals of phi^2, phi^3 and phi^4 from the coefficients alone, using
// triple products. The quartic term expands phi^2 = sum_{L,M} P_{LM} Y_L^M with
// P_{LM} = sum c1 c2 <Y1 Y2, Y_L^M> = sum c1 c2 (-1)^M C(l1 l2 L; m1 m2 -M)
// and sums |P_{LM}|^2.
inline DirectBulkTerms direct_bulk_terms(const SpectralField& c) {
    const int n = c.bandlimit();
    if (n > direct_energy_max_bandlimit)
        throw std::invalid_argument("direct_nonlinear_energy: bandlimit " + std::to_string(n) + " exceeds guard " +
                                    std::to_string(direct_energy_max_bandlimit));
    struct Mode {
        int l, m;
        cplx v;
    };
    std::vector<Mode> modes;
    for (int l = 0; l <= n; ++l)
        for (int m = -l; m <= l; ++m) modes.push_back({l, m, c.get(l, m)});

    DirectBulkTerms t;
    for (const auto& a : modes) t.quadratic += std::norm(a.v);

    // cubic: sum over (1,2); the third order is fixed by the m-sum rule
    cplx cubic{0.0, 0.0};
    for (const auto& a : modes) {
        for (const auto& b : modes) {
            const int m3 = -a.m - b.m;
            const int lo = std::max(std::abs(a.l - b.l), std::abs(m3));
            const int hi = std::min(a.l + b.l, n);
            for (int l3 = lo; l3 <= hi; ++l3) {
                if ((a.l + b.l + l3) % 2 != 0) continue;
                cubic += a.v * b.v * c.get(l3, m3) * triple_coeff(a.l, b.l, l3, a.m, b.m, m3);
            }
        }
    }
    t.cubic = cubic.real();

    // quartic via the degree <= 2N expansion of phi^2
    const int n2 = 2 * n;
    std::vector<cplx> p(static_cast<std::size_t>(n2 + 1) * (2 * n2 + 1), cplx{0.0, 0.0});
    auto at = [&](int l, int m) -> cplx& { return p[static_cast<std::size_t>(l) * (2 * n2 + 1) + (m + n2)]; };
    for (const auto& a : modes) {
        for (const auto& b : modes) {
            const int mm = a.m + b.m;
            const int lo = std::max(std::abs(a.l - b.l), std::abs(mm));
            for (int l = lo; l <= a.l + b.l; ++l) {
                if ((a.l + b.l + l) % 2 != 0) continue;
                const double sign = (mm % 2 == 0) ? 1.0 : -1.0;
                at(l, mm) += a.v * b.v * sign * triple_coeff(a.l, b.l, l, a.m, b.m, -mm);
            }
        }
    }
    for (const auto& v : p) t.quartic += std::norm(v);
    return t;
}

// Bulk energy (eps/2) int phi^2 - (lambda/6) int phi^3 + (1/24) int phi^4,
// scaled like model::energy.
inline double direct_nonlinear_energy(const SpectralField& c, const ModelParams& p,
                                      EnergyScale scale = EnergyScale::mode_zero) {
    const auto t = direct_bulk_terms(c);
    const double f = 0.5 * p.epsilon * t.quadratic - p.lambda / 6.0 * t.cubic + t.quartic / 24.0;
    return f * energy_scale_factor(scale);
}

}  // namespace slb
