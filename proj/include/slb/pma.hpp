// pma.hpp - principal mode analysis: radius from the dominant degree and
// symmetry-adapted initial fields
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sht.hpp"

namespace slb {

// Subgroups of O(3) with known invariant-generating operators.
struct SymmetrySubgroup {
    enum class Kind { T, O, I, Z };
    Kind kind = Kind::I;
    int n = 1;  // order of the cyclic group (Z only)

    static SymmetrySubgroup tetrahedral() { return {Kind::T, 1}; }
    static SymmetrySubgroup octahedral() { return {Kind::O, 1}; }
    static SymmetrySubgroup icosahedral() { return {Kind::I, 1}; }
    static SymmetrySubgroup cyclic(int n) {
        if (n < 1) throw std::invalid_argument("SymmetrySubgroup: Z_n requires n >= 1");
        return {Kind::Z, n};
    }

    std::string name() const {
        switch (kind) {
            case Kind::T: return "T";
            case Kind::O: return "O";
            case Kind::I: return "I";
            case Kind::Z: return "Z" + std::to_string(n);
        }
        return "?";
    }

    // Degrees of the three generating operators (s, p, q), Z_n: (-, 1, n).
    std::array<int, 3> generator_degrees() const {
        switch (kind) {
            case Kind::T: return {6, 4, 3};
            case Kind::O: return {9, 6, 4};
            case Kind::I: return {15, 10, 6};
            case Kind::Z: return {0, 1, n};
        }
        return {0, 0, 0};
    }
};

inline std::optional<SymmetrySubgroup> parse_subgroup(const std::string& s) {
    if (s == "T") return SymmetrySubgroup::tetrahedral();
    if (s == "O") return SymmetrySubgroup::octahedral();
    if (s == "I") return SymmetrySubgroup::icosahedral();
    if (s.size() > 1 && (s[0] == 'Z' || s[0] == 'z')) {
        try {
            std::size_t pos = 0;
            const int n = std::stoi(s.substr(1), &pos);
            if (pos == s.size() - 1 && n >= 1) return SymmetrySubgroup::cyclic(n);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

// R = sqrt(l0 (l0 + 1)), kept exact as R^2.
inline Radius radius_for_degree(int ell0) {
    if (ell0 < 1) throw std::invalid_argument("radius_for_degree: degree must be >= 1");
    return Radius::from_squared(static_cast<double>(ell0) * (ell0 + 1));
}

struct DegreeSplit {
    int s = 0, p = 0, q = 0;
    bool operator==(const DegreeSplit&) const = default;
};

// All (s, p, q), s in {0,1} (s = 0 for Z_n), with d_s s + d_p p + d_q q = l0.
inline std::vector<DegreeSplit> degree_decomposition(const SymmetrySubgroup& g, int ell0) {
    std::vector<DegreeSplit> out;
    if (ell0 < 0) return out;
    const auto d = g.generator_degrees();
    const int s_max = g.kind == SymmetrySubgroup::Kind::Z ? 0 : 1;
    for (int s = 0; s <= s_max; ++s) {
        const int rest_s = ell0 - s * d[0];
        if (rest_s < 0) continue;
        for (int p = 0; p * d[1] <= rest_s; ++p) {
            const int rest = rest_s - p * d[1];
            if (rest % d[2] == 0) out.push_back({s, p, rest / d[2]});
        }
    }
    return out;
}

// Reading of the harmonic correspondence for operator monomials.
//   schmidt_real       : "Re Y", "Im Y" are Schmidt semi-normalized real
//                        harmonics (the classical Maxwell-Hobson result)
//   orthonormal_literal: the real/imaginary parts of orthonormal Y
enum class HarmonicConvention { schmidt_real, orthonormal_literal };

// One monomial coef * z^(l-m) * C_m or S_m, with C_m = xi^m + eta^m and
// S_m = i (xi^m - eta^m); m = 0 means coef * z^l.
struct OperatorTerm {
    double coef;
    int m;
    bool sine;
};

struct SymmetryOperator {
    std::string name;
    int degree;
    std::vector<OperatorTerm> terms;
};

// The single generating operators of T, O and I.
inline std::optional<SymmetryOperator> generating_operator(SymmetrySubgroup::Kind kind, int degree) {
    using K = SymmetrySubgroup::Kind;
    switch (kind) {
        case K::T:
            if (degree == 3) return SymmetryOperator{"T3", 3, {{0.25, 2, true}}};
            if (degree == 4) return SymmetryOperator{"T4", 4, {{14.0 / 4.0, 0, false}, {0.25, 4, false}}};
            if (degree == 6) return SymmetryOperator{"T6", 6, {{1.0 / 32.0, 6, false}, {-33.0 / 32.0, 2, false}}};
            break;
        case K::O:
            if (degree == 4) return SymmetryOperator{"O4", 4, {{14.0, 0, false}, {1.0, 4, false}}};
            if (degree == 6) return SymmetryOperator{"O6", 6, {{1.0, 4, false}, {-2.0, 0, false}}};
            if (degree == 9) return SymmetryOperator{"O9", 9, {{1.0, 8, true}, {-34.0, 4, true}}};
            break;
        case K::I:
            if (degree == 6) return SymmetryOperator{"I6", 6, {{11.0, 0, false}, {1.0, 5, false}}};
            if (degree == 10)
                return SymmetryOperator{"I10", 10, {{494.0, 0, false}, {-228.0, 5, false}, {1.0, 10, false}}};
            if (degree == 15)
                return SymmetryOperator{"I15", 15, {{-10005.0, 5, true}, {522.0, 10, true}, {1.0, 15, true}}};
            break;
        case K::Z: break;
    }
    return std::nullopt;
}

// Adds amp * Re Y_l^m (sine = false) or amp * Im Y_l^{-m} (sine = true), with
// Y orthonormal, to the stored coefficients.
inline void add_real_harmonic(SpectralField& c, int l, int m, double amp, bool sine) {
    if (m == 0) {
        if (sine) return;  // Im Y_l^0 = 0
        c(l, 0) += amp;
        return;
    }
    if (!sine) {
        c(l, m) += amp / 2.0;
    } else {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        c(l, m) += cplx{0.0, sign * amp / 2.0};
    }
}

// Adds the harmonic image of one monomial of degree l.
inline void add_operator_term(SpectralField& c, int l, const OperatorTerm& t, HarmonicConvention conv) {
    const int m = t.m;
    if (m > l) throw std::invalid_argument("operator term order exceeds degree");
    const double parity = ((l - m) % 2 == 0) ? 1.0 : -1.0;
    double amp;
    double to_orthonormal = 1.0;
    if (m == 0) {
        amp = t.coef * parity * std::exp(std::lgamma(l + 1.0));
        if (conv == HarmonicConvention::schmidt_real) to_orthonormal = std::sqrt(four_pi / (2.0 * l + 1.0));
    } else {
        amp = t.coef * parity * std::sqrt(2.0) * std::exp(0.5 * (std::lgamma(l - m + 1.0) + std::lgamma(l + m + 1.0)));
        if (conv == HarmonicConvention::schmidt_real) to_orthonormal = std::sqrt(2.0 * four_pi / (2.0 * l + 1.0));
    }
    add_real_harmonic(c, l, m, amp * to_orthonormal, t.sine);
}

inline void normalize_unit(SpectralField& c) {
    const double n2 = norm_squared(c);
    if (!(n2 > 0.0)) throw std::invalid_argument("normalize: zero field");
    c *= 1.0 / std::sqrt(n2);
}

struct SingleOperatorOptions {
    HarmonicConvention convention = HarmonicConvention::schmidt_real;
    bool normalize = true;
    bool cyclic_sine = false;  // Z_n: use S_n instead of C_n
};

// Degree-l0 field generated by a single symmetry operator. For T, O and I the
// degree must be one generator degree; for Z_n the monomial z^p C_{qn} with
// q = 1 when l0 >= n (q = 0 otherwise).
inline SpectralField single_operator_field(const SymmetrySubgroup& g, int ell0, int bandlimit,
                                           const SingleOperatorOptions& opt = {}) {
    if (ell0 < 1) throw std::invalid_argument("single_operator_field: degree must be >= 1");
    if (ell0 > bandlimit)
        throw std::invalid_argument("single_operator_field: degree " + std::to_string(ell0) + " exceeds bandlimit " +
                                    std::to_string(bandlimit));
    SpectralField c(bandlimit);
    if (g.kind == SymmetrySubgroup::Kind::Z) {
        const int q = ell0 >= g.n ? 1 : 0;
        const int m = q * g.n;
        add_operator_term(c, ell0, {1.0, m, m > 0 && opt.cyclic_sine}, opt.convention);
    } else {
        const auto splits = degree_decomposition(g, ell0);
        if (splits.empty())
            throw std::invalid_argument("single_operator_field: no " + g.name() + "-invariant of degree " +
                                        std::to_string(ell0));
        const DegreeSplit* single = nullptr;
        for (const auto& s : splits)
            if (s.s + s.p + s.q == 1) single = &s;
        if (!single)
            throw std::invalid_argument("single_operator_field: degree " + std::to_string(ell0) + " needs a product of " +
                                        g.name() + " operators; compositions are not supported");
        const auto op = generating_operator(g.kind, ell0);
        if (!op) throw std::logic_error("single_operator_field: missing operator table entry");
        for (const auto& t : op->terms) add_operator_term(c, ell0, t, opt.convention);
    }
    if (opt.normalize) normalize_unit(c);
    return c;
}

// Explicit m-list construction: sum_k a_k Y_l^{m_k}, negative orders stored
// through the realness rule.
inline SpectralField mode_list_field(int ell0, const std::vector<int>& orders, const std::vector<cplx>& amplitudes,
                                     int bandlimit, bool normalize) {
    if (orders.size() != amplitudes.size())
        throw std::invalid_argument("mode_list_field: orders and amplitudes differ in length");
    if (ell0 < 1 || ell0 > bandlimit) throw std::invalid_argument("mode_list_field: degree outside [1, bandlimit]");
    SpectralField c(bandlimit);
    for (std::size_t k = 0; k < orders.size(); ++k) {
        if (std::abs(orders[k]) > ell0) throw std::invalid_argument("mode_list_field: |m| exceeds degree");
        if (amplitudes[k] == cplx{}) throw std::invalid_argument("mode_list_field: amplitudes must be nonzero");
        c.set(ell0, orders[k], c.get(ell0, orders[k]) + amplitudes[k]);
    }
    if (normalize) normalize_unit(c);
    return c;
}

// Uniform draw on (0, 1].
inline double uniform_open_closed(std::mt19937_64& rng) {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

struct InitialState {
    SpectralField field;
    Radius radius;
    std::string label;
};

// S10: real amplitudes in (0,1] on Y_10^0, Y_10^5, Y_10^10, R = sqrt(110).
inline InitialState preset_s10(int bandlimit, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<cplx> a;
    for (int k = 0; k < 3; ++k) a.emplace_back(uniform_open_closed(rng), 0.0);
    return {mode_list_field(10, {0, 5, 10}, a, bandlimit, false), radius_for_degree(10), "S10"};
}

// S15: amplitudes i*a_k, a_k in (0,1], on Y_15^{-15}, Y_15^{-10}, Y_15^{-5}
// (the sine family of the degree-15 icosahedral invariant), unit norm,
// R = sqrt(240).
inline InitialState preset_s15(int bandlimit, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<cplx> a;
    for (int k = 0; k < 3; ++k) a.emplace_back(0.0, uniform_open_closed(rng));
    return {mode_list_field(15, {-15, -10, -5}, a, bandlimit, true), radius_for_degree(15), "S15"};
}

// L(l): Y_l^0 with unit coefficient, R = sqrt(l(l+1)).
inline InitialState preset_l(int ell, int bandlimit) {
    return {mode_list_field(ell, {0}, {cplx{1.0, 0.0}}, bandlimit, false), radius_for_degree(ell),
            "L" + std::to_string(ell)};
}

// Uniform(-1,1) draws on every stored real and imaginary part (imaginary part
// of m = 0 excluded), mass-projected and normalized to unit norm.
inline SpectralField random_field(int bandlimit, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpectralField c(bandlimit);
    for (int m = 0; m <= bandlimit; ++m) {
        for (int l = m; l <= bandlimit; ++l) {
            const double re = u(rng);
            const double im = m == 0 ? 0.0 : u(rng);
            c(l, m) = cplx{re, im};
        }
    }
    c(0, 0) = cplx{0.0, 0.0};
    normalize_unit(c);
    return c;
}

// Uniform radius on [lo, hi].
inline Radius random_radius(std::uint64_t seed, double lo = 5.0, double hi = 80.0) {
    std::mt19937_64 rng(seed);
    return Radius::from_value(std::uniform_real_distribution<double>(lo, hi)(rng));
}

}  // namespace slb
