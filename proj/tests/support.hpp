// support.hpp - helpers shared by the unit suites
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <slb/sht.hpp>

namespace slb::testing {

// Coefficients uniform in [-scale, scale] (real and imaginary parts), with
// real m = 0 entries as the realness rule requires.
inline SpectralField random_coefficients(int n, std::uint64_t seed, double scale = 1.0, bool zero_mean = true) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    SpectralField c(n);
    for (int l = 0; l <= n; ++l)
        for (int m = 0; m <= l; ++m) c(l, m) = cplx{u(rng), m == 0 ? 0.0 : u(rng)};
    if (zero_mean) c(0, 0) = cplx{0.0, 0.0};
    return c;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) e = std::max(e, std::abs(a.data()[i] - b.data()[i]));
    return e;
}

}  // namespace slb::testing
