// sht.hpp - band-limited spherical harmonic transforms on Gauss-Legendre grids
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace slb {

using cplx = std::complex<double>;

inline constexpr double four_pi = 4.0 * std::numbers::pi;

// Latitude part of the quadrature grid. Nodes are cos(theta) in strictly
// decreasing order (north pole first).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: node count must be >= 1");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // final derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) { p1 = x; p0 = 1.0; }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = x;
        gl.nodes[n - 1 - i] = -x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
    return gl;
}

struct QuadratureGrid {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> nodes;    // cos(theta_j), decreasing
    std::vector<double> weights;  // sum to 2
    std::vector<double> phis;     // 2 pi k / n_phi

    QuadratureGrid() = default;
    QuadratureGrid(int nt, int np) : n_theta(nt), n_phi(np) {
        if (nt < 1) throw std::invalid_argument("QuadratureGrid: n_theta must be >= 1");
        if (np < 2 || np % 2 != 0) throw std::invalid_argument("QuadratureGrid: n_phi must be even and >= 2");
        auto gl = gauss_legendre(nt);
        nodes = std::move(gl.nodes);
        weights = std::move(gl.weights);
        phis.resize(np);
        for (int k = 0; k < np; ++k) phis[k] = 2.0 * std::numbers::pi * k / np;
    }

    double theta(int j) const { return std::acos(nodes[j]); }
};

// Quartic products of degree-N fields are projected exactly on this grid.
inline bool has_exact_quartic_capacity(int bandlimit, int n_theta, int n_phi) {
    return 2 * n_theta - 1 >= 4 * bandlimit && n_phi >= 4 * bandlimit + 1;
}

// Sphere radius. Keeps R^2 as the primary quantity so that radii built from
// a degree, R^2 = l(l+1), are exact.
class Radius {
public:
    Radius() = default;
    static Radius from_value(double r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("Radius: must be positive and finite");
        return Radius(r * r);
    }
    static Radius from_squared(double r2) {
        if (!(r2 > 0.0) || !std::isfinite(r2)) throw std::invalid_argument("Radius: R^2 must be positive and finite");
        return Radius(r2);
    }
    double squared() const { return r2_; }
    double value() const { return std::sqrt(r2_); }

private:
    explicit Radius(double r2) : r2_(r2) {}
    double r2_ = 1.0;
};

// Eigenvalue of the sphere Laplacian on degree-l harmonics.
inline double laplacian_eigenvalue(int l, Radius radius) {
    return -static_cast<double>(l) * (l + 1) / radius.squared();
}

// Coefficients {phi_lm} of a real field for 0 <= m <= l <= N; negative orders
// follow phi_{l,-m} = (-1)^m conj(phi_{l,m}). Storage is m-major.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(int bandlimit)
        : bandlimit_(bandlimit), coeffs_(size_for(bandlimit), cplx{0.0, 0.0}) {
        if (bandlimit < 0) throw std::invalid_argument("SpectralField: negative bandlimit");
    }

    static std::size_t size_for(int n) { return static_cast<std::size_t>(n + 1) * (n + 2) / 2; }

    // offset of (m, l=m) in m-major storage
    static std::size_t m_offset(int n, int m) {
        return static_cast<std::size_t>(m) * (n + 1) - static_cast<std::size_t>(m) * (m - 1) / 2;
    }
    std::size_t index(int l, int m) const { return m_offset(bandlimit_, m) + (l - m); }

    int bandlimit() const { return bandlimit_; }
    std::size_t size() const { return coeffs_.size(); }

    cplx& operator()(int l, int m) { return coeffs_[index(l, m)]; }
    const cplx& operator()(int l, int m) const { return coeffs_[index(l, m)]; }

    // Coefficient for any order, negative m reconstructed from realness.
    cplx get(int l, int m) const {
        check(l, m);
        if (m >= 0) return coeffs_[index(l, m)];
        const cplx c = std::conj(coeffs_[index(l, -m)]);
        return (m % 2 == 0) ? c : -c;
    }
    // Stores the value for (l, m); for negative m stores the implied positive-m entry.
    void set(int l, int m, cplx value) {
        check(l, m);
        if (m >= 0) {
            coeffs_[index(l, m)] = value;
        } else {
            const cplx c = std::conj(value);
            coeffs_[index(l, -m)] = ((-m) % 2 == 0) ? c : -c;
        }
    }

    std::span<cplx> data() { return coeffs_; }
    std::span<const cplx> data() const { return coeffs_; }

    SpectralField& operator+=(const SpectralField& o) {
        same_shape(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        same_shape(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    // this += s * o
    SpectralField& axpy(double s, const SpectralField& o) {
        same_shape(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    bool operator==(const SpectralField&) const = default;

private:
    void check(int l, int m) const {
        if (l < 0 || l > bandlimit_ || std::abs(m) > l)
            throw std::out_of_range("SpectralField: (l,m) outside band (l=" + std::to_string(l) +
                                    ", m=" + std::to_string(m) + ")");
    }
    void same_shape(const SpectralField& o) const {
        if (o.bandlimit_ != bandlimit_) throw std::invalid_argument("SpectralField: bandlimit mismatch");
    }

    int bandlimit_ = 0;
    std::vector<cplx> coeffs_{cplx{0.0, 0.0}};
};

// Real inner product over the full (l, m) range, |m| <= l.
inline double inner(const SpectralField& a, const SpectralField& b) {
    if (a.bandlimit() != b.bandlimit()) throw std::invalid_argument("inner: bandlimit mismatch");
    const int n = a.bandlimit();
    const auto da = a.data();
    const auto db = b.data();
    double m0 = 0.0, rest = 0.0;
    const std::size_t split = SpectralField::m_offset(n, 1);
    for (std::size_t i = 0; i < split; ++i) m0 += da[i].real() * db[i].real() + da[i].imag() * db[i].imag();
    for (std::size_t i = split; i < da.size(); ++i) rest += da[i].real() * db[i].real() + da[i].imag() * db[i].imag();
    return m0 + 2.0 * rest;
}

inline double norm_squared(const SpectralField& a) { return inner(a, a); }

// Max coefficient magnitude; NaN if any coefficient is NaN.
inline double sup_norm(const SpectralField& a) {
    double s = 0.0;
    for (const auto& c : a.data()) {
        const double v = std::abs(c);
        if (std::isnan(v)) return v;
        s = std::max(s, v);
    }
    return s;
}

struct Norms {
    double l2;
    double sup;
};

inline Norms norms(const SpectralField& c) { return {std::sqrt(norm_squared(c)), sup_norm(c)}; }

// Real samples on the n_theta x n_phi grid, row-major by latitude ring.
struct GridField {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> values;

    GridField() = default;
    GridField(int nt, int np) : n_theta(nt), n_phi(np), values(static_cast<std::size_t>(nt) * np, 0.0) {}

    double& operator()(int j, int k) { return values[static_cast<std::size_t>(j) * n_phi + k]; }
    double operator()(int j, int k) const { return values[static_cast<std::size_t>(j) * n_phi + k]; }
};

// Fully normalized associated Legendre values Pbar_l^m(x) (Condon-Shortley
// phase, Y_l^m = Pbar_l^m(cos theta) e^{i m phi}) for 0 <= m <= l <= n,
// stored m-major like SpectralField.
inline std::vector<double> legendre_values(int n, double x) {
    std::vector<double> out(SpectralField::size_for(n), 0.0);
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double pmm = 1.0 / std::sqrt(four_pi);
    for (int m = 0; m <= n; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        if (std::abs(pmm) < 1e-280) pmm = 0.0;
        const std::size_t off = SpectralField::m_offset(n, m);
        out[off] = pmm;
        if (m == n) break;
        double p_lm2 = pmm;
        double p_lm1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
        out[off + 1] = p_lm1;
        for (int l = m + 2; l <= n; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
            const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                                       (4.0 * (l - 1) * (l - 1) - 1.0));
            const double p = a * (x * p_lm1 - b * p_lm2);
            out[off + (l - m)] = p;
            p_lm2 = p_lm1;
            p_lm1 = p;
        }
    }
    return out;
}

// Complex point evaluation sum_{l,|m|<=l} c_lm Y_l^m(theta, phi). Used for
// checks at arbitrary points; the transforms below are the production path.
inline cplx evaluate_at(const SpectralField& c, double theta, double phi) {
    const int n = c.bandlimit();
    const auto p = legendre_values(n, std::cos(theta));
    cplx acc{0.0, 0.0};
    for (int l = 0; l <= n; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            double pl = p[SpectralField::m_offset(n, am) + (l - am)];
            if (m < 0 && am % 2 == 1) pl = -pl;  // Y_l^{-m} = (-1)^m conj(Y_l^m)
            acc += c.get(l, m) * pl * std::polar(1.0, m * phi);
        }
    }
    return acc;
}

namespace detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using fftw_buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
fftw_buffer<T> fftw_alloc(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (!p) throw std::bad_alloc();
    return fftw_buffer<T>(p);
}

// Per-thread scratch for the ring FFTs, reused across calls of equal shape.
struct RingScratch {
    int n_theta = -1, n_phi = -1;
    fftw_buffer<double> real;
    fftw_buffer<fftw_complex> spec;

    void ensure(int nt, int np) {
        if (nt == n_theta && np == n_phi) return;
        real = fftw_alloc<double>(static_cast<std::size_t>(nt) * np);
        spec = fftw_alloc<fftw_complex>(static_cast<std::size_t>(nt) * (np / 2 + 1));
        n_theta = nt;
        n_phi = np;
    }
};

inline RingScratch& ring_scratch() {
    thread_local RingScratch s;
    return s;
}

}  // namespace detail

// Transform plan: grid, Legendre tables and FFT plans for a fixed bandlimit.
// Immutable after construction; analyze/synthesize are const and reentrant
// (scratch is per thread) and use a fixed summation order.
class SHTPlan {
public:
    SHTPlan(int bandlimit, int n_theta, int n_phi) : bandlimit_(bandlimit), grid_(n_theta, n_phi) {
        if (bandlimit < 0) throw std::invalid_argument("SHTPlan: negative bandlimit");
        if (!has_exact_quartic_capacity(bandlimit, n_theta, n_phi))
            throw std::invalid_argument("SHTPlan: grid " + std::to_string(n_theta) + "x" + std::to_string(n_phi) +
                                        " cannot integrate quartic products at bandlimit " +
                                        std::to_string(bandlimit) + " (need 2*n_theta-1 >= 4N and n_phi >= 4N+1)");
        build_tables();
        build_fft();
    }
    // default grid: the smallest exact grid with FFT-friendly longitude count
    explicit SHTPlan(int bandlimit) : SHTPlan(bandlimit, default_n_theta(bandlimit), default_n_phi(bandlimit)) {}

    static int default_n_theta(int n) { return std::max(2, (4 * n + 2) / 2); }
    static int default_n_phi(int n) {
        int p = 2;
        while (p < 4 * n + 1) p *= 2;
        return p;
    }

    SHTPlan(const SHTPlan&) = delete;
    SHTPlan& operator=(const SHTPlan&) = delete;
    ~SHTPlan() {
        if (forward_) fftw_destroy_plan(forward_);
        if (backward_) fftw_destroy_plan(backward_);
    }

    int bandlimit() const { return bandlimit_; }
    const QuadratureGrid& grid() const { return grid_; }
    int n_theta() const { return grid_.n_theta; }
    int n_phi() const { return grid_.n_phi; }

    // Pbar_l^m(x_j) for a northern (or equatorial) node j < half_rings().
    double legendre(int l, int m, int j) const {
        return table_[SpectralField::m_offset(bandlimit_, m) * half_ + static_cast<std::size_t>(l - m) * half_ + j];
    }
    int half_rings() const { return half_; }

    // Quadrature of a grid field over the unit sphere, i.e. sum w_j dphi f_jk.
    double integrate(const GridField& f) const {
        check_grid(f);
        const double dphi = 2.0 * std::numbers::pi / grid_.n_phi;
        double total = 0.0;
        for (int j = 0; j < grid_.n_theta; ++j) {
            double ring = 0.0;
            for (int k = 0; k < grid_.n_phi; ++k) ring += f(j, k);
            total += grid_.weights[j] * ring;
        }
        return total * dphi;
    }

    GridField synthesize(const SpectralField& c) const {
        GridField f(grid_.n_theta, grid_.n_phi);
        synthesize_into(c, f);
        return f;
    }

    void synthesize_into(const SpectralField& c, GridField& f) const {
        if (c.bandlimit() > bandlimit_)
            throw std::invalid_argument("synthesize: coefficient bandlimit " + std::to_string(c.bandlimit()) +
                                        " exceeds plan bandlimit " + std::to_string(bandlimit_));
        if (f.n_theta != grid_.n_theta || f.n_phi != grid_.n_phi) f = GridField(grid_.n_theta, grid_.n_phi);
        const int nt = grid_.n_theta, np = grid_.n_phi, nspec = np / 2 + 1;
        auto& scratch = detail::ring_scratch();
        scratch.ensure(nt, np);
        fftw_complex* spec = scratch.spec.get();
        std::fill_n(&spec[0][0], 2 * static_cast<std::size_t>(nt) * nspec, 0.0);

        const int nc = c.bandlimit();
        std::vector<cplx> even(half_), odd(half_);
        for (int m = 0; m <= nc; ++m) {
            std::fill(even.begin(), even.end(), cplx{});
            std::fill(odd.begin(), odd.end(), cplx{});
            const double* tab = &table_[SpectralField::m_offset(bandlimit_, m) * half_];
            for (int l = m; l <= nc; ++l) {
                const cplx a = c(l, m);
                if (a == cplx{}) continue;
                const double* p = tab + static_cast<std::size_t>(l - m) * half_;
                auto& acc = ((l - m) % 2 == 0) ? even : odd;
                const double ar = a.real(), ai = a.imag();
                for (int j = 0; j < half_; ++j) acc[j] += cplx{ar * p[j], ai * p[j]};
            }
            for (int j = 0; j < half_; ++j) {
                const cplx north = even[j] + odd[j];
                spec[static_cast<std::size_t>(j) * nspec + m][0] = north.real();
                spec[static_cast<std::size_t>(j) * nspec + m][1] = north.imag();
                const int js = nt - 1 - j;
                if (js != j) {
                    const cplx south = even[j] - odd[j];
                    spec[static_cast<std::size_t>(js) * nspec + m][0] = south.real();
                    spec[static_cast<std::size_t>(js) * nspec + m][1] = south.imag();
                }
            }
        }
        fftw_execute_dft_c2r(backward_, spec, scratch.real.get());
        std::copy_n(scratch.real.get(), static_cast<std::size_t>(nt) * np, f.values.begin());
    }

    SpectralField analyze(const GridField& f) const {
        check_grid(f);
        const int nt = grid_.n_theta, np = grid_.n_phi, nspec = np / 2 + 1;
        auto& scratch = detail::ring_scratch();
        scratch.ensure(nt, np);
        std::copy(f.values.begin(), f.values.end(), scratch.real.get());
        fftw_execute_dft_r2c(forward_, scratch.real.get(), scratch.spec.get());
        const fftw_complex* spec = scratch.spec.get();

        SpectralField c(bandlimit_);
        const double dphi = 2.0 * std::numbers::pi / np;
        std::vector<cplx> sym(half_), anti(half_);
        for (int m = 0; m <= bandlimit_; ++m) {
            for (int j = 0; j < half_; ++j) {
                const int js = nt - 1 - j;
                const double w = grid_.weights[j] * dphi;
                const cplx xn{spec[static_cast<std::size_t>(j) * nspec + m][0],
                              spec[static_cast<std::size_t>(j) * nspec + m][1]};
                if (js == j) {
                    sym[j] = w * xn;
                    anti[j] = cplx{};
                } else {
                    const cplx xs{spec[static_cast<std::size_t>(js) * nspec + m][0],
                                  spec[static_cast<std::size_t>(js) * nspec + m][1]};
                    sym[j] = w * (xn + xs);
                    anti[j] = w * (xn - xs);
                }
            }
            const double* tab = &table_[SpectralField::m_offset(bandlimit_, m) * half_];
            for (int l = m; l <= bandlimit_; ++l) {
                const double* p = tab + static_cast<std::size_t>(l - m) * half_;
                const auto& src = ((l - m) % 2 == 0) ? sym : anti;
                double re = 0.0, im = 0.0;
                for (int j = 0; j < half_; ++j) {
                    re += src[j].real() * p[j];
                    im += src[j].imag() * p[j];
                }
                c(l, m) = cplx{re, im};
            }
        }
        // FFT of real data gives exactly real m = 0 bins; keep the invariant exact
        for (int l = 0; l <= bandlimit_; ++l) c(l, 0) = cplx{c(l, 0).real(), 0.0};
        return c;
    }

private:
    void check_grid(const GridField& f) const {
        if (f.n_theta != grid_.n_theta || f.n_phi != grid_.n_phi ||
            f.values.size() != static_cast<std::size_t>(grid_.n_theta) * grid_.n_phi)
            throw std::invalid_argument("grid field dimensions " + std::to_string(f.n_theta) + "x" +
                                        std::to_string(f.n_phi) + " do not match plan grid " +
                                        std::to_string(grid_.n_theta) + "x" + std::to_string(grid_.n_phi));
    }

    void build_tables() {
        half_ = (grid_.n_theta + 1) / 2;
        table_.assign(SpectralField::size_for(bandlimit_) * half_, 0.0);
        for (int j = 0; j < half_; ++j) {
            const auto p = legendre_values(bandlimit_, grid_.nodes[j]);
            for (std::size_t i = 0; i < p.size(); ++i) {
                // i is the m-major (m, l) index; the table shares the layout with a ring stride
                table_[i * half_ + j] = std::abs(p[i]) < 1e-250 ? 0.0 : p[i];
            }
        }
    }

    void build_fft() {
        const int nt = grid_.n_theta, np = grid_.n_phi, nspec = np / 2 + 1;
        auto real = detail::fftw_alloc<double>(static_cast<std::size_t>(nt) * np);
        auto spec = detail::fftw_alloc<fftw_complex>(static_cast<std::size_t>(nt) * nspec);
        int n[] = {np};
        forward_ = fftw_plan_many_dft_r2c(1, n, nt, real.get(), nullptr, 1, np, spec.get(), nullptr, 1, nspec,
                                          FFTW_ESTIMATE);
        backward_ = fftw_plan_many_dft_c2r(1, n, nt, spec.get(), nullptr, 1, nspec, real.get(), nullptr, 1, np,
                                           FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw std::runtime_error("SHTPlan: FFTW planning failed");
    }

    int bandlimit_;
    QuadratureGrid grid_;
    int half_ = 0;
    std::vector<double> table_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline SpectralField analyze(const GridField& f, const SHTPlan& plan) { return plan.analyze(f); }
inline GridField synthesize(const SpectralField& c, const SHTPlan& plan) { return plan.synthesize(c); }

}  // namespace slb
