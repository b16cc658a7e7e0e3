// diagnostics.hpp - spot and stripe counting on grid fields
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sht.hpp"

namespace slb {

enum class FeatureKind { spots, stripes };

inline std::optional<FeatureKind> parse_feature_kind(const std::string& s) {
    if (s == "spots") return FeatureKind::spots;
    if (s == "stripes") return FeatureKind::stripes;
    return std::nullopt;
}

struct FeatureCount {
    int count = 0;
    bool flat = false;  // field is (numerically) constant; count is 0
};

inline constexpr double flatness_tolerance = 1e-8;

namespace detail {

inline bool is_flat(const GridField& f) {
    if (f.values.empty()) return true;
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    return !(*hi - *lo > flatness_tolerance);
}

}  // namespace detail

// Connected components of {phi > level * max phi}. Neighbours are the four
// grid neighbours with periodic longitude; the first and last rings are also
// joined across the pole (k <-> k + n_phi/2).
inline FeatureCount count_spots(const GridField& f, double level = 0.5) {
    if (detail::is_flat(f)) return {0, true};
    const int nt = f.n_theta, np = f.n_phi;
    const double peak = *std::max_element(f.values.begin(), f.values.end());
    const double cut = level * peak;
    std::vector<int> label(f.values.size(), -1);
    auto id = [np](int j, int k) { return static_cast<std::size_t>(j) * np + k; };
    int count = 0;
    std::vector<std::pair<int, int>> stack;
    for (int j0 = 0; j0 < nt; ++j0) {
        for (int k0 = 0; k0 < np; ++k0) {
            if (label[id(j0, k0)] >= 0 || !(f(j0, k0) > cut)) continue;
            stack.assign(1, {j0, k0});
            label[id(j0, k0)] = count;
            while (!stack.empty()) {
                const auto [j, k] = stack.back();
                stack.pop_back();
                auto visit = [&](int jj, int kk) {
                    kk = ((kk % np) + np) % np;
                    const std::size_t i = id(jj, kk);
                    if (label[i] < 0 && f(jj, kk) > cut) {
                        label[i] = count;
                        stack.emplace_back(jj, kk);
                    }
                };
                visit(j, k - 1);
                visit(j, k + 1);
                if (j > 0) visit(j - 1, k);
                if (j + 1 < nt) visit(j + 1, k);
                if (j == 0 || j == nt - 1) visit(j, k + np / 2);
            }
            ++count;
        }
    }
    return {count, false};
}

// Sign changes of the longitude-averaged profile along latitude, plus one.
// Rings whose mean is below a small fraction of the profile's range are
// skipped so that nodal rings do not register twice.
inline FeatureCount count_stripes(const GridField& f) {
    if (detail::is_flat(f)) return {0, true};
    std::vector<double> profile(f.n_theta);
    for (int j = 0; j < f.n_theta; ++j) {
        double s = 0.0;
        for (int k = 0; k < f.n_phi; ++k) s += f(j, k);
        profile[j] = s / f.n_phi;
    }
    double scale = 0.0;
    for (double v : profile) scale = std::max(scale, std::abs(v));
    if (!(scale > flatness_tolerance)) return {0, true};
    int changes = 0, last = 0;
    for (double v : profile) {
        if (std::abs(v) <= 1e-10 * scale) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return {changes + 1, false};
}

inline FeatureCount count_features(const GridField& f, FeatureKind kind) {
    return kind == FeatureKind::spots ? count_spots(f) : count_stripes(f);
}

}  // namespace slb
