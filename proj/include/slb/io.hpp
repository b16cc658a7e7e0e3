// io.hpp - coefficient text files, grid CSV and key-value summaries
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sht.hpp"

namespace slb {

// Coefficient text: one `l m re im` line per stored coefficient (m >= 0),
// l ascending then m ascending, 17 significant digits. Lines starting with
// '#' are comments; a `# bandlimit N` comment fixes the bandlimit on read.
inline void write_coefficients(std::ostream& os, const SpectralField& c) {
    const int n = c.bandlimit();
    os << "# bandlimit " << n << "\n";
    char buf[128];
    for (int l = 0; l <= n; ++l) {
        for (int m = 0; m <= l; ++m) {
            const cplx v = c(l, m);
            std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", l, m, v.real(), v.imag());
            os << buf;
        }
    }
}

// Reads a coefficient file. Without a bandlimit comment the bandlimit is the
// largest degree present; `bandlimit` >= 0 forces a size (higher degrees in
// the file are an error, missing ones are zero).
inline SpectralField read_coefficients(std::istream& is, int bandlimit = -1) {
    struct Entry {
        int l, m;
        double re, im;
    };
    std::vector<Entry> entries;
    int declared = -1, max_l = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            std::istringstream hs(line.substr(first + 1));
            std::string key;
            int value;
            if (hs >> key >> value && key == "bandlimit") declared = value;
            continue;
        }
        std::istringstream ls(line);
        Entry e{};
        if (!(ls >> e.l >> e.m >> e.re >> e.im))
            throw std::runtime_error("coefficient file: malformed line " + std::to_string(lineno));
        if (e.l < 0 || e.m < 0 || e.m > e.l)
            throw std::runtime_error("coefficient file: invalid (l, m) on line " + std::to_string(lineno));
        max_l = std::max(max_l, e.l);
        entries.push_back(e);
    }
    int n = bandlimit >= 0 ? bandlimit : (declared >= 0 ? declared : max_l);
    if (max_l > n)
        throw std::runtime_error("coefficient file: degree " + std::to_string(max_l) + " exceeds bandlimit " +
                                 std::to_string(n));
    SpectralField c(n);
    for (const auto& e : entries) c(e.l, e.m) = cplx{e.re, e.im};
    return c;
}

inline SpectralField read_coefficients_file(const std::string& path, int bandlimit = -1) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coefficient file " + path);
    return read_coefficients(in, bandlimit);
}

inline void write_coefficients_file(const std::string& path, const SpectralField& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_coefficients(out, c);
}

// Grid CSV: first row "theta" followed by the longitudes; each following row
// is a colatitude (radians) followed by the ring values.
inline void write_grid_csv(std::ostream& os, const GridField& f, const QuadratureGrid& grid) {
    char buf[64];
    os << "theta";
    for (int k = 0; k < f.n_phi; ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g", grid.phis[k]);
        os << buf;
    }
    os << "\n";
    for (int j = 0; j < f.n_theta; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", grid.theta(j));
        os << buf;
        for (int k = 0; k < f.n_phi; ++k) {
            std::snprintf(buf, sizeof buf, ",%.17g", f(j, k));
            os << buf;
        }
        os << "\n";
    }
}

// Reads a grid CSV written by write_grid_csv; returns the values only.
inline GridField read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("grid csv: empty input");
    const int n_phi = static_cast<int>(std::count(line.begin(), line.end(), ','));
    if (n_phi < 1) throw std::runtime_error("grid csv: header has no longitudes");
    std::vector<double> values;
    int n_theta = 0;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');  // theta
        int cols = 0;
        while (std::getline(ls, cell, ',')) {
            values.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != n_phi) throw std::runtime_error("grid csv: row " + std::to_string(n_theta + 1) + " has " +
                                                    std::to_string(cols) + " values, expected " + std::to_string(n_phi));
        ++n_theta;
    }
    if (n_theta == 0) throw std::runtime_error("grid csv: no rows");
    GridField f(n_theta, n_phi);
    f.values = std::move(values);
    return f;
}

inline GridField read_grid_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file " + path);
    return read_grid_csv(in);
}

// Ordered `key = value` lines.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

inline std::string format_double(double v, int digits = 15) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace slb
