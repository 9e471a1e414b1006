#pragma once

// Frequency grids and two-port network algebra.
//
// Networks are composed as chain (ABCD) matrices and viewed as scattering
// parameters at a real reference impedance. Every response carries its own
// grid; operations that combine responses require identical grids.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shsaw {

using Complex = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_hz(double f) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g Hz", f);
    return buf;
}

inline bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace detail

class FrequencyGrid {
public:
    FrequencyGrid() = default;

    explicit FrequencyGrid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2)
            throw Error("frequency grid needs at least 2 points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!std::isfinite(points_[i]) || points_[i] <= 0.0)
                throw Error("frequency grid point " + std::to_string(i) + " is not a finite positive value");
            if (i > 0 && points_[i] <= points_[i - 1])
                throw Error("frequency grid is not strictly increasing at point " + std::to_string(i));
        }
    }

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double omega(std::size_t i) const { return 2.0 * std::numbers::pi * points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }

    bool operator==(const FrequencyGrid&) const = default;

private:
    std::vector<double> points_;
};

enum class Spacing { linear, log };

inline FrequencyGrid make_grid(double f_start, double f_stop, std::size_t n, Spacing spacing = Spacing::linear) {
    if (!(f_start > 0.0) || !(f_stop > f_start) || !std::isfinite(f_stop))
        throw Error("make_grid: require 0 < f_start < f_stop");
    if (n < 2)
        throw Error("make_grid: require n >= 2");
    std::vector<double> pts(n);
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / last;
        if (spacing == Spacing::linear)
            pts[i] = f_start + (f_stop - f_start) * t;
        else
            pts[i] = f_start * std::pow(f_stop / f_start, t);
    }
    pts.front() = f_start;
    pts.back() = f_stop;
    return FrequencyGrid(std::move(pts));
}

// A, B in ohm, C in siemens, D dimensionless.
struct ChainMatrix {
    Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static ChainMatrix identity() { return {}; }
    Complex det() const { return a * d - b * c; }

    friend ChainMatrix operator*(const ChainMatrix& x, const ChainMatrix& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

struct ScatteringMatrix {
    Complex s11, s12, s21, s22;
};

struct AbcdResponse {
    FrequencyGrid grid;
    std::vector<ChainMatrix> matrices;
};

struct TwoPortResponse {
    FrequencyGrid grid;
    std::vector<ScatteringMatrix> s;
    double z_ref = 50.0;
};

// Admittance of a one-port (siemens). Points that evaluate to a non-finite
// admittance (lossless series resonance hit exactly) are kept and flagged by
// non_finite_points(); they are rejected by the network embeddings.
struct OnePortResponse {
    FrequencyGrid grid;
    std::vector<Complex> y;
    double z_ref = 50.0;

    Complex s11(std::size_t i) const {
        const Complex zy = z_ref * y[i];
        return (1.0 - zy) / (1.0 + zy);
    }
};

inline std::vector<std::size_t> non_finite_points(const OnePortResponse& r) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < r.y.size(); ++i)
        if (!detail::finite(r.y[i]))
            out.push_back(i);
    return out;
}

inline OnePortResponse constant_admittance(const FrequencyGrid& grid, Complex y, double z_ref = 50.0) {
    return {grid, std::vector<Complex>(grid.size(), y), z_ref};
}

inline AbcdResponse abcd_of_series_admittance(const OnePortResponse& y) {
    AbcdResponse out{y.grid, {}};
    out.matrices.reserve(y.y.size());
    for (std::size_t i = 0; i < y.y.size(); ++i) {
        const Complex v = y.y[i];
        if (!detail::finite(v))
            throw Error("series element has non-finite admittance at " + detail::format_hz(y.grid[i]));
        if (v == Complex{0.0})
            throw Error("series element has zero admittance (open circuit) at " + detail::format_hz(y.grid[i]));
        out.matrices.push_back({1.0, 1.0 / v, 0.0, 1.0});
    }
    return out;
}

inline AbcdResponse abcd_of_shunt_admittance(const OnePortResponse& y) {
    AbcdResponse out{y.grid, {}};
    out.matrices.reserve(y.y.size());
    for (std::size_t i = 0; i < y.y.size(); ++i) {
        if (!detail::finite(y.y[i]))
            throw Error("shunt element has non-finite admittance at " + detail::format_hz(y.grid[i]));
        out.matrices.push_back({1.0, 0.0, y.y[i], 1.0});
    }
    return out;
}

inline AbcdResponse identity_abcd(const FrequencyGrid& grid) {
    return {grid, std::vector<ChainMatrix>(grid.size(), ChainMatrix::identity())};
}

// a then b, port 1 of a facing the source.
inline AbcdResponse cascade(const AbcdResponse& a, const AbcdResponse& b) {
    if (!(a.grid == b.grid))
        throw Error("cascade: frequency grids differ");
    AbcdResponse out{a.grid, {}};
    out.matrices.reserve(a.matrices.size());
    for (std::size_t i = 0; i < a.matrices.size(); ++i)
        out.matrices.push_back(a.matrices[i] * b.matrices[i]);
    return out;
}

inline ScatteringMatrix chain_to_scattering(const ChainMatrix& m, double z0) {
    const Complex bn = m.b / z0;
    const Complex cn = m.c * z0;
    const Complex den = m.a + bn + cn + m.d;
    return {(m.a + bn - cn - m.d) / den, 2.0 * m.det() / den, 2.0 / den, (-m.a + bn - cn + m.d) / den};
}

inline ChainMatrix scattering_to_chain(const ScatteringMatrix& s, double z0) {
    const Complex two_s21 = 2.0 * s.s21;
    const Complex cross = s.s12 * s.s21;
    return {((1.0 + s.s11) * (1.0 - s.s22) + cross) / two_s21,
            z0 * ((1.0 + s.s11) * (1.0 + s.s22) - cross) / two_s21,
            ((1.0 - s.s11) * (1.0 - s.s22) - cross) / (two_s21 * z0),
            ((1.0 - s.s11) * (1.0 + s.s22) + cross) / two_s21};
}

inline TwoPortResponse abcd_to_s(const AbcdResponse& a, double z_ref) {
    if (!(z_ref > 0.0) || !std::isfinite(z_ref))
        throw Error("abcd_to_s: reference impedance must be real and positive");
    TwoPortResponse out{a.grid, {}, z_ref};
    out.s.reserve(a.matrices.size());
    for (std::size_t i = 0; i < a.matrices.size(); ++i) {
        const ChainMatrix& m = a.matrices[i];
        const Complex den = m.a + m.b / z_ref + m.c * z_ref + m.d;
        if (den == Complex{0.0} || !detail::finite(den))
            throw Error("abcd_to_s: singular conversion at " + detail::format_hz(a.grid[i]));
        out.s.push_back(chain_to_scattering(m, z_ref));
    }
    return out;
}

inline AbcdResponse s_to_abcd(const TwoPortResponse& t) {
    AbcdResponse out{t.grid, {}};
    out.matrices.reserve(t.s.size());
    for (std::size_t i = 0; i < t.s.size(); ++i) {
        if (t.s[i].s21 == Complex{0.0})
            throw Error("s_to_abcd: S21 = 0 (no transmission) at " + detail::format_hz(t.grid[i]));
        out.matrices.push_back(scattering_to_chain(t.s[i], t.z_ref));
    }
    return out;
}

inline double to_db(Complex z) { return 20.0 * std::log10(std::abs(z)); }

}  // namespace shsaw
