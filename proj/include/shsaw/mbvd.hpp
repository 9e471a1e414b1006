#pragma once

// Multi-branch modified Butterworth-Van Dyke (mBVD) resonator model.
//
// Topology: r_s in series with the parallel combination of the static branch
// (r_0 + c_0) and every motional branch (r_m + l_m + c_m). The first motional
// branch is the main tone; further branches carry spurious modes and only
// enter admittance evaluation, never the figures of merit.

#include <shsaw/netcore.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace shsaw {

struct MotionalBranch {
    double r_m = 0.0;  // ohm
    double l_m = 0.0;  // H
    double c_m = 0.0;  // F

    double series_resonance() const { return 1.0 / (2.0 * std::numbers::pi * std::sqrt(l_m * c_m)); }
    double characteristic_impedance() const { return std::sqrt(l_m / c_m); }

    bool operator==(const MotionalBranch&) const = default;
};

struct MbvdModel {
    double r_s = 0.0;  // ohm
    double r_0 = 0.0;  // ohm
    double c_0 = 0.0;  // F
    std::vector<MotionalBranch> branches;

    const MotionalBranch& main() const { return branches.front(); }

    void validate() const {
        auto ok = [](double v) { return std::isfinite(v); };
        if (!ok(r_s) || r_s < 0.0 || !ok(r_0) || r_0 < 0.0)
            throw Error("mBVD: resistances must be finite and non-negative");
        if (!ok(c_0) || c_0 <= 0.0)
            throw Error("mBVD: c_0 must be positive");
        if (branches.empty())
            throw Error("mBVD: at least one motional branch is required");
        for (const auto& b : branches) {
            if (!ok(b.r_m) || b.r_m < 0.0)
                throw Error("mBVD: motional resistance must be non-negative");
            if (!ok(b.l_m) || b.l_m <= 0.0 || !ok(b.c_m) || b.c_m <= 0.0)
                throw Error("mBVD: motional l_m and c_m must be positive");
        }
        for (std::size_t i = 0; i < branches.size(); ++i)
            for (std::size_t j = i + 1; j < branches.size(); ++j) {
                const double fi = branches[i].series_resonance();
                const double fj = branches[j].series_resonance();
                if (std::abs(fi - fj) <= 1e-6 * std::max(fi, fj))
                    throw Error("mBVD: motional branches must have distinct series resonances");
            }
    }

    bool operator==(const MbvdModel&) const = default;
};

// Distinguished infinite value for lossless branches.
class Quality {
public:
    explicit Quality(double v) : value_(v) {}
    static Quality infinite() { return Quality(); }

    bool is_infinite() const { return infinite_; }
    double value() const {
        if (infinite_)
            throw Error("quality factor is infinite (lossless branch)");
        return value_;
    }

private:
    Quality() : value_(0.0), infinite_(true) {}
    double value_;
    bool infinite_ = false;
};

struct ResonatorFigures {
    double f_s = 0.0;
    double f_p = 0.0;
    Quality q = Quality::infinite();
    double k2 = 0.0;
    double c_0 = 0.0;
};

// c_m / c_0 implied by the coupling definition k2 = (pi^2 / 8) c_m / c_0.
inline double capacitance_ratio_from_k2(double k2) { return 8.0 * k2 / (std::numbers::pi * std::numbers::pi); }
inline double k2_from_capacitance_ratio(double ratio) { return std::numbers::pi * std::numbers::pi / 8.0 * ratio; }

// Motional branch with the given series resonance, coupling and quality on a
// static capacitance c_0. A non-finite or non-positive q yields r_m = 0.
inline MotionalBranch branch_from_figures(double f_s, double k2, double q, double c_0) {
    const double c_m = capacitance_ratio_from_k2(k2) * c_0;
    const double w = 2.0 * std::numbers::pi * f_s;
    const double l_m = 1.0 / (w * w * c_m);
    const double r_m = (std::isfinite(q) && q > 0.0) ? std::sqrt(l_m / c_m) / q : 0.0;
    return {r_m, l_m, c_m};
}

namespace detail {

inline Complex branch_impedance(const MotionalBranch& b, double w) {
    return {b.r_m, w * b.l_m - 1.0 / (w * b.c_m)};
}

// Admittance of the parallel section. Sets `singular` when a lossless branch
// sits on its series resonance to rounding precision.
inline Complex parallel_admittance(const MbvdModel& m, double w, bool& singular) {
    singular = false;
    Complex y = 1.0 / Complex(m.r_0, -1.0 / (w * m.c_0));
    for (const auto& b : m.branches) {
        const Complex z = branch_impedance(b, w);
        const double scale = w * b.l_m;
        if (b.r_m == 0.0 && std::abs(z.imag()) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
            singular = true;
            continue;
        }
        y += 1.0 / z;
    }
    return y;
}

}  // namespace detail

inline Complex admittance_at(const MbvdModel& m, double f) {
    const double w = 2.0 * std::numbers::pi * f;
    bool singular = false;
    const Complex yp = detail::parallel_admittance(m, w, singular);
    if (singular) {
        if (m.r_s > 0.0)
            return Complex(1.0 / m.r_s, 0.0);
        return Complex(std::numeric_limits<double>::infinity(), 0.0);
    }
    return yp / (1.0 + m.r_s * yp);
}

inline OnePortResponse admittance(const MbvdModel& m, const FrequencyGrid& grid, double z_ref = 50.0) {
    m.validate();
    OnePortResponse out{grid, {}, z_ref};
    out.y.reserve(grid.size());
    for (double f : grid.points())
        out.y.push_back(admittance_at(m, f));
    return out;
}

namespace detail {

// Susceptance of the lossless model scaled by 1 / (2 pi f): c_0 + sum c_i / (1 - (f/f_i)^2).
// Written in terms of d = (f - f_i) / f_i so it stays accurate next to a pole.
inline double lossless_susceptance_per_omega(const MbvdModel& m, double f) {
    double s = m.c_0;
    for (const auto& b : m.branches) {
        const double fi = b.series_resonance();
        const double d = (f - fi) / fi;
        s += b.c_m / (-d * (2.0 + d));
    }
    return s;
}

}  // namespace detail

// Parallel resonance of the main branch: zero of the lossless susceptance
// between the main series resonance and the next pole above it.
inline double parallel_resonance(const MbvdModel& m) {
    const double fs = m.main().series_resonance();
    double next_pole = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < m.branches.size(); ++i) {
        const double fi = m.branches[i].series_resonance();
        if (fi > fs)
            next_pole = std::min(next_pole, fi);
    }
    double lo = fs * (1.0 + 1e-13);
    double hi;
    if (std::isfinite(next_pole)) {
        hi = next_pole * (1.0 - 1e-13);
    } else {
        hi = 2.0 * fs;
        while (detail::lossless_susceptance_per_omega(m, hi) <= 0.0)
            hi *= 2.0;
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::lossless_susceptance_per_omega(m, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline ResonatorFigures resonator_figures(const MbvdModel& m) {
    m.validate();
    const MotionalBranch& b = m.main();
    ResonatorFigures out;
    out.f_s = b.series_resonance();
    out.f_p = parallel_resonance(m);
    out.q = b.r_m > 0.0 ? Quality(b.characteristic_impedance() / b.r_m) : Quality::infinite();
    out.k2 = k2_from_capacitance_ratio(b.c_m / m.c_0);
    out.c_0 = m.c_0;
    return out;
}

inline MbvdModel scale_to_frequency(const MbvdModel& m, double f_target) {
    if (!(f_target > 0.0))
        throw Error("scale_to_frequency: target frequency must be positive");
    m.validate();
    const double ratio = m.main().series_resonance() / f_target;
    MbvdModel out = m;
    for (auto& b : out.branches)
        b.l_m *= ratio * ratio;
    return out;
}

// Impedance scaling at fixed f_s, f_p, q and k2.
inline MbvdModel scale_c0(const MbvdModel& m, double c0_target) {
    if (!(c0_target > 0.0))
        throw Error("scale_c0: target c_0 must be positive");
    const double rho = c0_target / m.c_0;
    MbvdModel out = m;
    out.c_0 = c0_target;
    out.r_s /= rho;
    out.r_0 /= rho;
    for (auto& b : out.branches) {
        b.c_m *= rho;
        b.l_m /= rho;
        b.r_m /= rho;
    }
    return out;
}

// Single-branch model from figures of merit, with r_s = r_0 = 0.
inline MbvdModel single_branch_model(double f_s, double k2, double q, double c_0) {
    return {0.0, 0.0, c_0, {branch_from_figures(f_s, k2, q, c_0)}};
}

}  // namespace shsaw
