#pragma once

// Physical dimensioning of IDT resonators: period selection from a
// dispersion table, apodization windows, and conversion between static
// capacitance and (aperture, electrode count).
//
// Electrode counts are counts of fingers, not finger pairs; adjacent
// fingers form one capacitive pair, so a transducer of n_e fingers has
// n_e - 1 pairs.

#include <shsaw/netcore.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shsaw {

struct DispersionRow {
    double lambda_um = 0.0;
    double f_s = 0.0;  // Hz
    double k2 = 0.0;
};

class DispersionTable {
public:
    explicit DispersionTable(std::vector<DispersionRow> rows) : rows_(std::move(rows)) {
        if (rows_.size() < 2)
            throw Error("dispersion table needs at least 2 rows");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            if (!(r.lambda_um > 0.0 && r.f_s > 0.0 && r.k2 > 0.0 && r.k2 < 1.0))
                throw Error("dispersion table row " + std::to_string(i + 1) + " has out-of-range values");
            if (i > 0 && !(r.lambda_um > rows_[i - 1].lambda_um))
                throw Error("dispersion table is not strictly increasing in lambda at row " + std::to_string(i + 1));
            if (i > 0 && !(r.f_s < rows_[i - 1].f_s))
                throw Error("dispersion table f_s is not strictly decreasing at row " + std::to_string(i + 1));
        }
    }

    const std::vector<DispersionRow>& rows() const { return rows_; }
    double f_min() const { return rows_.back().f_s; }
    double f_max() const { return rows_.front().f_s; }

private:
    std::vector<DispersionRow> rows_;
};

struct PeriodSelection {
    double lambda_um = 0.0;
    double k2 = 0.0;
};

// Piecewise-linear lambda(f_s), then k2(lambda) at the chosen period.
inline PeriodSelection select_period(const DispersionTable& d, double f_target) {
    const auto& rows = d.rows();
    if (!(f_target >= d.f_min() && f_target <= d.f_max()))
        throw Error("select_period: " + detail::format_hz(f_target) + " is outside the dispersion table range");
    // Rows run toward lower f_s; find the segment with f_s[i] >= f >= f_s[i+1].
    std::size_t i = 0;
    while (i + 2 < rows.size() && rows[i + 1].f_s > f_target)
        ++i;
    const DispersionRow& a = rows[i];
    const DispersionRow& b = rows[i + 1];
    if (f_target == a.f_s)
        return {a.lambda_um, a.k2};
    if (f_target == b.f_s)
        return {b.lambda_um, b.k2};
    const double t = (a.f_s - f_target) / (a.f_s - b.f_s);
    const double lambda = a.lambda_um + t * (b.lambda_um - a.lambda_um);
    const double u = (lambda - a.lambda_um) / (b.lambda_um - a.lambda_um);
    return {lambda, a.k2 + u * (b.k2 - a.k2)};
}

enum class WindowKind { uniform, bartlett };

// Normalized aperture profile over x in [-a, a], centered on the resonator.
struct ApodizationWindow {
    WindowKind kind = WindowKind::uniform;
    double a = 0.5;

    static ApodizationWindow uniform() { return {WindowKind::uniform, 0.5}; }
    static ApodizationWindow bartlett(double a) {
        if (!(a > 0.0))
            throw Error("bartlett window parameter must be positive");
        return {WindowKind::bartlett, a};
    }
};

inline double window_value(const ApodizationWindow& w, double x) {
    if (w.kind == WindowKind::uniform)
        return 1.0;
    if (std::abs(x) > w.a)
        throw Error("window_value: position lies outside the electrode extent");
    return std::clamp(1.0 - std::abs(x / w.a), 0.0, 1.0);
}

inline double mean_overlap(const ApodizationWindow& w) {
    if (w.kind == WindowKind::uniform)
        return 1.0;
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return window_value(w, x); };
    // Split at the apex so each half is smooth.
    double err = 0.0;
    const double left = gauss_kronrod<double, 15>::integrate(f, -w.a, 0.0, 15, 1e-12, &err);
    const double right = gauss_kronrod<double, 15>::integrate(f, 0.0, w.a, 15, 1e-12, &err);
    return std::min((left + right) / (2.0 * w.a), 1.0);
}

// Electrode count that keeps C_0 once the overlap shrinks by the window.
// Without a calibration factor the analytic 1 / mean_overlap is used.
inline long scale_fingers(long n_e_conv, const ApodizationWindow& w, std::optional<double> calibration = {}) {
    if (n_e_conv < 2)
        throw Error("scale_fingers: at least 2 electrodes are required");
    if (calibration && !(*calibration > 0.0))
        throw Error("scale_fingers: calibration factor must be positive");
    const double factor = calibration ? *calibration : 1.0 / mean_overlap(w);
    return std::lround(static_cast<double>(n_e_conv) * factor);
}

struct CapacitanceModel {
    double c_per_pair_per_um = 0.0;  // F per electrode pair per um of overlap
};

struct ResonatorLayout {
    double lambda_um = 0.0;
    double aperture_um = 0.0;
    long n_e = 0;
    ApodizationWindow window;
    double c0 = 0.0;  // F
};

// C_0 = (n_e - 1) * c_per_pair_per_um * aperture * mean_overlap(window).
inline double layout_capacitance(const CapacitanceModel& cm, long n_e, double aperture_um, const ApodizationWindow& w) {
    return static_cast<double>(n_e - 1) * cm.c_per_pair_per_um * aperture_um * mean_overlap(w);
}

// Picks an integral electrode count and the aperture closest to the middle
// of l_bounds that realizes c0_target; the stored c0 is recomputed from the
// returned dimensions and must lie within 2% of the target.
inline ResonatorLayout dimension_from_c0(double c0_target, double lambda_um, const CapacitanceModel& cm,
                                         const ApodizationWindow& w, std::pair<double, double> l_bounds) {
    const auto [l_min, l_max] = l_bounds;
    if (!(c0_target > 0.0))
        throw Error("dimension_from_c0: target c0 must be positive");
    if (!(l_min > 0.0 && l_max >= l_min))
        throw Error("dimension_from_c0: aperture bounds must satisfy 0 < min <= max");
    if (!(cm.c_per_pair_per_um > 0.0))
        throw Error("dimension_from_c0: capacitance per pair must be positive");
    if (!(lambda_um > 0.0))
        throw Error("dimension_from_c0: period must be positive");

    const double overlap = mean_overlap(w);
    const double l_mid = 0.5 * (l_min + l_max);
    const double per_pair_mid = cm.c_per_pair_per_um * l_mid * overlap;
    const double pairs_mid = c0_target / per_pair_mid;

    std::optional<ResonatorLayout> best;
    double best_distance = 0.0, best_error = 0.0;
    auto consider = [&](long pairs, double aperture) {
        if (pairs < 1)
            return;
        const long n_e = pairs + 1;
        const double c0 = layout_capacitance(cm, n_e, aperture, w);
        if (std::abs(c0 - c0_target) > 0.02 * c0_target)
            return;
        const double distance = std::abs(aperture - l_mid);
        const double error = std::abs(c0 - c0_target);
        if (!best || distance < best_distance || (distance == best_distance && error < best_error)) {
            best = ResonatorLayout{lambda_um, aperture, n_e, w, c0};
            best_distance = distance;
            best_error = error;
        }
    };
    const long p_lo = static_cast<long>(std::floor(pairs_mid));
    for (long pairs : {p_lo, p_lo + 1}) {
        if (pairs < 1)
            continue;
        const double exact = c0_target / (static_cast<double>(pairs) * cm.c_per_pair_per_um * overlap);
        consider(pairs, std::clamp(exact, l_min, l_max));
    }
    if (!best) {
        const long pairs = std::max(1L, std::lround(pairs_mid));
        const double nearest = layout_capacitance(cm, pairs + 1, std::clamp(l_mid, l_min, l_max), w);
        char buf[160];
        std::snprintf(buf, sizeof buf, "dimension_from_c0: no electrode count within 2%% of target; nearest achievable c0 = %.6g F",
                      nearest);
        throw Error(buf);
    }
    return *best;
}

}  // namespace shsaw
