#pragma once

// Ladder filters built from mBVD resonators: construction, simulation,
// passband metrics and the matched-response optimizer.

#include <shsaw/mbvd.hpp>
#include <shsaw/nelder_mead.hpp>
#include <shsaw/netcore.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace shsaw {

enum class StageRole { shunt, series };

struct Stage {
    StageRole role;
    MbvdModel model;

    bool operator==(const Stage&) const = default;
};

struct LadderTopology {
    std::vector<Stage> stages;

    bool operator==(const LadderTopology&) const = default;
};

// Third-order ladder of five resonators: shunt, series, shunt, series, shunt.
inline LadderTopology canonical_ladder(const MbvdModel& shunt_model, const MbvdModel& series_model) {
    shunt_model.validate();
    series_model.validate();
    return {{{StageRole::shunt, shunt_model},
             {StageRole::series, series_model},
             {StageRole::shunt, shunt_model},
             {StageRole::series, series_model},
             {StageRole::shunt, shunt_model}}};
}

inline AbcdResponse chain_response(const LadderTopology& t, const FrequencyGrid& grid) {
    if (t.stages.empty())
        throw Error("ladder topology has no stages");
    AbcdResponse acc = identity_abcd(grid);
    for (const Stage& st : t.stages) {
        const OnePortResponse y = admittance(st.model, grid);
        acc = cascade(acc, st.role == StageRole::shunt ? abcd_of_shunt_admittance(y) : abcd_of_series_admittance(y));
    }
    return acc;
}

inline TwoPortResponse simulate(const LadderTopology& t, const FrequencyGrid& grid, double z_ref) {
    return abcd_to_s(chain_response(t, grid), z_ref);
}

struct Band {
    double f_lo = 0.0;
    double f_hi = 0.0;
};

struct DesignTargets {
    double f_center = 0.0;
    double fbw_3db = 0.0;
    double z_ref = 50.0;
    std::vector<Band> stopbands;
    double min_rejection_db = 0.0;

    void validate() const {
        if (!(f_center > 0.0))
            throw Error("design targets: f_center must be positive");
        if (!(fbw_3db > 0.0 && fbw_3db < 0.2))
            throw Error("design targets: fbw_3db must lie in (0, 0.2)");
        if (!(z_ref > 0.0))
            throw Error("design targets: z_ref must be positive");
        const double lo = f_center * (1.0 - fbw_3db), hi = f_center * (1.0 + fbw_3db);
        for (const Band& b : stopbands) {
            if (!(b.f_lo > 0.0 && b.f_hi > b.f_lo))
                throw Error("design targets: stopband bounds must satisfy 0 < f_lo < f_hi");
            if (b.f_hi >= lo && b.f_lo <= hi)
                throw Error("design targets: stopband overlaps the passband");
        }
    }
};

struct FilterMetrics {
    double il_db = 0.0;
    double f_center = 0.0;
    double fbw_3db = 0.0;
    double oob_rejection_db = 0.0;
    double max_inband_s11_db = 0.0;
    double f_lower_3db = 0.0;
    double f_upper_3db = 0.0;
};

// Insertion loss at the transmission peak; the 3-dB band is the contiguous
// run of points around the peak within 3 dB of it, with edges interpolated
// linearly in (frequency, dB).
inline FilterMetrics metrics(const TwoPortResponse& r, const DesignTargets& targets) {
    const FrequencyGrid& g = r.grid;
    const std::size_t n = g.size();
    std::vector<double> s21_db(n);
    for (std::size_t i = 0; i < n; ++i)
        s21_db[i] = to_db(r.s[i].s21);
    const std::size_t ipk = static_cast<std::size_t>(std::max_element(s21_db.begin(), s21_db.end()) - s21_db.begin());
    const double peak = s21_db[ipk];
    const double level = peak - 3.0;

    std::size_t lo = ipk, hi = ipk;
    while (lo > 0 && s21_db[lo - 1] >= level)
        --lo;
    while (hi + 1 < n && s21_db[hi + 1] >= level)
        ++hi;
    if (lo == 0 || hi == n - 1)
        throw Error("band not bracketed");

    auto edge = [&](std::size_t outside, std::size_t inside) {
        const double t = (level - s21_db[outside]) / (s21_db[inside] - s21_db[outside]);
        return g[outside] + t * (g[inside] - g[outside]);
    };
    FilterMetrics m;
    m.il_db = std::max(-peak, 0.0);
    m.f_lower_3db = edge(lo - 1, lo);
    m.f_upper_3db = edge(hi + 1, hi);
    m.f_center = 0.5 * (m.f_lower_3db + m.f_upper_3db);
    m.fbw_3db = (m.f_upper_3db - m.f_lower_3db) / m.f_center;

    m.max_inband_s11_db = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i <= hi; ++i)
        m.max_inband_s11_db = std::max(m.max_inband_s11_db, to_db(r.s[i].s11));

    m.oob_rejection_db = std::numeric_limits<double>::infinity();
    for (const Band& b : targets.stopbands) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (g[i] < b.f_lo || g[i] > b.f_hi)
                continue;
            any = true;
            m.oob_rejection_db = std::min(m.oob_rejection_db, -s21_db[i]);
        }
        if (!any)
            throw Error("stopband has no grid points: " + detail::format_hz(b.f_lo) + " .. " + detail::format_hz(b.f_hi));
    }
    return m;
}

// Seed design: series resonators at f_center, shunt resonators detuned so
// their parallel resonance lands on f_center. r_s = r_0 = 0 on both.
inline LadderTopology init_design(const DesignTargets& targets, double k2, double q_shunt, double q_series,
                                  double c0_shunt, double c0_series) {
    targets.validate();
    if (!(k2 > 0.0 && k2 < 0.2))
        throw Error("init_design: k2 must lie in (0, 0.2)");
    if (!(q_shunt > 0.0 && q_series > 0.0 && c0_shunt > 0.0 && c0_series > 0.0))
        throw Error("init_design: quality factors and capacitances must be positive");
    const double ratio = capacitance_ratio_from_k2(k2);
    const MbvdModel series = single_branch_model(targets.f_center, k2, q_series, c0_series);
    const MbvdModel shunt = single_branch_model(targets.f_center / std::sqrt(1.0 + ratio), k2, q_shunt, c0_shunt);
    return canonical_ladder(shunt, series);
}

struct CostWeights {
    double s11 = 1.0;
    double il = 1.0;
    double rejection = 1.0;
    double fbw = 2.0;
};

inline double design_cost(const FilterMetrics& m, const DesignTargets& t, const CostWeights& w = {}) {
    const double s11_excess = std::max(m.max_inband_s11_db + 10.0, 0.0);
    const double rej_short = t.stopbands.empty() ? 0.0 : std::max(t.min_rejection_db - m.oob_rejection_db, 0.0);
    return w.s11 * s11_excess + w.il * m.il_db + w.rejection * rej_short +
           w.fbw * std::abs(m.fbw_3db - t.fbw_3db) / t.fbw_3db;
}

struct OptimizeOptions {
    CostWeights weights;
    double c0_min = 1e-15;  // F
    double c0_max = 1e-10;  // F
    double max_detune = 0.1;  // fractional shift of either resonator's f_s
    int max_iterations = 1500;
    int restarts = 3;
};

struct OptimizeResult {
    LadderTopology topology;
    FilterMetrics metrics;
    double cost = 0.0;
    double initial_cost = 0.0;
    int iterations = 0;
};

namespace detail {

// Rescales every stage of each role by a common c_0 factor and f_s factor.
inline LadderTopology apply_ladder_knobs(const LadderTopology& t0, const std::array<double, 4>& x) {
    LadderTopology t = t0;
    for (Stage& st : t.stages) {
        const bool shunt = st.role == StageRole::shunt;
        const double c0_scale = std::exp(shunt ? x[0] : x[1]);
        const double f_scale = 1.0 + (shunt ? x[2] : x[3]);
        const double fs = st.model.main().series_resonance();
        st.model = scale_to_frequency(scale_c0(st.model, st.model.c_0 * c0_scale), fs * f_scale);
    }
    return t;
}

}  // namespace detail

// Four knobs: shunt c_0, series c_0, shunt f_s detuning, series f_s detuning.
// Quality factors and coupling stay fixed. The returned design never costs
// more than t0.
inline OptimizeResult optimize(const LadderTopology& t0, const DesignTargets& targets, const FrequencyGrid& grid,
                               const OptimizeOptions& opt = {}) {
    targets.validate();
    const FilterMetrics m0 = metrics(simulate(t0, grid, targets.z_ref), targets);
    const double cost0 = design_cost(m0, targets, opt.weights);

    double c0_shunt = 0.0, c0_series = 0.0;
    for (const Stage& st : t0.stages)
        (st.role == StageRole::shunt ? c0_shunt : c0_series) = st.model.c_0;

    auto c0_ok = [&](double c0, double log_scale) {
        const double c = c0 * std::exp(log_scale);
        return c >= opt.c0_min && c <= opt.c0_max;
    };
    auto cost_of = [&](const std::vector<double>& x) {
        const std::array<double, 4> k{x[0], x[1], x[2], x[3]};
        if (std::abs(k[2]) > opt.max_detune || std::abs(k[3]) > opt.max_detune)
            return HUGE_VAL;
        if (!c0_ok(c0_shunt, k[0]) || !c0_ok(c0_series, k[1]))
            return HUGE_VAL;
        try {
            const LadderTopology t = detail::apply_ladder_knobs(t0, k);
            return design_cost(metrics(simulate(t, grid, targets.z_ref), targets), targets, opt.weights);
        } catch (const Error&) {
            return HUGE_VAL;
        }
    };

    SimplexOptions sopt;
    sopt.max_iterations = opt.max_iterations;
    sopt.ftol = 1e-10;
    sopt.fabs_floor = 1e-12;
    std::vector<double> x(4, 0.0);
    double best = cost0;
    int iterations = 0;
    const std::vector<double> base_step{0.2, 0.2, 0.005, 0.005};
    for (int r = 0; r <= opt.restarts; ++r) {
        std::vector<double> step = base_step;
        for (double& s : step)
            s /= (1.0 + r);
        const SimplexResult res = nelder_mead(cost_of, x, step, sopt);
        iterations += res.iterations;
        if (res.value < best) {
            best = res.value;
            x = res.x;
        }
    }

    OptimizeResult out;
    out.initial_cost = cost0;
    out.iterations = iterations;
    if (best < cost0) {
        out.topology = detail::apply_ladder_knobs(t0, {x[0], x[1], x[2], x[3]});
        out.metrics = metrics(simulate(out.topology, grid, targets.z_ref), targets);
        out.cost = design_cost(out.metrics, targets, opt.weights);
    } else {
        out.topology = t0;
        out.metrics = m0;
        out.cost = cost0;
    }
    return out;
}

}  // namespace shsaw
