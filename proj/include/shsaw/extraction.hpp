#pragma once

// Parameter extraction from one-port data: Bode Q curves from the reflection
// coefficient, admittance resonance markers, and mBVD least-squares fitting.

#include <shsaw/mbvd.hpp>
#include <shsaw/nelder_mead.hpp>
#include <shsaw/netcore.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace shsaw {

struct BodeQCurve {
    FrequencyGrid grid;
    // Empty where |S11| >= 1 - 1e-12 (no dissipation to normalize by).
    std::vector<std::optional<double>> q;

    // Largest valid Q with f_lo <= f <= f_hi, if any.
    std::optional<double> peak(double f_lo, double f_hi) const {
        std::optional<double> best;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (grid[i] < f_lo || grid[i] > f_hi || !q[i])
                continue;
            if (!best || *q[i] > *best)
                best = q[i];
        }
        return best;
    }
};

// Default peak search window around a resonator: [0.98 f_s, 1.02 f_p].
inline std::pair<double, double> default_bode_window(const ResonatorFigures& fig) {
    return {0.98 * fig.f_s, 1.02 * fig.f_p};
}

// Q = w |dS11/dw| / (1 - |S11|^2), with the derivative of the complex S11
// taken by three-point stencils that are second order on non-uniform grids.
inline BodeQCurve bode_q_from_reflection(const FrequencyGrid& grid, std::span<const Complex> s11) {
    const std::size_t n = grid.size();
    if (n < 3)
        throw Error("bode_q: at least 3 grid points are required");
    if (s11.size() != n)
        throw Error("bode_q: reflection data does not match the grid");

    BodeQCurve out{grid, std::vector<std::optional<double>>(n)};
    auto w = [&](std::size_t i) { return grid.omega(i); };
    for (std::size_t i = 0; i < n; ++i) {
        Complex d;
        if (i == 0 || i == n - 1) {
            // One-sided: points i, i+-1, i+-2.
            const std::size_t a = i, b = (i == 0) ? 1 : n - 2, c = (i == 0) ? 2 : n - 3;
            const double h1 = w(b) - w(a), h2 = w(c) - w(a);
            d = -(h1 + h2) / (h1 * h2) * s11[a] + h2 / (h1 * (h2 - h1)) * s11[b] - h1 / (h2 * (h2 - h1)) * s11[c];
        } else {
            const double h1 = w(i) - w(i - 1), h2 = w(i + 1) - w(i);
            d = -h2 / (h1 * (h1 + h2)) * s11[i - 1] + (h2 - h1) / (h1 * h2) * s11[i] + h1 / (h2 * (h1 + h2)) * s11[i + 1];
        }
        const double mag = std::abs(s11[i]);
        if (!(mag < 1.0 - 1e-12) || !detail::finite(d))
            continue;
        out.q[i] = w(i) * std::abs(d) / (1.0 - mag * mag);
    }
    return out;
}

inline BodeQCurve bode_q(const OnePortResponse& r) {
    if (!(r.z_ref > 0.0))
        throw Error("bode_q: reference impedance must be positive");
    if (r.grid.size() < 3)
        throw Error("bode_q: at least 3 grid points are required");
    std::vector<Complex> s11(r.y.size());
    for (std::size_t i = 0; i < s11.size(); ++i)
        s11[i] = r.s11(i);
    return bode_q_from_reflection(r.grid, s11);
}

struct ResonanceMarkers {
    double f_s = 0.0;
    double f_p = 0.0;
};

namespace detail {

// Abscissa of the vertex of the parabola through three points.
inline double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv == 0.0)
        return x1;
    const double v = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    return std::clamp(v, x0, x2);
}

inline double refine_extremum(const FrequencyGrid& g, const std::vector<double>& logmag, std::size_t i) {
    return parabola_vertex(g[i - 1], logmag[i - 1], g[i], logmag[i], g[i + 1], logmag[i + 1]);
}

}  // namespace detail

inline ResonanceMarkers resonance_markers(const OnePortResponse& data) {
    const std::size_t n = data.grid.size();
    if (n < 50)
        throw Error("resonance_markers: at least 50 grid points are required");
    std::vector<double> logmag(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!detail::finite(data.y[i]))
            throw Error("resonance_markers: non-finite admittance at " + detail::format_hz(data.grid[i]));
        logmag[i] = std::log(std::abs(data.y[i]));
    }
    const std::size_t is = static_cast<std::size_t>(std::max_element(logmag.begin(), logmag.end()) - logmag.begin());
    if (is == 0 || is == n - 1)
        throw Error("span too narrow");
    const std::size_t ip = static_cast<std::size_t>(std::min_element(logmag.begin() + is + 1, logmag.end()) - logmag.begin());
    if (ip == n - 1)
        throw Error("span too narrow");
    return {detail::refine_extremum(data.grid, logmag, is), detail::refine_extremum(data.grid, logmag, ip)};
}

// ---------------------------------------------------------------------------
// mBVD fitting

struct FitReport {
    MbvdModel model;
    double residual = 0.0;  // RMS relative error of complex Y
    int n_iterations = 0;
    bool converged = false;
};

namespace detail {

// Fit coordinates (all natural logs): c_0, r_s, r_0, then per branch
// f_s, q and c_m / c_0. Each maps one-to-one onto the positive R/L/C set.
struct FitParameterization {
    std::size_t n_branches;

    std::size_t size() const { return 3 + 3 * n_branches; }

    MbvdModel model(const std::vector<double>& p) const {
        MbvdModel m;
        m.c_0 = std::exp(p[0]);
        m.r_s = std::exp(p[1]);
        m.r_0 = std::exp(p[2]);
        for (std::size_t b = 0; b < n_branches; ++b) {
            const double fs = std::exp(p[3 + 3 * b]);
            const double q = std::exp(p[4 + 3 * b]);
            const double c_m = std::exp(p[5 + 3 * b]) * m.c_0;
            const double w = 2.0 * std::numbers::pi * fs;
            const double l_m = 1.0 / (w * w * c_m);
            m.branches.push_back({std::sqrt(l_m / c_m) / q, l_m, c_m});
        }
        return m;
    }

    std::vector<double> coordinates(const MbvdModel& m) const {
        std::vector<double> p{std::log(m.c_0), std::log(m.r_s), std::log(m.r_0)};
        for (const auto& b : m.branches) {
            p.push_back(std::log(b.series_resonance()));
            p.push_back(std::log(b.characteristic_impedance() / b.r_m));
            p.push_back(std::log(b.c_m / m.c_0));
        }
        return p;
    }
};

inline double relative_cost(const MbvdModel& m, const OnePortResponse& data) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        const Complex ym = admittance_at(m, data.grid[i]);
        acc += std::norm(ym - data.y[i]) / std::norm(data.y[i]);
    }
    return acc;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Seed model from the data: conductance peaks for branch frequencies, their
// half-power widths for q, the low-frequency susceptance for c_0 and the
// high-frequency resistance for r_s.
inline MbvdModel initial_fit_guess(const OnePortResponse& data, std::size_t n_branches) {
    const FrequencyGrid& g = data.grid;
    const std::size_t n = g.size();
    std::vector<double> cond(n);
    for (std::size_t i = 0; i < n; ++i)
        cond[i] = data.y[i].real();

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (cond[i] > cond[i - 1] && cond[i] >= cond[i + 1] && cond[i] > 0.0)
            peaks.push_back(i);
    if (peaks.empty())
        throw Error("no resonance found");
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return cond[a] > cond[b]; });
    // Reject flat data: the largest peak must stand clear of the band edges.
    const double edge = std::max(cond.front(), cond.back());
    if (!(cond[peaks.front()] > 2.0 * std::max(edge, 0.0)))
        throw Error("no resonance found");
    if (peaks.size() < n_branches)
        throw Error("no resonance found for every requested branch");
    peaks.resize(n_branches);

    struct BranchSeed {
        double fs, q;
    };
    std::vector<BranchSeed> seeds;
    for (std::size_t ip : peaks) {
        const double half = 0.5 * cond[ip];
        auto crossing = [&](int dir) {
            std::size_t j = ip;
            while (true) {
                const std::size_t next = dir < 0 ? j - 1 : j + 1;
                if ((dir < 0 && j == 0) || (dir > 0 && j == n - 1))
                    return g[j];
                if (cond[next] < half) {
                    const double t = (cond[j] - half) / (cond[j] - cond[next]);
                    return g[j] + t * (g[next] - g[j]);
                }
                j = next;
            }
        };
        const double width = crossing(+1) - crossing(-1);
        const double fs = detail::parabola_vertex(g[ip - 1], cond[ip - 1], g[ip], cond[ip], g[ip + 1], cond[ip + 1]);
        seeds.push_back({fs, std::clamp(fs / std::max(width, 1e-12 * fs), 5.0, 1e6)});
    }

    // Main branch coupling from the first admittance minimum above its peak.
    const std::size_t ip0 = peaks.front();
    std::size_t imin = ip0 + 1;
    for (std::size_t i = ip0 + 1; i < n; ++i)
        if (std::abs(data.y[i]) < std::abs(data.y[imin]))
            imin = i;
    double ratio = 0.05;
    if (imin < n - 1) {
        const double fp = g[imin];
        ratio = std::max((fp / seeds.front().fs) * (fp / seeds.front().fs) - 1.0, 1e-4);
    }

    // c_0 from the lowest-decile susceptance, corrected for the main branch tail.
    const std::size_t n_low = std::max<std::size_t>(3, n / 10);
    std::vector<double> c0_samples;
    for (std::size_t i = 0; i < n_low; ++i) {
        const double x = g[i] / seeds.front().fs;
        const double per_omega = data.y[i].imag() / g.omega(i);
        const double denom = 1.0 + ratio / (1.0 - x * x);
        if (x < 1.0 && denom > 0.0)
            c0_samples.push_back(per_omega / denom);
    }
    if (c0_samples.empty()) {
        for (std::size_t i = 0; i < n_low; ++i)
            c0_samples.push_back(data.y[i].imag() / g.omega(i));
    }
    const double c0 = std::abs(median(c0_samples));

    std::vector<double> rs_samples;
    for (std::size_t i = n - n_low; i < n; ++i)
        rs_samples.push_back((1.0 / data.y[i]).real());
    const double rs = std::max(median(rs_samples), 1e-3);

    MbvdModel m;
    m.c_0 = c0 > 0.0 ? c0 : 1e-12;
    m.r_s = rs;
    m.r_0 = std::max(1e-2 / (2.0 * std::numbers::pi * seeds.front().fs * m.c_0), 1e-3);
    for (std::size_t b = 0; b < seeds.size(); ++b) {
        const double r = b == 0 ? ratio : 0.1 * ratio;
        const double c_m = r * m.c_0;
        const double w = 2.0 * std::numbers::pi * seeds[b].fs;
        const double l_m = 1.0 / (w * w * c_m);
        m.branches.push_back({std::sqrt(l_m / c_m) / seeds[b].q, l_m, c_m});
    }
    return m;
}

}  // namespace detail

struct FitOptions {
    int max_iterations = 2000;  // per joint simplex run
    double ftol = 1e-10;
    int block_sweeps = 3;
    int block_iterations = 300;
    int max_restarts = 50;
};

// Weighted least squares sum |Y_model - Y_data|^2 / |Y_data|^2 in log
// coordinates. Blockwise simplex passes (static block, then each motional
// branch) are followed by a joint simplex that is restarted once from its
// best point on a seed-dependent simplex.
inline FitReport fit_mbvd(const OnePortResponse& data, std::size_t n_branches, std::uint64_t seed,
                          const FitOptions& opt = {}) {
    if (n_branches < 1)
        throw Error("fit_mbvd: at least one branch is required");
    if (data.grid.size() < 50)
        throw Error("fit_mbvd: at least 50 grid points are required");
    for (std::size_t i = 0; i < data.y.size(); ++i)
        if (!detail::finite(data.y[i]) || data.y[i] == Complex{0.0})
            throw Error("fit_mbvd: invalid admittance sample at " + detail::format_hz(data.grid[i]));

    const detail::FitParameterization param{n_branches};
    const MbvdModel seed_model = detail::initial_fit_guess(data, n_branches);
    std::vector<double> p = param.coordinates(seed_model);

    // Resistances below 1e-5 of the static reactance at the main peak leave
    // the cost flat in log space; a quadratic wall keeps the simplex off that
    // plateau.
    const double z_static = 1.0 / (2.0 * std::numbers::pi * seed_model.main().series_resonance() * seed_model.c_0);
    const double log_r_floor = std::log(1e-5 * z_static);
    auto cost_of = [&](const std::vector<double>& x) {
        double wall = 0.0;
        for (std::size_t k : {std::size_t{1}, std::size_t{2}})
            if (x[k] < log_r_floor)
                wall += (log_r_floor - x[k]) * (log_r_floor - x[k]);
        MbvdModel m = param.model(x);
        for (std::size_t i = 0; i < m.branches.size(); ++i)
            for (std::size_t j = i + 1; j < m.branches.size(); ++j) {
                const double fi = m.branches[i].series_resonance(), fj = m.branches[j].series_resonance();
                if (std::abs(fi - fj) <= 1e-6 * std::max(fi, fj))
                    return HUGE_VAL;
            }
        return detail::relative_cost(m, data) * (1.0 + wall) + wall;
    };

    // Step sizes in log units: coarse for impedance levels, fine for frequency.
    auto step_for = [&](std::size_t k) {
        if (k < 3)
            return k == 0 ? 0.05 : 0.3;
        switch ((k - 3) % 3) {
            case 0: return 2e-3;
            case 1: return 0.2;
            default: return 0.1;
        }
    };

    int iterations = 0;
    std::vector<std::vector<std::size_t>> blocks{{0, 1, 2}};
    for (std::size_t b = 0; b < n_branches; ++b)
        blocks.push_back({3 + 3 * b, 4 + 3 * b, 5 + 3 * b});

    // Relative Y errors of 1e-12 per point are round-off; nothing below that is progress.
    const double cost_floor = static_cast<double>(data.y.size()) * 1e-24;
    SimplexOptions block_opt;
    block_opt.max_iterations = opt.block_iterations;
    block_opt.ftol = opt.ftol;
    block_opt.fabs_floor = cost_floor;
    for (int sweep = 0; sweep < opt.block_sweeps; ++sweep) {
        for (const auto& block : blocks) {
            std::vector<double> sub, step;
            for (std::size_t k : block) {
                sub.push_back(p[k]);
                step.push_back(step_for(k) / (1.0 + sweep));
            }
            auto sub_cost = [&](const std::vector<double>& s) {
                std::vector<double> full = p;
                for (std::size_t j = 0; j < block.size(); ++j)
                    full[block[j]] = s[j];
                return cost_of(full);
            };
            const SimplexResult r = nelder_mead(sub_cost, sub, step, block_opt);
            iterations += r.iterations;
            for (std::size_t j = 0; j < block.size(); ++j)
                p[block[j]] = r.x[j];
        }
    }

    SimplexOptions joint_opt;
    joint_opt.max_iterations = opt.max_iterations;
    joint_opt.ftol = opt.ftol;
    joint_opt.fabs_floor = cost_floor;
    std::vector<double> step(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        step[k] = 0.2 * step_for(k);
    SimplexResult joint = nelder_mead(cost_of, p, step, joint_opt);
    iterations += joint.iterations;

    // Restart from the best point on randomly signed simplices until a
    // restart no longer improves the cost.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    SimplexResult best = joint;
    bool settled = false;
    for (int r = 0; r < opt.max_restarts && !settled; ++r) {
        for (std::size_t k = 0; k < p.size(); ++k)
            step[k] = 0.2 * step_for(k) * (coin(rng) ? 1.0 : -1.0);
        SimplexResult next = nelder_mead(cost_of, best.x, step, joint_opt);
        iterations += next.iterations;
        settled = next.converged && best.value - next.value <= opt.ftol * std::abs(best.value) + cost_floor;
        if (next.value <= best.value)
            best = std::move(next);
    }

    FitReport rep;
    rep.model = param.model(best.x);
    // Main tone first: the branch with the largest motional capacitance.
    std::stable_sort(rep.model.branches.begin(), rep.model.branches.end(),
                     [](const MotionalBranch& a, const MotionalBranch& b) { return a.c_m > b.c_m; });
    rep.residual = std::sqrt(best.value / static_cast<double>(data.y.size()));
    rep.n_iterations = iterations;
    rep.converged = settled;
    return rep;
}

}  // namespace shsaw
