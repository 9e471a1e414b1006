#pragma once

// Derivative-free simplex minimizer (Nelder-Mead, standard coefficients).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace shsaw {

struct SimplexOptions {
    int max_iterations = 2000;
    // Stop when (worst - best) <= ftol * |best| + fabs_floor over the simplex.
    double ftol = 1e-10;
    double fabs_floor = 1e-300;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes f starting from x0 with an axis-aligned initial simplex of the
// given per-coordinate step sizes. Ties are broken by vertex index, so the
// result is a deterministic function of the inputs.
template <class F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& step,
                          const SimplexOptions& opt = {}) {
    const std::size_t n = x0.size();
    auto eval = [&](const std::vector<double>& x) {
        const double y = f(x);
        return std::isnan(y) ? HUGE_VAL : y;
    };
    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        v[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i)
        fv[i] = eval(v[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    auto along = [&](double t, const std::vector<double>& from, std::vector<double>& out) {
        for (std::size_t k = 0; k < n; ++k)
            out[k] = centroid[k] + t * (from[k] - centroid[k]);
    };

    SimplexResult res;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        sort_vertices();
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        if (std::isfinite(fv[best]) && fv[worst] - fv[best] <= opt.ftol * std::abs(fv[best]) + opt.fabs_floor) {
            res.converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                centroid[k] += v[order[i]][k] / static_cast<double>(n);

        along(-1.0, v[worst], trial);
        const double fr = eval(trial);
        if (fr < fv[best]) {
            along(-2.0, v[worst], trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                v[worst] = trial2;
                fv[worst] = fe;
            } else {
                v[worst] = trial;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            v[worst] = trial;
            fv[worst] = fr;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point.
        const bool outside = fr < fv[worst];
        along(outside ? -0.5 : 0.5, v[worst], trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : fv[worst])) {
            v[worst] = trial2;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            const std::size_t idx = order[i];
            for (std::size_t k = 0; k < n; ++k)
                v[idx][k] = v[best][k] + 0.5 * (v[idx][k] - v[best][k]);
            fv[idx] = eval(v[idx]);
        }
    }
    sort_vertices();
    res.x = v[order.front()];
    res.value = fv[order.front()];
    res.iterations = it;
    return res;
}

}  // namespace shsaw
