#pragma once

// End-to-end design flow: seed a ladder from the technology figures,
// optimize it, and size every resonator physically.

#include <shsaw/documents.hpp>
#include <shsaw/io.hpp>
#include <shsaw/ladder.hpp>
#include <shsaw/layout.hpp>
#include <shsaw/mbvd.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace shsaw {

struct ResonatorDesign {
    StageRole role;
    ResonatorFigures figures;
    PeriodSelection period;
    ResonatorLayout conventional;
    ResonatorLayout apodized;
};

struct DesignResult {
    OptimizeResult optimized;
    std::vector<ResonatorDesign> resonators;  // shunt first, then series
};

inline MbvdModel with_spurious_branches(MbvdModel m, const std::vector<SpuriousBranchSpec>& spurs) {
    const MotionalBranch main = m.main();
    const double fs = main.series_resonance();
    for (const auto& s : spurs) {
        const double c_m = s.relative_coupling * main.c_m;
        const double w = 2.0 * std::numbers::pi * fs * s.relative_frequency;
        const double l_m = 1.0 / (w * w * c_m);
        m.branches.push_back({std::sqrt(l_m / c_m) / s.q, l_m, c_m});
    }
    m.validate();
    return m;
}

// Conventional layout sized from C_0; the apodized variant keeps the
// aperture and rescales only the electrode count.
inline ResonatorDesign size_resonator(StageRole role, const MbvdModel& m, const DispersionTable& table,
                                      const Technology& tech, const ApodizationConfig& apod) {
    ResonatorDesign r{role, resonator_figures(m), {}, {}, {}};
    r.period = select_period(table, r.figures.f_s);
    r.conventional = dimension_from_c0(m.c_0, r.period.lambda_um, tech.capacitance, ApodizationWindow::uniform(),
                                       tech.aperture_bounds_um);
    r.apodized = r.conventional;
    r.apodized.window = apod.window;
    r.apodized.n_e = scale_fingers(r.conventional.n_e, apod.window, apod.calibration);
    r.apodized.c0 = layout_capacitance(tech.capacitance, r.apodized.n_e, r.apodized.aperture_um, apod.window);
    return r;
}

inline DesignResult run_design(const ProjectConfig& cfg) {
    const Technology& tech = cfg.technology;
    const DispersionTable table = parse_dispersion_table(read_file(tech.dispersion_table));

    LadderTopology t0 = init_design(cfg.targets, tech.k2, tech.q_shunt, tech.q_series, tech.c0_shunt, tech.c0_series);
    if (!tech.spurious_branches.empty())
        for (Stage& st : t0.stages)
            st.model = with_spurious_branches(st.model, tech.spurious_branches);

    OptimizeOptions opt;
    opt.c0_min = tech.c0_min;
    opt.c0_max = tech.c0_max;
    DesignResult out;
    out.optimized = optimize(t0, cfg.targets, cfg.grid.make(), opt);

    for (StageRole role : {StageRole::shunt, StageRole::series}) {
        for (const Stage& st : out.optimized.topology.stages) {
            if (st.role != role)
                continue;
            out.resonators.push_back(size_resonator(role, st.model, table, tech, cfg.apodization));
            break;
        }
    }
    return out;
}

inline json design_document(const ProjectConfig& cfg, const DesignResult& d) {
    json resonators = json::object();
    for (const auto& r : d.resonators) {
        resonators[r.role == StageRole::shunt ? "shunt" : "series"] = {
            {"figures", to_json_value(r.figures)},
            {"period", {{"lambda_um", r.period.lambda_um}, {"k2", r.period.k2}}},
            {"conventional", to_json_value(r.conventional)},
            {"apodized", to_json_value(r.apodized)},
            {"apodization_calibration", cfg.apodization.calibration ? json(*cfg.apodization.calibration) : json(nullptr)}};
    }
    json spurs = json::array();
    for (const auto& s : cfg.technology.spurious_branches)
        spurs.push_back({{"relative_frequency", s.relative_frequency},
                         {"relative_coupling", s.relative_coupling},
                         {"q", s.q},
                         {"label", s.label}});
    return {{"tool", tool_banner()},
            {"config_hash", cfg.hash},
            {"targets", to_json_value(cfg.targets)},
            {"topology", to_json_value(d.optimized.topology)},
            {"metrics", to_json_value(d.optimized.metrics)},
            {"cost", d.optimized.cost},
            {"initial_cost", d.optimized.initial_cost},
            {"optimizer_iterations", d.optimized.iterations},
            {"spurious_branches", spurs},
            {"resonators", resonators}};
}

}  // namespace shsaw
