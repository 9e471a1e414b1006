#pragma once

// JSON encodings for models, designs, metrics, layouts and fit reports,
// and the project configuration document.

#include <shsaw/extraction.hpp>
#include <shsaw/io.hpp>
#include <shsaw/ladder.hpp>
#include <shsaw/layout.hpp>
#include <shsaw/mbvd.hpp>

#include <json.hpp>

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace shsaw {

using nlohmann::json;

inline constexpr const char* kToolName = "shsaw";
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string tool_banner() { return std::string(kToolName) + " " + kToolVersion; }

// ---------------------------------------------------------------------------
// Models and topologies

inline json to_json_value(const MbvdModel& m) {
    json branches = json::array();
    for (const auto& b : m.branches)
        branches.push_back({{"r_m_ohm", b.r_m}, {"l_m_h", b.l_m}, {"c_m_f", b.c_m}});
    return {{"r_s_ohm", m.r_s}, {"r_0_ohm", m.r_0}, {"c_0_f", m.c_0}, {"branches", branches}};
}

inline MbvdModel model_from_json(const json& j) {
    MbvdModel m;
    m.r_s = j.at("r_s_ohm").get<double>();
    m.r_0 = j.at("r_0_ohm").get<double>();
    m.c_0 = j.at("c_0_f").get<double>();
    for (const auto& b : j.at("branches"))
        m.branches.push_back({b.at("r_m_ohm").get<double>(), b.at("l_m_h").get<double>(), b.at("c_m_f").get<double>()});
    m.validate();
    return m;
}

inline json to_json_value(const LadderTopology& t) {
    json stages = json::array();
    for (const auto& st : t.stages)
        stages.push_back({{"role", st.role == StageRole::shunt ? "shunt" : "series"}, {"model", to_json_value(st.model)}});
    return {{"stages", stages}};
}

inline LadderTopology topology_from_json(const json& j) {
    LadderTopology t;
    for (const auto& s : j.at("stages")) {
        const std::string role = s.at("role").get<std::string>();
        if (role != "shunt" && role != "series")
            throw Error("unknown stage role '" + role + "'");
        t.stages.push_back({role == "shunt" ? StageRole::shunt : StageRole::series, model_from_json(s.at("model"))});
    }
    if (t.stages.empty())
        throw Error("topology has no stages");
    return t;
}

inline json to_json_value(const ResonatorFigures& f) {
    json q = f.q.is_infinite() ? json("infinite") : json(f.q.value());
    return {{"f_s_hz", f.f_s}, {"f_p_hz", f.f_p}, {"q", q}, {"k2", f.k2}, {"c_0_f", f.c_0}};
}

inline json to_json_value(const FilterMetrics& m) {
    return {{"il_db", m.il_db},
            {"f_center_hz", m.f_center},
            {"fbw_3db", m.fbw_3db},
            {"oob_rejection_db", m.oob_rejection_db},
            {"max_inband_s11_db", m.max_inband_s11_db},
            {"f_lower_3db_hz", m.f_lower_3db},
            {"f_upper_3db_hz", m.f_upper_3db}};
}

inline FilterMetrics metrics_from_json(const json& j) {
    FilterMetrics m;
    m.il_db = j.at("il_db").get<double>();
    m.f_center = j.at("f_center_hz").get<double>();
    m.fbw_3db = j.at("fbw_3db").get<double>();
    // No stopbands leaves the rejection unbounded, which JSON stores as null.
    const json& rej = j.at("oob_rejection_db");
    m.oob_rejection_db = rej.is_null() ? std::numeric_limits<double>::infinity() : rej.get<double>();
    m.max_inband_s11_db = j.at("max_inband_s11_db").get<double>();
    m.f_lower_3db = j.at("f_lower_3db_hz").get<double>();
    m.f_upper_3db = j.at("f_upper_3db_hz").get<double>();
    return m;
}

inline json to_json_value(const DesignTargets& t) {
    json bands = json::array();
    for (const auto& b : t.stopbands)
        bands.push_back({b.f_lo, b.f_hi});
    return {{"f_center_hz", t.f_center},
            {"fbw_3db", t.fbw_3db},
            {"z_ref_ohm", t.z_ref},
            {"stopbands_hz", bands},
            {"min_rejection_db", t.min_rejection_db}};
}

inline DesignTargets targets_from_json(const json& j) {
    DesignTargets t;
    t.f_center = j.at("f_center_hz").get<double>();
    t.fbw_3db = j.at("fbw_3db").get<double>();
    t.z_ref = j.value("z_ref_ohm", 50.0);
    for (const auto& b : j.value("stopbands_hz", json::array())) {
        if (!b.is_array() || b.size() != 2)
            throw Error("stopbands_hz entries must be [f_lo, f_hi] pairs");
        t.stopbands.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    t.min_rejection_db = j.value("min_rejection_db", 0.0);
    t.validate();
    return t;
}

inline json to_json_value(const ApodizationWindow& w) {
    if (w.kind == WindowKind::uniform)
        return {{"kind", "uniform"}};
    return {{"kind", "bartlett"}, {"a", w.a}};
}

inline json to_json_value(const ResonatorLayout& l) {
    return {{"lambda_um", l.lambda_um},
            {"aperture_um", l.aperture_um},
            {"n_e", l.n_e},
            {"window", to_json_value(l.window)},
            {"c_0_f", l.c0}};
}

inline json to_json_value(const FitReport& r) {
    return {{"model", to_json_value(r.model)},
            {"figures", to_json_value(resonator_figures(r.model))},
            {"residual", r.residual},
            {"n_iterations", r.n_iterations},
            {"converged", r.converged}};
}

// ---------------------------------------------------------------------------
// Project configuration

// Extra motional branch attached to every designed resonator, placed
// relative to the resonator's main tone.
struct SpuriousBranchSpec {
    double relative_frequency = 1.0;  // f_spur / f_s(main)
    double relative_coupling = 0.0;   // c_m(spur) / c_m(main)
    double q = 0.0;
    std::string label;
};

struct Technology {
    double k2 = 0.0;
    double q_shunt = 0.0;
    double q_series = 0.0;
    double c0_shunt = 0.0;   // F, optimizer seed
    double c0_series = 0.0;  // F, optimizer seed
    double c0_min = 0.0;
    double c0_max = 0.0;
    CapacitanceModel capacitance;
    std::pair<double, double> aperture_bounds_um;
    std::filesystem::path dispersion_table;
    std::vector<SpuriousBranchSpec> spurious_branches;
};

struct ApodizationConfig {
    ApodizationWindow window;
    std::optional<double> calibration;
};

struct GridSpec {
    double f_start = 0.0;
    double f_stop = 0.0;
    std::size_t points = 0;
    Spacing spacing = Spacing::linear;

    FrequencyGrid make() const { return make_grid(f_start, f_stop, points, spacing); }
};

struct ProjectConfig {
    DesignTargets targets;
    Technology technology;
    ApodizationConfig apodization;
    GridSpec grid;
    std::filesystem::path output_directory;
    std::string hash;  // SHA-256 of the configuration document bytes
};

inline ApodizationWindow window_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform")
        return ApodizationWindow::uniform();
    if (kind == "bartlett")
        return ApodizationWindow::bartlett(j.at("a").get<double>());
    throw Error("unknown apodization window '" + kind + "'");
}

// Relative paths resolve against base_dir (the configuration's directory).
inline ProjectConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    try {
        ProjectConfig c;
        c.hash = sha256_hex(text);
        c.targets = targets_from_json(j.at("targets"));

        const json& t = j.at("technology");
        Technology& tech = c.technology;
        tech.k2 = t.at("k2").get<double>();
        tech.q_shunt = t.at("q_shunt").get<double>();
        tech.q_series = t.at("q_series").get<double>();
        tech.c0_shunt = t.at("c0_shunt_f").get<double>();
        tech.c0_series = t.at("c0_series_f").get<double>();
        const auto bounds = t.at("c0_bounds_f").get<std::vector<double>>();
        if (bounds.size() != 2 || !(bounds[0] > 0.0 && bounds[1] > bounds[0]))
            throw Error("config: c0_bounds_f must be [min, max] with 0 < min < max");
        tech.c0_min = bounds[0];
        tech.c0_max = bounds[1];
        tech.capacitance.c_per_pair_per_um = t.at("capacitance_per_pair_per_um_f").get<double>();
        if (!(tech.capacitance.c_per_pair_per_um > 0.0))
            throw Error("config: capacitance_per_pair_per_um_f must be positive");
        const auto ap = t.at("aperture_bounds_um").get<std::vector<double>>();
        if (ap.size() != 2 || !(ap[0] > 0.0 && ap[1] >= ap[0]))
            throw Error("config: aperture_bounds_um must be [min, max] with 0 < min <= max");
        tech.aperture_bounds_um = {ap[0], ap[1]};
        tech.dispersion_table = base_dir / t.at("dispersion_table").get<std::string>();
        if (!std::filesystem::is_regular_file(tech.dispersion_table))
            throw Error("config: dispersion table not found: " + tech.dispersion_table.string());
        for (const auto& s : t.value("spurious_branches", json::array())) {
            SpuriousBranchSpec spec{s.at("relative_frequency").get<double>(), s.at("relative_coupling").get<double>(),
                                    s.at("q").get<double>(), s.value("label", std::string())};
            if (!(spec.relative_frequency > 0.0 && spec.relative_coupling > 0.0 && spec.q > 0.0))
                throw Error("config: spurious branch values must be positive");
            tech.spurious_branches.push_back(spec);
        }
        if (!(tech.k2 > 0.0 && tech.k2 < 0.2 && tech.q_shunt > 0.0 && tech.q_series > 0.0 && tech.c0_shunt > 0.0 &&
              tech.c0_series > 0.0))
            throw Error("config: technology values out of range");

        const json& a = j.at("apodization");
        c.apodization.window = window_from_json(a.at("window"));
        if (a.contains("calibration") && !a.at("calibration").is_null()) {
            c.apodization.calibration = a.at("calibration").get<double>();
            if (!(*c.apodization.calibration > 0.0))
                throw Error("config: apodization calibration must be positive");
        }

        const json& g = j.at("grid");
        c.grid.f_start = g.at("f_start_hz").get<double>();
        c.grid.f_stop = g.at("f_stop_hz").get<double>();
        c.grid.points = g.at("points").get<std::size_t>();
        const std::string spacing = g.value("spacing", std::string("linear"));
        if (spacing != "linear" && spacing != "log")
            throw Error("config: grid spacing must be 'linear' or 'log'");
        c.grid.spacing = spacing == "log" ? Spacing::log : Spacing::linear;
        (void)c.grid.make();

        c.output_directory = base_dir / j.value("output_directory", std::string("."));
        return c;
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
}

inline ProjectConfig load_config(const std::filesystem::path& p) {
    return parse_config(read_file(p), p.parent_path().empty() ? std::filesystem::path(".") : p.parent_path());
}

}  // namespace shsaw
