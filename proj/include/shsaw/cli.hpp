#pragma once

// Command-line front end: fit, bodeq, design, simulate, report.
//
// Exit status is 0 on success, 1 on any error (one diagnostic line on the
// error stream), and 2 from `fit` when the optimizer did not converge.
// Every output file is written atomically.

#include <shsaw/documents.hpp>
#include <shsaw/extraction.hpp>
#include <shsaw/io.hpp>
#include <shsaw/ladder.hpp>
#include <shsaw/touchstone.hpp>
#include <shsaw/workflow.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shsaw {

namespace fs = std::filesystem;

namespace detail {

// "f0:f1:n", frequencies in Hz.
inline FrequencyGrid parse_grid_spec(const std::string& spec) {
    const auto a = spec.find(':');
    const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw Error("grid must be given as f_start:f_stop:points");
    try {
        std::size_t used = 0;
        const std::string s0 = spec.substr(0, a), s1 = spec.substr(a + 1, b - a - 1), s2 = spec.substr(b + 1);
        const double f0 = std::stod(s0, &used);
        if (used != s0.size())
            throw std::invalid_argument(s0);
        const double f1 = std::stod(s1, &used);
        if (used != s1.size())
            throw std::invalid_argument(s1);
        const long long n = std::stoll(s2, &used);
        if (used != s2.size() || n < 2)
            throw std::invalid_argument(s2);
        return make_grid(f0, f1, static_cast<std::size_t>(n));
    } catch (const std::logic_error&) {
        throw Error("grid must be given as f_start:f_stop:points");
    }
}

// Three columns: frequency_hz, Re(Y) in S, Im(Y) in S; optional header.
inline OnePortResponse parse_admittance_csv(std::string_view text) {
    std::vector<double> f;
    std::vector<Complex> y;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == '\r' || c == '\t')
                c = ' ';
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        double v[3];
        bool numeric = tok.size() == 3;
        for (std::size_t k = 0; numeric && k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(tok[k].c_str(), &end);
            numeric = end == tok[k].c_str() + tok[k].size();
        }
        if (!numeric) {
            if (f.empty() && line_no == 1)
                continue;
            throw Error("admittance csv line " + std::to_string(line_no) + ": expected frequency_hz,y_re,y_im");
        }
        f.push_back(v[0]);
        y.push_back({v[1], v[2]});
    }
    return {FrequencyGrid(std::move(f)), std::move(y), 50.0};
}

inline std::string metrics_csv(const TwoPortResponse& r, bool s21) {
    std::string out = s21 ? "frequency_hz,s21_db\n" : "frequency_hz,s11_db\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        out += format_number(r.grid[i]);
        out += ',';
        out += format_number(to_db(s21 ? r.s[i].s21 : r.s[i].s11), 12);
        out += '\n';
    }
    return out;
}

inline fs::path sibling_with_suffix(const fs::path& p, const std::string& suffix) {
    fs::path out = p.parent_path() / p.stem();
    out += suffix;
    return out;
}

}  // namespace detail

inline int cmd_fit(const fs::path& in, std::size_t branches, std::uint64_t seed, const fs::path& out) {
    const std::string text = read_file(in);
    OnePortResponse data = in.extension() == ".csv" ? detail::parse_admittance_csv(text)
                                                    : to_admittance(read_touchstone(text));
    const FitReport rep = fit_mbvd(data, branches, seed);
    json doc = to_json_value(rep);
    doc["tool"] = tool_banner();
    doc["source_sha256"] = sha256_hex(text);
    doc["seed"] = seed;
    doc["n_branches"] = branches;
    write_file_atomic(out, doc.dump(2) + "\n");
    return rep.converged ? 0 : 2;
}

inline int cmd_bodeq(const fs::path& in, const fs::path& out) {
    const TouchstoneData d = read_touchstone(read_file(in));
    if (d.n_ports != 1)
        throw Error("bodeq expects one-port data");
    BodeQCurve curve;
    if (d.type == ParameterType::S) {
        std::vector<Complex> s11;
        for (const auto& p : d.parameters)
            s11.push_back(p[0]);
        curve = bode_q_from_reflection(d.grid(), s11);
    } else {
        curve = bode_q(to_admittance(d));
    }
    std::string csv = "frequency_hz,q\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        csv += format_number(curve.grid[i]);
        csv += ',';
        if (curve.q[i])
            csv += format_number(*curve.q[i], 12);
        csv += '\n';
    }
    write_file_atomic(out, csv);
    return 0;
}

inline int cmd_design(const fs::path& config_path, fs::path out) {
    const ProjectConfig cfg = load_config(config_path);
    if (out.empty())
        out = cfg.output_directory / "design.json";
    const DesignResult d = run_design(cfg);
    write_file_atomic(out, design_document(cfg, d).dump(2) + "\n");
    return 0;
}

inline int cmd_simulate(const fs::path& design_path, const std::string& grid_spec, const fs::path& out) {
    json doc;
    try {
        doc = json::parse(read_file(design_path));
    } catch (const json::exception& e) {
        throw Error(std::string("design document: ") + e.what());
    }
    LadderTopology t;
    DesignTargets targets;
    std::string hash;
    try {
        t = topology_from_json(doc.at("topology"));
        targets = targets_from_json(doc.at("targets"));
        hash = doc.value("config_hash", std::string());
    } catch (const json::exception& e) {
        throw Error(std::string("design document: ") + e.what());
    }
    const TwoPortResponse r = simulate(t, detail::parse_grid_spec(grid_spec), targets.z_ref);
    write_file_atomic(out, write_touchstone(from_two_port(r), DataFormat::RI, {tool_banner(), hash}));
    return 0;
}

inline int cmd_report(const fs::path& s2p, const fs::path& config_path, const fs::path& out) {
    const ProjectConfig cfg = load_config(config_path);
    const std::string text = read_file(s2p);
    const TwoPortResponse r = to_two_port(read_touchstone(text));
    const FilterMetrics m = metrics(r, cfg.targets);
    const json doc{{"tool", tool_banner()},
                   {"config_hash", cfg.hash},
                   {"source_sha256", sha256_hex(text)},
                   {"metrics", to_json_value(m)}};
    write_file_atomic(detail::sibling_with_suffix(out, "_s21_db.csv"), detail::metrics_csv(r, true));
    write_file_atomic(detail::sibling_with_suffix(out, "_s11_db.csv"), detail::metrics_csv(r, false));
    write_file_atomic(out, doc.dump(2) + "\n");
    return 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SH-SAW ladder filter design tool", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_banner());

    std::string in, out_path, config, grid;
    std::size_t branches = 1;
    std::uint64_t seed = 1;

    auto* fit = app.add_subcommand("fit", "Fit an mBVD model to one-port data (.s1p or frequency_hz,y_re,y_im .csv)");
    fit->add_option("input", in, "One-port data")->required();
    fit->add_option("--branches", branches, "Number of motional branches")->check(CLI::PositiveNumber);
    fit->add_option("--seed", seed, "Restart seed");
    fit->add_option("-o,--output", out_path, "Report JSON")->required();

    auto* bq = app.add_subcommand("bodeq", "Bode Q curve of one-port data");
    bq->add_option("input", in, "One-port Touchstone file")->required();
    bq->add_option("-o,--output", out_path, "Curve CSV")->required();

    auto* design = app.add_subcommand("design", "Seed, optimize and dimension the ladder filter");
    design->add_option("config", config, "Project configuration JSON")->required();
    design->add_option("-o,--output", out_path, "Design JSON (default: <output_directory>/design.json)");

    auto* sim = app.add_subcommand("simulate", "Simulate a design into a Touchstone two-port file");
    sim->add_option("design", in, "Design JSON")->required();
    sim->add_option("--grid", grid, "f_start:f_stop:points in Hz")->required();
    sim->add_option("-o,--output", out_path, "Output .s2p")->required();

    auto* rep = app.add_subcommand("report", "Filter metrics and plot data from a two-port file");
    rep->add_option("input", in, "Two-port Touchstone file")->required();
    rep->add_option("config", config, "Project configuration JSON")->required();
    rep->add_option("-o,--output", out_path, "Metrics JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_banner() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "shsaw: error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*fit)
            return cmd_fit(in, branches, seed, out_path);
        if (*bq)
            return cmd_bodeq(in, out_path);
        if (*design)
            return cmd_design(config, out_path);
        if (*sim)
            return cmd_simulate(in, grid, out_path);
        if (*rep)
            return cmd_report(in, config, out_path);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n')
                c = ' ';
        err << "shsaw: error: " << msg << "\n";
        return 1;
    }
    return 1;
}

}  // namespace shsaw
