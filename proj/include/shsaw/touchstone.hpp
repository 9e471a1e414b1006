#pragma once

// Touchstone version 1 (.s1p / .s2p) reading and writing.
//
// Parameters are kept per frequency in file order: {P11} for one-port data,
// {P11, P21, P12, P22} for two-port data. Y and Z values stay normalized to
// the reference resistance, as the format stores them; to_admittance and
// to_two_port undo that.

#include <shsaw/netcore.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shsaw {

enum class ParameterType { S, Y, Z };
enum class DataFormat { RI, MA, DB };

struct TouchstoneData {
    int n_ports = 1;
    // Hz, strictly increasing. A single row is valid file content, so this
    // is not a FrequencyGrid until grid() is asked for.
    std::vector<double> frequencies;
    std::vector<std::vector<Complex>> parameters;
    std::string frequency_unit = "HZ";  // unit used by the source file
    ParameterType type = ParameterType::S;
    DataFormat format = DataFormat::RI;
    double reference_resistance = 50.0;

    FrequencyGrid grid() const { return FrequencyGrid(frequencies); }
};

struct Provenance {
    std::string tool;
    std::string config_hash;
};

namespace detail {

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

[[noreturn]] inline void touchstone_error(std::size_t line, const std::string& what) {
    throw Error("touchstone line " + std::to_string(line) + ": " + what);
}

inline Complex decode_pair(double x, double y, DataFormat fmt) {
    const double deg = std::numbers::pi / 180.0;
    switch (fmt) {
        case DataFormat::RI: return {x, y};
        case DataFormat::MA: return std::polar(x, y * deg);
        case DataFormat::DB: return std::polar(std::pow(10.0, x / 20.0), y * deg);
    }
    return {};
}

}  // namespace detail

inline TouchstoneData read_touchstone(std::string_view text) {
    TouchstoneData d;
    double unit_scale = 1e9;  // format default: GHz, S, MA, R 50
    d.frequency_unit = "GHZ";
    d.format = DataFormat::MA;
    bool have_options = false;

    std::vector<double> freqs;
    std::size_t columns = 0;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto bang = line.find('!'); bang != std::string::npos)
            line.erase(bang);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;

        if (first[0] == '#') {
            if (have_options)
                continue;
            have_options = true;
            std::vector<std::string> tokens;
            if (first.size() > 1)
                tokens.push_back(first.substr(1));
            for (std::string t; ls >> t;)
                tokens.push_back(t);
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                const std::string t = detail::upper(tokens[i]);
                if (t == "HZ" || t == "KHZ" || t == "MHZ" || t == "GHZ") {
                    d.frequency_unit = t;
                    unit_scale = t == "HZ" ? 1.0 : t == "KHZ" ? 1e3 : t == "MHZ" ? 1e6 : 1e9;
                } else if (t == "S") {
                    d.type = ParameterType::S;
                } else if (t == "Y") {
                    d.type = ParameterType::Y;
                } else if (t == "Z") {
                    d.type = ParameterType::Z;
                } else if (t == "RI") {
                    d.format = DataFormat::RI;
                } else if (t == "MA") {
                    d.format = DataFormat::MA;
                } else if (t == "DB") {
                    d.format = DataFormat::DB;
                } else if (t == "R") {
                    if (i + 1 >= tokens.size())
                        detail::touchstone_error(line_no, "malformed option line: R without a value");
                    char* end = nullptr;
                    const std::string& v = tokens[++i];
                    const double r = std::strtod(v.c_str(), &end);
                    if (end != v.c_str() + v.size() || !(r > 0.0) || !std::isfinite(r))
                        detail::touchstone_error(line_no, "malformed option line: bad reference resistance '" + v + "'");
                    d.reference_resistance = r;
                } else {
                    detail::touchstone_error(line_no, "malformed option line: unknown token '" + tokens[i] + "'");
                }
            }
            continue;
        }

        std::vector<double> values;
        for (std::istringstream row(line);;) {
            std::string tok;
            if (!(row >> tok))
                break;
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size() || !std::isfinite(v))
                detail::touchstone_error(line_no, "not a number: '" + tok + "'");
            values.push_back(v);
        }
        if (columns == 0) {
            if (values.size() != 3 && values.size() != 9)
                detail::touchstone_error(line_no, "wrong column count " + std::to_string(values.size()) +
                                                      " (expected 3 for one-port or 9 for two-port)");
            columns = values.size();
            d.n_ports = columns == 3 ? 1 : 2;
        } else if (values.size() != columns) {
            detail::touchstone_error(line_no, "wrong column count " + std::to_string(values.size()) + " (expected " +
                                                  std::to_string(columns) + ")");
        }
        const double f = values[0] * unit_scale;
        if (!freqs.empty() && !(f > freqs.back()))
            detail::touchstone_error(line_no, "frequency is not strictly increasing");
        if (!(f > 0.0))
            detail::touchstone_error(line_no, "frequency must be positive");
        freqs.push_back(f);
        std::vector<Complex> p;
        for (std::size_t k = 1; k + 1 < values.size(); k += 2)
            p.push_back(detail::decode_pair(values[k], values[k + 1], d.format));
        d.parameters.push_back(std::move(p));
    }
    if (freqs.empty())
        throw Error("touchstone: no data rows");
    d.frequencies = std::move(freqs);
    return d;
}

namespace detail {

inline void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace detail

// Frequencies are always written in Hz. RI values carry 17 significant digits.
inline std::string write_touchstone(const TouchstoneData& d, DataFormat format, const Provenance& prov = {}) {
    std::string out;
    out += "! " + (prov.tool.empty() ? std::string("shsaw") : prov.tool);
    if (!prov.config_hash.empty())
        out += " config-hash " + prov.config_hash;
    out += '\n';
    const char* type = d.type == ParameterType::S ? "S" : d.type == ParameterType::Y ? "Y" : "Z";
    const char* fmt = format == DataFormat::RI ? "RI" : format == DataFormat::MA ? "MA" : "DB";
    out += std::string("# HZ ") + type + " " + fmt + " R ";
    detail::append_number(out, d.reference_resistance);
    out += '\n';
    const double deg = 180.0 / std::numbers::pi;
    for (std::size_t i = 0; i < d.frequencies.size(); ++i) {
        detail::append_number(out, d.frequencies[i]);
        for (const Complex& z : d.parameters[i]) {
            double x = z.real(), y = z.imag();
            if (format == DataFormat::MA) {
                x = std::abs(z);
                y = std::arg(z) * deg;
            } else if (format == DataFormat::DB) {
                x = 20.0 * std::log10(std::abs(z));
                y = std::arg(z) * deg;
            }
            out += ' ';
            detail::append_number(out, x);
            out += ' ';
            detail::append_number(out, y);
        }
        out += '\n';
    }
    return out;
}

inline TouchstoneData from_two_port(const TwoPortResponse& r) {
    TouchstoneData d;
    d.n_ports = 2;
    d.frequencies = r.grid.points();
    d.type = ParameterType::S;
    d.reference_resistance = r.z_ref;
    for (const auto& s : r.s)
        d.parameters.push_back({s.s11, s.s21, s.s12, s.s22});
    return d;
}

inline TouchstoneData from_one_port(const OnePortResponse& r) {
    TouchstoneData d;
    d.n_ports = 1;
    d.frequencies = r.grid.points();
    d.type = ParameterType::S;
    d.reference_resistance = r.z_ref;
    for (std::size_t i = 0; i < r.y.size(); ++i)
        d.parameters.push_back({r.s11(i)});
    return d;
}

inline TwoPortResponse to_two_port(const TouchstoneData& d) {
    if (d.n_ports != 2 || d.type != ParameterType::S)
        throw Error("expected two-port S-parameter data");
    TwoPortResponse r{d.grid(), {}, d.reference_resistance};
    for (const auto& p : d.parameters)
        r.s.push_back({p[0], p[2], p[1], p[3]});
    return r;
}

// One-port data of any parameter type as admittance.
inline OnePortResponse to_admittance(const TouchstoneData& d) {
    if (d.n_ports != 1)
        throw Error("expected one-port data");
    const double r0 = d.reference_resistance;
    OnePortResponse out{d.grid(), {}, r0};
    for (const auto& p : d.parameters) {
        const Complex v = p[0];
        switch (d.type) {
            case ParameterType::S: out.y.push_back((1.0 - v) / (r0 * (1.0 + v))); break;
            case ParameterType::Y: out.y.push_back(v / r0); break;
            case ParameterType::Z: out.y.push_back(1.0 / (v * r0)); break;
        }
    }
    return out;
}

}  // namespace shsaw
