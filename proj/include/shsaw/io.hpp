#pragma once

// File plumbing: whole-file reads, atomic writes, content hashes and the
// dispersion-table text format.

#include <shsaw/layout.hpp>
#include <shsaw/netcore.hpp>

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shsaw {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to a sibling temporary and renames it over the target, so readers
// never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view content) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + p.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("write failed for " + p.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot replace " + p.string());
    }
}

// Lowercase hex SHA-256.
inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

inline std::string format_number(double v, int digits = 17) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Dispersion table text: '#' comments, an optional header line, then rows
// "lambda_um,f_s_hz,k2" separated by commas or whitespace.
inline DispersionTable parse_dispersion_table(std::string_view text) {
    std::vector<DispersionRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t' || c == '\r')
                c = ' ';
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        std::vector<double> v;
        for (const auto& t : tok) {
            char* end = nullptr;
            const double x = std::strtod(t.c_str(), &end);
            if (end != t.c_str() + t.size())
                break;
            v.push_back(x);
        }
        if (v.size() != tok.size()) {
            if (!header_seen && rows.empty()) {
                header_seen = true;
                continue;
            }
            throw Error("dispersion table line " + std::to_string(line_no) + ": not numeric");
        }
        if (v.size() != 3)
            throw Error("dispersion table line " + std::to_string(line_no) + ": expected 3 columns");
        rows.push_back({v[0], v[1], v[2]});
    }
    return DispersionTable(std::move(rows));
}

}  // namespace shsaw
