#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "crackband/errors.hpp"

namespace crackband {

// One computed dispersion sample. method is one of "root", "reduced",
// "fd_oracle". Failed points keep NaN in E_numeric and carry a note.
struct DispersionPoint {
    double theta = 0.0;
    double epsilon = 0.0;
    std::string method;
    double E_numeric = std::numeric_limits<double>::quiet_NaN();
    double E_asymptotic = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    std::string note; // nonempty if the point failed
};

struct BandTable {
    std::vector<DispersionPoint> rows;
};

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const char kBandCsvHeader[] =
    "theta,epsilon,method,E_numeric,E_asymptotic,residual";

inline std::string band_to_csv(const BandTable& t) {
    std::string out(kBandCsvHeader);
    out += '\n';
    for (const auto& r : t.rows) {
        out += format_g17(r.theta);
        out += ',';
        out += format_g17(r.epsilon);
        out += ',';
        out += r.method;
        out += ',';
        out += format_g17(r.E_numeric);
        out += ',';
        out += format_g17(r.E_asymptotic);
        out += ',';
        out += format_g17(r.residual);
        out += '\n';
    }
    return out;
}

inline void write_band_csv(const BandTable& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_band_csv: cannot open " + path);
    os << band_to_csv(t);
}

inline BandTable read_band_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line))
        throw MalformedData("read_band_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kBandCsvHeader) {
        // Identify which expected column is missing for the diagnostic.
        std::vector<std::string> expected = {"theta",     "epsilon",
                                             "method",    "E_numeric",
                                             "E_asymptotic", "residual"};
        for (const auto& col : expected) {
            if (line.find(col) == std::string::npos)
                throw MalformedData("read_band_csv: missing column '" + col +
                                    "' in header");
        }
        throw MalformedData("read_band_csv: unexpected header '" + line + "'");
    }
    BandTable t;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 6)
            throw MalformedData("read_band_csv: line " + std::to_string(lineno) +
                                " has " + std::to_string(f.size()) +
                                " fields, expected 6");
        DispersionPoint p;
        try {
            p.theta = std::stod(f[0]);
            p.epsilon = std::stod(f[1]);
            p.method = f[2];
            p.E_numeric = std::stod(f[3]);
            p.E_asymptotic = std::stod(f[4]);
            p.residual = std::stod(f[5]);
        } catch (const std::exception&) {
            throw MalformedData("read_band_csv: unparsable number at line " +
                                std::to_string(lineno));
        }
        t.rows.push_back(std::move(p));
    }
    return t;
}

} // namespace crackband
