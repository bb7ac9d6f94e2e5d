#pragma once

// Dataset serialization: `# key=value` metadata header block followed by a
// `phase,value` CSV body at full decimal round-trip precision.

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "actmedia/homodyne.hpp"

namespace actmedia {

/// Raised on malformed dataset files; `line` is 1-based, 0 when the
/// problem is not tied to a specific line.
struct DatasetFormatError : std::runtime_error {
    int line;
    DatasetFormatError(const std::string& msg, int line_no)
        : std::runtime_error(msg), line(line_no) {}
};

namespace detail {

// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

inline double parse_double(const std::string& s, const char* what, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DatasetFormatError(std::string("bad ") + what + " value '" + s + "'",
                                 line_no);
    }
}

}  // namespace detail

inline void write_dataset(std::ostream& os, const Dataset& ds) {
    using detail::format_double;
    os << "# alpha_re=" << format_double(ds.probe.alpha_re) << "\n";
    os << "# alpha_im=" << format_double(ds.probe.alpha_im) << "\n";
    os << "# g1=" << format_double(ds.config.gains.g1) << "\n";
    os << "# g2=" << format_double(ds.config.gains.g2) << "\n";
    os << "# t=" << format_double(ds.config.time) << "\n";
    os << "# eta=" << format_double(ds.config.eta) << "\n";
    os << "# n=" << ds.samples.size() << "\n";
    os << "# seed=" << ds.seed << "\n";
    os << "# generator=" << ds.generator << "\n";
    os << "phase,value\n";
    for (const auto& s : ds.samples) {
        os << format_double(s.phase) << "," << format_double(s.value) << "\n";
    }
}

inline Dataset read_dataset(std::istream& is) {
    Dataset ds;
    std::map<std::string, std::string> meta;
    std::string line;
    int line_no = 0;
    bool header_seen = false;

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const std::size_t start = body.find_first_not_of(' ');
            if (start == std::string::npos) continue;
            body = body.substr(start);
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) {
                throw DatasetFormatError("metadata line missing '='", line_no);
            }
            meta[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        if (!header_seen) {
            if (line != "phase,value") {
                throw DatasetFormatError(
                    "expected header 'phase,value', got '" + line + "'", line_no);
            }
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw DatasetFormatError("expected 'phase,value' row", line_no);
        }
        QuadratureSample s;
        s.phase = detail::parse_double(line.substr(0, comma), "phase", line_no);
        s.value = detail::parse_double(line.substr(comma + 1), "value", line_no);
        ds.samples.push_back(s);
    }
    if (!header_seen) {
        throw DatasetFormatError("missing 'phase,value' header", line_no);
    }
    if (ds.samples.empty()) {
        throw DatasetFormatError("dataset contains no samples", line_no);
    }

    const auto meta_double = [&](const char* key, double fallback,
                                 bool required) -> double {
        const auto it = meta.find(key);
        if (it == meta.end()) {
            if (required) {
                throw DatasetFormatError(std::string("missing metadata key '") + key + "'", 0);
            }
            return fallback;
        }
        return detail::parse_double(it->second, key, 0);
    };
    ds.probe.alpha_re = meta_double("alpha_re", 0.0, true);
    ds.probe.alpha_im = meta_double("alpha_im", 0.0, false);
    ds.config.gains.g1 = meta_double("g1", 0.0, false);
    ds.config.gains.g2 = meta_double("g2", 0.0, false);
    ds.config.time = meta_double("t", 1.0, true);
    ds.config.eta = meta_double("eta", 1.0, true);
    ds.seed = meta.count("seed") ? std::stoull(meta.at("seed")) : 0;
    if (meta.count("generator")) ds.generator = meta.at("generator");
    return ds;
}

inline void write_dataset_file(const std::string& path, const Dataset& ds) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_dataset(os, ds);
}

inline Dataset read_dataset_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_dataset(is);
}

}  // namespace actmedia
