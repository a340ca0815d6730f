#pragma once

// Deterministic CSV output: mandatory header row, comma separator, '.' decimal
// point, 17 significant digits (%.17g, enough to round-trip any double), and
// atomic writes via a temporary file renamed into place, so a failed run never
// leaves a partially written table behind.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace enslab {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::string format_sig17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("io error - cannot open '" + tmp + "' for writing");
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("io error - short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("io error - cannot move '" + tmp + "' into place");
    }
}

inline void write_csv(const std::string& path, const CsvTable& t) {
    if (t.header.empty()) throw std::invalid_argument("csv error - header row is mandatory");
    std::ostringstream out;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c) out << ',';
        out << t.header[c];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size())
            throw std::invalid_argument("csv error - row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_sig17(row[c]);
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv error - cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (lineno == 1) {
            t.header = cells;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const std::string& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0')
                throw std::runtime_error("csv error - " + path + ":" + std::to_string(lineno) +
                                         ": not a number: '" + c + "'");
            row.push_back(v);
        }
        if (row.size() != t.header.size())
            throw std::runtime_error("csv error - " + path + ":" + std::to_string(lineno) +
                                     ": row width does not match the header");
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw std::runtime_error("csv error - '" + path + "' has no header row");
    return t;
}

}  // namespace enslab
