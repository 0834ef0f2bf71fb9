#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coreg/error.hpp"

namespace coreg {

/// Shortest text that round-trips a double exactly (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes content to path via a temp file and rename, so readers never see
/// a partially written artifact.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename to " + path.string() + " failed: " + ec.message());
}

/// Numeric table read from CSV: header names plus a samples-by-columns
/// value matrix.
struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows = samples

    Eigen::Index column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<Eigen::Index>(i);
        throw invalid_input("column '" + name + "' not found in CSV header");
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        std::size_t a = 0, b = f.size();
        while (a < b && std::isspace(static_cast<unsigned char>(f[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(f[b - 1]))) --b;
        f = f.substr(a, b - a);
    }
    return fields;
}

}  // namespace detail

/// Reads a numeric CSV with a header row. Errors carry 1-based row/column
/// coordinates for ragged rows and non-numeric cells.
inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw io_error(path.string() + ": empty file, expected a header row");
    CsvTable table;
    table.columns = detail::split_csv_line(line);
    const std::size_t ncol = table.columns.size();
    if (ncol == 0 || (ncol == 1 && table.columns[0].empty()))
        throw io_error(path.string() + ": header row has no columns");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != ncol)
            throw io_error(path.string() + ": row " + std::to_string(lineno) +
                           " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(ncol));
        std::vector<double> row(ncol);
        for (std::size_t c = 0; c < ncol; ++c) {
            try {
                std::size_t used = 0;
                row[c] = std::stod(fields[c], &used);
                if (used != fields[c].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw io_error(path.string() + ": row " + std::to_string(lineno) +
                               ", column " + std::to_string(c + 1) + " ('" +
                               table.columns[c] + "'): cannot parse '" +
                               fields[c] + "' as a number");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw io_error(path.string() + ": no data rows below the header");

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(ncol));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < ncol; ++c)
            table.values(static_cast<Eigen::Index>(r),
                         static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

/// Writes a numeric CSV (header + full-precision values), atomically.
inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& columns,
                      const Eigen::MatrixXd& values) {
    if (values.cols() != static_cast<Eigen::Index>(columns.size()))
        throw dimension_error("write_csv: header/value column mismatch");
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out << ',';
        out << columns[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) out << ',';
            out << format_double(values(r, c));
        }
        out << '\n';
    }
    atomic_write(path, out.str());
}

}  // namespace coreg
