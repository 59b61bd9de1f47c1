// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace vsim::csv {

namespace {

void append_number(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

void append_c_value(std::string& line, double v) {
    if (std::isnan(v)) {
        line += "NA";
    } else {
        append_number(line, v);
    }
}

}  // namespace

std::vector<std::string> column_names(bool with_stderr, bool with_mean_of_measures) {
    std::vector<std::string> names = {"t_fs",      "rho_gg",   "rho_11", "rho_22", "rho_tt",
                                      "re_rho12", "im_rho12", "abs_rho12", "C"};
    if (with_stderr) {
        names.push_back("stderr_re_rho12");
        names.push_back("stderr_im_rho12");
    }
    if (with_mean_of_measures) names.push_back("C_mean_of_realizations");
    return names;
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record,
                          const StderrColumns& extra) {
    const bool with_stderr = extra.re != nullptr && extra.im != nullptr;
    const bool with_measures = extra.mean_of_measures != nullptr;

    std::ofstream out(path, std::ios::binary);  // '\n' line endings everywhere
    if (!out) throw SimError("cannot open '" + path + "' for writing");

    std::string line;
    const auto names = column_names(with_stderr, with_measures);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) line += ',';
        line += names[i];
    }
    line += '\n';
    out << line;

    for (std::size_t k = 0; k < record.n_samples(); ++k) {
        line.clear();
        append_number(line, record.grid.time(k));
        line += ',';
        append_number(line, record.rho_gg[k]);
        line += ',';
        append_number(line, record.rho_11[k]);
        line += ',';
        append_number(line, record.rho_22[k]);
        line += ',';
        append_number(line, record.rho_tt[k]);
        line += ',';
        append_number(line, record.rho_12[k].real());
        line += ',';
        append_number(line, record.rho_12[k].imag());
        line += ',';
        append_number(line, std::abs(record.rho_12[k]));
        line += ',';
        append_c_value(line, record.C[k]);
        if (with_stderr) {
            line += ',';
            append_number(line, (*extra.re)[k]);
            line += ',';
            append_number(line, (*extra.im)[k]);
        }
        if (with_measures) {
            line += ',';
            append_c_value(line, (*extra.mean_of_measures)[k]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw SimError("write to '" + path + "' failed");
}

std::optional<std::size_t> Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::vector<double> Table::numeric(const std::string& name) const {
    const auto idx = column(name);
    if (!idx) throw SimError("csv column '" + name + "' not found");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const std::string& cell = row[*idx];
        out.push_back(cell == "NA" ? std::numeric_limits<double>::quiet_NaN()
                                   : std::stod(cell));
    }
    return out;
}

Table load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SimError("cannot open csv '" + path + "'");
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

std::string check_trajectory_schema(const std::string& path, std::size_t expected_rows) {
    Table table;
    try {
        table = load_csv(path);
    } catch (const SimError& err) {
        return err.what();
    }

    const auto base = column_names(false, false);
    if (table.header.size() < base.size()) return "missing columns";
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (table.header[i] != base[i]) {
            return "column " + std::to_string(i) + " is '" + table.header[i] + "', expected '" +
                   base[i] + "'";
        }
    }
    if (table.rows.size() != expected_rows) {
        return "expected " + std::to_string(expected_rows) + " rows, found " +
               std::to_string(table.rows.size());
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            return "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " cells";
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            const bool is_c_column = table.header[c] == "C" ||
                                     table.header[c] == "C_mean_of_realizations";
            if (row[c] == "NA") {
                if (!is_c_column) {
                    return "row " + std::to_string(r) + ": NA outside a C column";
                }
                continue;
            }
            try {
                const double v = std::stod(row[c]);
                if (!std::isfinite(v)) return "row " + std::to_string(r) + ": non-finite value";
            } catch (const std::exception&) {
                return "row " + std::to_string(r) + ": cell '" + row[c] + "' is not numeric";
            }
        }
    }
    return {};
}

}  // namespace vsim::csv
