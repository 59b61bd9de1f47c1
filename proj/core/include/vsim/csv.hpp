// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsim/dynamics.hpp"

namespace vsim::csv {

// Column layout: t_fs, rho_gg, rho_11, rho_22, rho_tt, re_rho12, im_rho12,
// abs_rho12, C; ensemble files append stderr_re_rho12, stderr_im_rho12, and
// optionally C_mean_of_realizations. Undefined C is written as "NA". Numbers
// are %.17g so a byte-identical file implies bit-identical data.
struct StderrColumns {
    const std::vector<double>* re = nullptr;
    const std::vector<double>* im = nullptr;
    const std::vector<double>* mean_of_measures = nullptr;  // optional extra column
};

std::vector<std::string> column_names(bool with_stderr, bool with_mean_of_measures);

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record,
                          const StderrColumns& extra = {});

// Minimal reader for tests and schema checks.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
    // Numeric column; "NA" becomes NaN.
    std::vector<double> numeric(const std::string& name) const;
};

Table load_csv(const std::string& path);

// Verifies header names, row count, and that every cell is finite or "NA"
// (only the C columns may hold "NA"). Returns an error description or empty.
std::string check_trajectory_schema(const std::string& path, std::size_t expected_rows);

}  // namespace vsim::csv
