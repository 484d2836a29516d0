#pragma once

// Machine-readable outputs. Every table is written twice: NDJSON (one JSON
// object per row) at the given path and a CSV mirror next to it with the
// extension replaced by ".csv".

#include <string>
#include <vector>

#include "mpes/monitors.hpp"
#include "mpes/verification.hpp"

namespace mpes {

std::string csv_mirror_path(const std::string& path);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Non-finite values are written as JSON null and as "nan"/"inf" in CSV.
void write_table(const std::string& path, const Table& table);

/// Columns "t" followed by norm_report_keys().
Table norm_table(const std::vector<NormReport>& series);

/// Rows {"name", "value", "lo", "hi", "pass"}.
void write_rows(const std::string& path, const std::vector<ConvergenceRow>& rows);

} // namespace mpes
