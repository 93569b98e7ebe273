#pragma once

#include <string>
#include <vector>

namespace pnsim {

/// One tidy CSV column (header + cells, already formatted).
struct CsvColumn {
    std::string header;
    std::vector<std::string> cells;
};

std::string format_double(double v);
std::vector<std::string> format_doubles(const std::vector<double>& v);

/// Render equal-length columns as CSV (header row + data rows, '\n' endings).
std::string render_csv(const std::vector<CsvColumn>& columns);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

/// Write content to path + ".partial", then rename to path.
/// Throws std::runtime_error on I/O failure (the .partial file is kept).
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace pnsim
