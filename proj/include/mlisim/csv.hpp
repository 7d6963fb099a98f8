#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mlisim::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by header name; throws DataError when absent.
    std::size_t column(const std::string& name) const;
    /// Column index by header name; nullopt when absent.
    std::optional<std::size_t> find_column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Lines starting with '#'
/// are skipped; CRLF endings tolerated; double-quoted fields supported.
Table read_file(const std::filesystem::path& path);

/// Strict numeric parse of one cell (full string must be consumed).
std::optional<double> parse_double(const std::string& cell);

/// Writes one row with RFC-style quoting of fields containing , " or newline.
void write_row(std::ostream& os, std::span<const std::string> fields);

/// Fixed formatting used by all emitted reports so identical inputs yield
/// byte-identical files.
std::string format_double(double v);

}  // namespace mlisim::csv
