#pragma once

#include <string>
#include <vector>

namespace dsnav {

/// Shortest round-trip decimal form (std::to_chars); parsing it back yields
/// the identical double, which keeps CSV outputs byte-stable and lossless.
std::string format_double(double v);

/// Strict double parse of a full token. Throws IoError.
double parse_double(const std::string& token);

/// Split one CSV line on commas (no quoting; the formats here never need it).
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws IoError if absent
};

CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dsnav
