#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cmpslab {

/// RFC-4180 table; the header row is mandatory.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws CsvError if absent
    void add_row(std::vector<std::string> row);        // throws CsvError on width mismatch
};

enum class CsvType { Real, Integer, Bool, Text };

struct CsvColumn {
    std::string name;
    CsvType type{CsvType::Real};
};

/// %.17g, so every double survives a text round trip.
std::string format_real(double value);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

CsvTable read_csv(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Throws CsvError naming the row and column of the first violation: header must equal
/// the schema column names in order, every cell must parse as its column type.
void validate_csv(const CsvTable& table, const std::vector<CsvColumn>& schema);

/// Atomic text write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace cmpslab
