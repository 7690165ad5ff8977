#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pfl::io {

/// Header plus numeric rows. Every row has header.size() entries.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);

/// Shortest representation that round-trips through strtod.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

} // namespace pfl::io
