#pragma once

// Minimal CSV support for the flat, unquoted files this project reads and
// writes (recordings, manifests, datasets, lookup tables).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ergorisk::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws Error{MalformedInput} naming the column.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

/// Reads a header line plus data rows. Blank lines are skipped, a UTF-8 BOM
/// and trailing '\r' are tolerated. Throws Error{Io} if the file can't be opened.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& source_name = "<memory>");

/// Strict numeric parse; `context` is used in the error message.
double to_double(std::string_view cell, std::string_view context);
long long to_int(std::string_view cell, std::string_view context);

/// Shortest round-trip representation.
std::string format(double value);

/// Writes to `path` via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ergorisk::csv
