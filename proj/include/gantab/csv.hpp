#pragma once

// RFC 4180 CSV reading and writing. Quoted fields may contain commas,
// escaped quotes ("") and newlines; CR, LF and CRLF line endings are all
// accepted. Numbers are written with the shortest round-trip representation.

#include <filesystem>
#include <string>
#include <vector>

#include "gantab/error.hpp"

namespace gantab {

class CsvError : public Error {
 public:
  explicit CsvError(const std::string& what) : Error(what) {}
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text, const std::string& origin);
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_quote(const std::string& field);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Strict full-string parse; throws CsvError mentioning `context` on failure
// or on non-finite values.
double parse_double(const std::string& text, const std::string& context);

}  // namespace gantab
