#include "gantab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gantab {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any_field = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_was_quoted = false;
    any_field = true;
  };
  auto end_record = [&] {
    end_field();
    if (out.header.empty()) {
      out.header = record;
    } else {
      if (record.size() != out.header.size())
        throw CsvError(origin + ": line " + std::to_string(line) + ": expected " +
                       std::to_string(out.header.size()) + " fields, got " +
                       std::to_string(record.size()));
      out.rows.push_back(record);
    }
    record.clear();
    any_field = false;
  };

  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw CsvError(origin + ": line " + std::to_string(line) +
                         ": stray quote inside unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        end_record();
        ++line;
        ++i;
        break;
      case '\n':
        end_record();
        ++line;
        ++i;
        break;
      default:
        field.push_back(c);
        ++i;
        break;
    }
  }
  if (in_quotes) throw CsvError(origin + ": unterminated quoted field");
  if (any_field || !field.empty() || !record.empty()) end_record();

  if (out.header.empty()) throw CsvError(origin + ": empty file");
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(slurp(path), path.string());
}

std::string csv_quote(const std::string& field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write file: " + path.string());
  auto put_record = [&](const std::vector<std::string>& record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
      if (i) out << ',';
      out << csv_quote(record[i]);
    }
    out << '\n';
  };
  put_record(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw CsvError("row width " + std::to_string(row.size()) +
                     " does not match header width " + std::to_string(header.size()));
    put_record(row);
  }
  if (!out) throw CsvError("write failed: " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
  std::size_t begin = 0, end = text.size();
  double value = 0.0;
  auto res = std::from_chars(text.data() + begin, text.data() + end, value);
  if (res.ec != std::errc() || res.ptr != text.data() + end)
    throw CsvError(context + ": cannot parse numeric value '" + text + "'");
  if (!std::isfinite(value))
    throw CsvError(context + ": non-finite numeric value '" + text + "'");
  return value;
}

}  // namespace gantab
