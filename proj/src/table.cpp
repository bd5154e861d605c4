#include "gantab/table.hpp"

#include "gantab/csv.hpp"

namespace gantab {

DataTable::DataTable(std::shared_ptr<const DatasetSchema> schema)
    : schema_(std::move(schema)) {
  if (!schema_) throw Error("DataTable requires a schema");
  slot_.resize(schema_->columns.size());
  for (std::size_t i = 0; i < schema_->columns.size(); ++i) {
    if (schema_->columns[i].kind == ColumnKind::numeric) {
      slot_[i] = static_cast<int>(numeric_.size());
      numeric_.emplace_back();
    } else {
      slot_[i] = static_cast<int>(codes_.size());
      codes_.emplace_back();
      dicts_.emplace_back();
    }
  }
}

void DataTable::check_col(int col, ColumnKind want) const {
  if (col < 0 || col >= static_cast<int>(schema_->columns.size()))
    throw Error("column index out of range: " + std::to_string(col));
  if (schema_->columns[col].kind != want)
    throw Error("column kind mismatch for " + schema_->columns[col].name);
}

const std::vector<double>& DataTable::numeric(int col) const {
  check_col(col, ColumnKind::numeric);
  return numeric_[slot_[col]];
}

const std::vector<std::int32_t>& DataTable::codes(int col) const {
  check_col(col, ColumnKind::categorical);
  return codes_[slot_[col]];
}

const std::vector<std::string>& DataTable::dictionary(int col) const {
  check_col(col, ColumnKind::categorical);
  return dicts_[slot_[col]];
}

const std::string& DataTable::label(int col, std::size_t row) const {
  const auto& d = dictionary(col);
  return d[codes(col)[row]];
}

int DataTable::code_of(int col, const std::string& label) const {
  const auto& d = dictionary(col);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] == label) return static_cast<int>(i);
  return -1;
}

void DataTable::set_numeric(int col, std::size_t row, double value) {
  check_col(col, ColumnKind::numeric);
  numeric_[slot_[col]][row] = value;
}

void DataTable::set_code(int col, std::size_t row, std::int32_t code) {
  check_col(col, ColumnKind::categorical);
  if (code < 0 || code >= static_cast<std::int32_t>(dicts_[slot_[col]].size()))
    throw Error("category code out of range for column " + schema_->columns[col].name);
  codes_[slot_[col]][row] = code;
}

void DataTable::set_label(int col, std::size_t row, const std::string& label) {
  check_col(col, ColumnKind::categorical);
  auto& d = dicts_[slot_[col]];
  int code = code_of(col, label);
  if (code < 0) {
    code = static_cast<int>(d.size());
    d.push_back(label);
  }
  codes_[slot_[col]][row] = code;
}

void DataTable::append_row(const std::vector<double>& numerics,
                           const std::vector<std::string>& labels) {
  std::size_t ni = 0, ci = 0;
  for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
    if (schema_->columns[col].kind == ColumnKind::numeric) {
      if (ni >= numerics.size()) throw Error("append_row: missing numeric cell");
      numeric_[slot_[col]].push_back(numerics[ni++]);
    } else {
      if (ci >= labels.size()) throw Error("append_row: missing categorical cell");
      auto& d = dicts_[slot_[col]];
      const std::string& label = labels[ci++];
      int code = -1;
      for (std::size_t k = 0; k < d.size(); ++k)
        if (d[k] == label) { code = static_cast<int>(k); break; }
      if (code < 0) {
        code = static_cast<int>(d.size());
        d.push_back(label);
      }
      codes_[slot_[col]].push_back(code);
    }
  }
  if (ni != numerics.size() || ci != labels.size())
    throw Error("append_row: extra cells");
  ++rows_;
}

DataTable DataTable::select_rows(const std::vector<std::size_t>& row_ids) const {
  DataTable out(schema_);
  out.dicts_ = dicts_;
  for (std::size_t c = 0; c < numeric_.size(); ++c) {
    out.numeric_[c].reserve(row_ids.size());
    for (auto r : row_ids) out.numeric_[c].push_back(numeric_[c][r]);
  }
  for (std::size_t c = 0; c < codes_.size(); ++c) {
    out.codes_[c].reserve(row_ids.size());
    for (auto r : row_ids) out.codes_[c].push_back(codes_[c][r]);
  }
  out.rows_ = row_ids.size();
  return out;
}

std::string DataTable::cell_text(int col, std::size_t row) const {
  if (is_numeric(col)) return format_double(numeric(col)[row]);
  return label(col, row);
}

}  // namespace gantab
