#pragma once

// Columnar table bound to a DatasetSchema. Numeric columns hold doubles;
// categorical columns hold integer codes into a per-column dictionary kept in
// first-appearance order. Tables are value types; treat them as immutable
// once handed off, and build modified copies through the setters.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gantab/schema.hpp"

namespace gantab {

class DataTable {
 public:
  DataTable() = default;
  explicit DataTable(std::shared_ptr<const DatasetSchema> schema);

  const DatasetSchema& schema() const { return *schema_; }
  std::shared_ptr<const DatasetSchema> schema_ptr() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return schema_->columns.size(); }

  bool is_numeric(int col) const {
    return schema_->columns[col].kind == ColumnKind::numeric;
  }

  const std::vector<double>& numeric(int col) const;
  const std::vector<std::int32_t>& codes(int col) const;
  const std::vector<std::string>& dictionary(int col) const;
  const std::string& label(int col, std::size_t row) const;
  // Dictionary index of `label` in column `col`, -1 if absent.
  int code_of(int col, const std::string& label) const;

  void set_numeric(int col, std::size_t row, double value);
  void set_code(int col, std::size_t row, std::int32_t code);
  // Appends the label to the dictionary if unseen.
  void set_label(int col, std::size_t row, const std::string& label);

  // Row-major append; numeric cells read from `numerics`, categorical labels
  // from `labels`, both in schema column order (each vector holds only the
  // cells of its kind).
  void append_row(const std::vector<double>& numerics,
                  const std::vector<std::string>& labels);

  // Copies the given rows into a fresh table sharing this table's schema and
  // dictionaries (codes stay aligned across the split).
  DataTable select_rows(const std::vector<std::size_t>& row_ids) const;

  // Cell as CSV text (numeric formatting matches format_double).
  std::string cell_text(int col, std::size_t row) const;

 private:
  std::shared_ptr<const DatasetSchema> schema_;
  std::vector<int> slot_;  // per schema column: index into numeric_ or categorical_
  std::vector<std::vector<double>> numeric_;
  std::vector<std::vector<std::int32_t>> codes_;
  std::vector<std::vector<std::string>> dicts_;
  std::size_t rows_ = 0;

  void check_col(int col, ColumnKind want) const;
};

}  // namespace gantab
