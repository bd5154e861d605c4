#include "gantab/ingest.hpp"

#include <algorithm>

#include "gantab/rng.hpp"

namespace gantab {

DataTable table_from_csv(const CsvTable& csv, std::shared_ptr<const DatasetSchema> schema,
                         const std::string& origin) {
  schema->validate();
  const auto& cols = schema->columns;

  std::vector<int> csv_col(cols.size(), -1);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      if (csv.header[j] == cols[i].name) {
        csv_col[i] = static_cast<int>(j);
        break;
      }
    }
    if (csv_col[i] < 0)
      throw Error(origin + ": missing column '" + cols[i].name + "'");
  }
  if (csv.header.size() != cols.size()) {
    for (const auto& h : csv.header)
      if (schema->index_of(h) < 0)
        throw Error(origin + ": unexpected column '" + h + "'");
    throw Error(origin + ": duplicate columns in header");
  }

  DataTable out(schema);
  std::vector<double> numerics;
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    numerics.clear();
    labels.clear();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& cell = csv.rows[r][csv_col[i]];
      const std::string where =
          origin + ": row " + std::to_string(r + 1) + ", column '" + cols[i].name + "'";
      if (cell.empty()) throw Error(where + ": missing value");
      if (cols[i].kind == ColumnKind::numeric)
        numerics.push_back(parse_double(cell, where));
      else
        labels.push_back(cell);
    }
    out.append_row(numerics, labels);
  }

  if (schema->task == Task::binary_classification) {
    const int t = schema->target_index();
    if (out.dictionary(t).size() != 2)
      throw Error(origin + ": binary classification target '" + cols[t].name +
                  "' has " + std::to_string(out.dictionary(t).size()) +
                  " categories, expected 2");
  }
  return out;
}

DataTable load_table(const std::filesystem::path& csv_path,
                     std::shared_ptr<const DatasetSchema> schema) {
  return table_from_csv(read_csv(csv_path), std::move(schema), csv_path.string());
}

void save_table(const DataTable& table, const std::filesystem::path& csv_path) {
  std::vector<std::string> header;
  for (const auto& c : table.schema().columns) header.push_back(c.name);
  std::vector<std::vector<std::string>> rows(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    rows[r].reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
      rows[r].push_back(table.cell_text(static_cast<int>(c), r));
  }
  write_csv(csv_path, header, rows);
}

SplitResult split_holdout(const DataTable& table, double train_fraction,
                          std::uint64_t seed) {
  if (table.rows() < 2) throw ConfigError("split requires at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must be in (0, 1)");
  const std::size_t n = table.rows();
  std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  if (n_train == 0 || n_train == n)
    throw ConfigError("split fraction leaves an empty partition");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(mix_seed(seed, 0x53504c4954ULL));  // "SPLIT"
  rng.shuffle(idx);

  std::vector<std::size_t> train_ids(idx.begin(), idx.begin() + n_train);
  std::vector<std::size_t> hold_ids(idx.begin() + n_train, idx.end());
  return SplitResult{table.select_rows(train_ids), table.select_rows(hold_ids)};
}

}  // namespace gantab
