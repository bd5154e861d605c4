#pragma once

// CSV <-> DataTable plus the seeded train/holdout split.

#include <filesystem>
#include <memory>
#include <utility>

#include "gantab/csv.hpp"
#include "gantab/table.hpp"

namespace gantab {

// The CSV header must contain exactly the schema's column names (any order).
// Numeric cells must parse fully; empty cells are treated as missing values
// and rejected.
DataTable table_from_csv(const CsvTable& csv, std::shared_ptr<const DatasetSchema> schema,
                         const std::string& origin);
DataTable load_table(const std::filesystem::path& csv_path,
                     std::shared_ptr<const DatasetSchema> schema);

void save_table(const DataTable& table, const std::filesystem::path& csv_path);

struct SplitResult {
  DataTable train;
  DataTable holdout;
};

// Seeded shuffle, then the first floor(fraction * rows) shuffled rows become
// the training split. Requires at least 2 rows and fraction in (0, 1).
SplitResult split_holdout(const DataTable& table, double train_fraction,
                          std::uint64_t seed);

}  // namespace gantab
