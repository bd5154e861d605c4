#pragma once

// Dataset schema: ordered column declarations (the order defines the
// generator cascade order), the downstream prediction task, and validity
// rules used by the evaluation report.

#include <filesystem>
#include <string>
#include <vector>

#include "gantab/error.hpp"

namespace gantab {

enum class ColumnKind { numeric, categorical };
enum class ColumnRole { feature, target };
enum class Task { none, binary_classification, regression };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::feature;
};

// Validity rules over decoded records.
//   implies:  if column a == label_a then column b must equal label_b
//   pair_in_train: the (a, b) label pair must occur in the training table
//   order:    numeric column a must be >= numeric column b
enum class RuleKind { pair_implication, pair_membership, numeric_order };

struct ValidityRule {
  RuleKind kind = RuleKind::pair_implication;
  std::string column_a, column_b;
  std::string label_a, label_b;  // pair_implication only
};

struct DatasetSchema {
  std::vector<ColumnSpec> columns;
  Task task = Task::none;
  std::vector<ValidityRule> rules;

  int index_of(const std::string& name) const;  // -1 if absent
  int target_index() const;                     // -1 if no target column
  std::vector<int> feature_indices() const;
  // Throws ConfigError on duplicate names, multiple targets, task/target
  // mismatches, or rules naming unknown columns.
  void validate() const;
};

const char* to_string(ColumnKind k);
const char* to_string(Task t);
Task task_from_string(const std::string& s);

DatasetSchema parse_schema_text(const std::string& text, const std::string& origin);
DatasetSchema read_schema(const std::filesystem::path& path);

}  // namespace gantab
