#include "gantab/schema.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace gantab {

int DatasetSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

int DatasetSchema::target_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].role == ColumnRole::target) return static_cast<int>(i);
  return -1;
}

std::vector<int> DatasetSchema::feature_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].role == ColumnRole::feature) out.push_back(static_cast<int>(i));
  return out;
}

void DatasetSchema::validate() const {
  if (columns.empty()) throw ConfigError("schema declares no columns");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw ConfigError("schema has a column with an empty name");
    if (!seen.insert(c.name).second)
      throw ConfigError("duplicate column name in schema: " + c.name);
  }
  int targets = 0;
  for (const auto& c : columns)
    if (c.role == ColumnRole::target) ++targets;
  if (targets > 1) throw ConfigError("schema declares more than one target column");
  if (task != Task::none && targets == 0)
    throw ConfigError("schema task requires a target column");
  if (task == Task::regression && columns[target_index()].kind != ColumnKind::numeric)
    throw ConfigError("regression target must be a numeric column");
  if (task == Task::binary_classification &&
      columns[target_index()].kind != ColumnKind::categorical)
    throw ConfigError("binary classification target must be a categorical column");

  auto check_col = [&](const std::string& name, const char* where) {
    if (index_of(name) < 0)
      throw ConfigError(std::string("rule (") + where + ") names unknown column: " + name);
    return index_of(name);
  };
  for (const auto& r : rules) {
    switch (r.kind) {
      case RuleKind::pair_implication: {
        int a = check_col(r.column_a, "implies");
        int b = check_col(r.column_b, "implies");
        if (columns[a].kind != ColumnKind::categorical ||
            columns[b].kind != ColumnKind::categorical)
          throw ConfigError("implies rule requires categorical columns");
        break;
      }
      case RuleKind::pair_membership: {
        int a = check_col(r.column_a, "pair_in_train");
        int b = check_col(r.column_b, "pair_in_train");
        if (columns[a].kind != ColumnKind::categorical ||
            columns[b].kind != ColumnKind::categorical)
          throw ConfigError("pair_in_train rule requires categorical columns");
        break;
      }
      case RuleKind::numeric_order: {
        int a = check_col(r.column_a, "order");
        int b = check_col(r.column_b, "order");
        if (columns[a].kind != ColumnKind::numeric ||
            columns[b].kind != ColumnKind::numeric)
          throw ConfigError("order rule requires numeric columns");
        break;
      }
    }
  }
}

const char* to_string(ColumnKind k) {
  return k == ColumnKind::numeric ? "numeric" : "categorical";
}

const char* to_string(Task t) {
  switch (t) {
    case Task::binary_classification: return "binary_classification";
    case Task::regression: return "regression";
    default: return "none";
  }
}

Task task_from_string(const std::string& s) {
  if (s == "binary_classification") return Task::binary_classification;
  if (s == "regression") return Task::regression;
  if (s == "none") return Task::none;
  throw ConfigError("unknown task: " + s);
}

namespace {

// Splits a schema line into tokens; double quotes group tokens with spaces.
std::vector<std::string> tokenize(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::string tok;
    if (line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          closed = true;
          ++i;
          break;
        }
        tok.push_back(line[i++]);
      }
      if (!closed) throw ConfigError(where + ": unterminated quote");
    } else {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
        tok.push_back(line[i++]);
    }
    out.push_back(tok);
  }
  return out;
}

// "name=label" with optional quotes around the label part already stripped by
// tokenize; splits on the first '='.
void split_assignment(const std::string& tok, std::string& col, std::string& label,
                      const std::string& where) {
  auto pos = tok.find('=');
  if (pos == std::string::npos || pos == 0 || pos + 1 > tok.size())
    throw ConfigError(where + ": expected column=label, got '" + tok + "'");
  col = tok.substr(0, pos);
  label = tok.substr(pos + 1);
}

}  // namespace

DatasetSchema parse_schema_text(const std::string& text, const std::string& origin) {
  DatasetSchema schema;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto hash = raw.find('#');
    const std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    const std::string where = origin + ": line " + std::to_string(lineno);
    auto toks = tokenize(line, where);
    if (toks.empty()) continue;

    const std::string head = toks[0];
    if (head == "task:") {
      if (toks.size() != 2) throw ConfigError(where + ": task: expects one value");
      schema.task = task_from_string(toks[1]);
    } else if (head == "column:") {
      if (toks.size() < 3 || toks.size() > 4)
        throw ConfigError(where + ": column: expects '<name> <kind> [target]'");
      ColumnSpec c;
      c.name = toks[1];
      if (toks[2] == "numeric") c.kind = ColumnKind::numeric;
      else if (toks[2] == "categorical") c.kind = ColumnKind::categorical;
      else throw ConfigError(where + ": unknown column kind: " + toks[2]);
      if (toks.size() == 4) {
        if (toks[3] != "target")
          throw ConfigError(where + ": unknown column attribute: " + toks[3]);
        c.role = ColumnRole::target;
      }
      schema.columns.push_back(std::move(c));
    } else if (head == "rule:") {
      if (toks.size() < 2) throw ConfigError(where + ": empty rule");
      ValidityRule r;
      const std::string& kind = toks[1];
      if (kind == "implies") {
        // rule: implies A=a => B=b
        if (toks.size() != 5 || toks[3] != "=>")
          throw ConfigError(where + ": implies rule expects 'A=a => B=b'");
        r.kind = RuleKind::pair_implication;
        split_assignment(toks[2], r.column_a, r.label_a, where);
        split_assignment(toks[4], r.column_b, r.label_b, where);
      } else if (kind == "pair_in_train") {
        if (toks.size() != 4)
          throw ConfigError(where + ": pair_in_train rule expects two columns");
        r.kind = RuleKind::pair_membership;
        r.column_a = toks[2];
        r.column_b = toks[3];
      } else if (kind == "order") {
        // rule: order A >= B
        if (toks.size() != 5 || toks[3] != ">=")
          throw ConfigError(where + ": order rule expects 'A >= B'");
        r.kind = RuleKind::numeric_order;
        r.column_a = toks[2];
        r.column_b = toks[4];
      } else {
        throw ConfigError(where + ": unknown rule kind: " + kind);
      }
      schema.rules.push_back(std::move(r));
    } else {
      throw ConfigError(where + ": unknown directive: " + head);
    }
  }
  schema.validate();
  return schema;
}

DatasetSchema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open schema file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_text(buf.str(), path.string());
}

}  // namespace gantab
