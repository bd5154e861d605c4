#pragma once

// Evaluation suite for synthetic tables: machine-learning utility (train on
// synthetic, test on real), univariate similarity, correlation fidelity,
// categorical diversity, and rule-based record validity.

#include <cstdint>
#include <string>
#include <vector>

#include "gantab/table.hpp"
#include "gantab/tensor.hpp"

namespace gantab {

// Average precision by step integration over the ranked scores, ties grouped.
// Labels are 0/1 and must contain both classes.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// 1 - SS_res / SS_tot. Constant targets: 1 when predictions match, else 0.
double r2(const std::vector<double>& preds, const std::vector<double>& targets);

// Two-sample Kolmogorov-Smirnov statistic, sup |F_a - F_b| over the pooled
// sample points.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Degenerate (constant) inputs give 0 for both association measures.
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double cramers_v(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b);

// Distinct (value, value) combinations summed over every unordered pair of
// categorical columns.
long upcc(const DataTable& t);
double upcc_ratio(const DataTable& synth, const DataTable& train);
double cordv(double corr_rmse_value, double upcc_ratio_value);

// Pairwise column association: Pearson for numeric pairs, Cramer's V for
// categorical pairs, NaN for mixed-kind pairs, 1 on the diagonal.
Tensor<double> correlation_matrix(const DataTable& t);

// RMSE over the strict upper triangle of the two association matrices,
// restricted to same-kind pairs.
double corr_rmse(const DataTable& real, const DataTable& synth);

// Per-column two-sample KS between the tables; categorical columns are
// compared on a shared integer coding (real dictionary first, synthetic
// extras appended).
std::vector<double> column_ks(const DataTable& real, const DataTable& synth);

// RMSE between per-dimension means in the normalized one-hot space: numerics
// min-max scaled by the real table's bounds, categoricals one-hot over the
// union label space.
double dimwise_mean_rmse(const DataTable& real, const DataTable& synth);

// Fraction of rows violating at least one rule. pair_membership rules take
// their admissible set from `train`.
double invalid_ratio(const DataTable& table, const std::vector<ValidityRule>& rules,
                     const DataTable& train);

struct PredictorScore {
  std::string name;
  double score = 0.0;
};

// Train-on-synthetic / test-on-real utility: fits a linear (or logistic)
// model, a single tree, and a boosted ensemble on synth_train and returns
// the mean PR-AUC (classification) or R^2 (regression) on real_test.
double tstr(const DataTable& synth_train, const DataTable& real_test, std::uint64_t seed,
            std::vector<PredictorScore>* breakdown = nullptr);

struct EvalReport {
  Task task = Task::none;
  bool has_tstr = false;
  std::vector<PredictorScore> tstr_scores;
  double tstr_metric = 0.0;
  double dimwise_rmse = 0.0;
  std::vector<double> ks;
  double ks_mean = 0.0;
  double corr_rmse_value = 0.0;
  long upcc_synth = 0;
  long upcc_train = 0;
  bool has_upcc = false;
  double upcc_ratio_value = 0.0;
  double cordv_value = 0.0;
  double invalid_ratio_value = 0.0;

  // Stable "key = value" lines, one metric per line.
  std::string to_text() const;
};

// Full report of synth against the real reference table (similarity metrics,
// diversity, validity, and TSTR when the schema declares a task).
EvalReport evaluate(const DataTable& synth, const DataTable& real, std::uint64_t seed);

}  // namespace gantab
