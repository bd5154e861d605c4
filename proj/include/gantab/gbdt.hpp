#pragma once

// Gradient-boosted decision trees used as the auxiliary learners: one model
// per table column, predicting that column from all the others on the raw
// encoding (numeric passthrough, categorical integer codes). Hand-rolled
// first-order boosting with leaf-wise growth, categorical subset splits, a
// seeded internal train/validation split for early stopping, and optional
// seeded label perturbation (the epsilon hardening knob).

#include <cstdint>
#include <string>
#include <vector>

#include "gantab/tensor.hpp"

namespace gantab {

enum class AuxObjective { regression, classification };

struct FeatureMeta {
  bool categorical = false;
  int categories = 0;  // dictionary size for categorical columns
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::vector<std::int32_t> left_categories;  // ascending codes routed left
  int left = -1, right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  double predict(const double* row) const;
  int leaf_count() const;
};

struct AuxParams {
  int rounds = 150;
  int num_leaves = 31;
  double learning_rate = 0.10;
  int early_stopping_rounds = 10;
  double validation_fraction = 0.2;
  int min_data_in_leaf = 1;
};

class AuxLearner {
 public:
  // `raw` holds every table column; the learner predicts `target_col` from
  // the rest. `epsilon` perturbs that fraction of the target labels (seeded)
  // before the internal split.
  static AuxLearner train(const Tensor<double>& raw, const std::vector<FeatureMeta>& meta,
                          int target_col, AuxObjective objective, const AuxParams& params,
                          double epsilon, std::uint64_t seed);

  // Rows are full raw rows; the target cell is ignored.
  std::vector<double> raw_scores(const double* row) const;
  // regression: {value}; classification: per-class probabilities.
  std::vector<double> predict_row(const double* row) const;
  double predict_value(const double* row) const;

  AuxObjective objective() const { return objective_; }
  int target_col() const { return target_col_; }
  int classes() const { return static_cast<int>(base_.size()); }
  int best_round() const { return best_round_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<double>& base_scores() const { return base_; }
  const std::vector<std::vector<Tree>>& rounds() const { return trees_; }

  // Stable text form, one line per node; used by golden tests.
  std::string dump() const;

  static AuxLearner restore(int target_col, AuxObjective objective, double learning_rate,
                            std::vector<double> base, std::vector<std::vector<Tree>> trees,
                            int best_round);

 private:
  int target_col_ = -1;
  AuxObjective objective_ = AuxObjective::regression;
  double learning_rate_ = 0.1;
  std::vector<double> base_;                // 1 entry (regression) or per class
  std::vector<std::vector<Tree>> trees_;    // [round][class]; regression class dim = 1
  int best_round_ = 0;
};

// Seeded in-place perturbation of round(epsilon * n) distinct entries.
// Numeric: y += alpha * y with alpha ~ U[-1, 1]. Categorical: uniform code.
void perturb_labels(std::vector<double>& y, bool categorical, int categories,
                    double epsilon, std::uint64_t seed);

}  // namespace gantab
