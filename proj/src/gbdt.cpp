#include "gantab/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gantab/csv.hpp"
#include "gantab/error.hpp"
#include "gantab/rng.hpp"

namespace gantab {

double Tree::predict(const double* row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& n = nodes[at];
    bool go_left;
    if (!n.left_categories.empty()) {
      const auto code = static_cast<std::int32_t>(row[n.feature]);
      go_left = std::binary_search(n.left_categories.begin(), n.left_categories.end(), code);
    } else {
      go_left = row[n.feature] < n.threshold;
    }
    at = go_left ? n.left : n.right;
  }
  return nodes[at].value;
}

int Tree::leaf_count() const {
  int leaves = 0;
  for (const auto& n : nodes)
    if (n.feature < 0) ++leaves;
  return leaves;
}

void perturb_labels(std::vector<double>& y, bool categorical, int categories,
                    double epsilon, std::uint64_t seed) {
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
  const std::size_t n = y.size();
  const auto k = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(n) + 0.5));
  if (k == 0) return;
  Rng rng(mix_seed(seed, 0x50455254ULL));  // "PERT"
  const auto rows = rng.sample_indices(n, k);
  for (auto r : rows) {
    if (categorical) {
      y[r] = static_cast<double>(rng.below(static_cast<std::uint64_t>(categories)));
    } else {
      const double alpha = rng.uniform(-1.0, 1.0);
      y[r] = y[r] + alpha * y[r];
    }
  }
}

namespace {

struct SplitCandidate {
  double gain = -1.0;
  int feature = -1;
  double threshold = 0.0;
  std::vector<std::int32_t> left_cats;
};

struct LeafState {
  int node_id = -1;
  double sum = 0.0;
  int count = 0;
  SplitCandidate best;
  bool open = true;
};

// One regression tree fit to `residual` over `rows`, leaf-wise growth.
class TreeGrower {
 public:
  TreeGrower(const Tensor<double>& raw, const std::vector<FeatureMeta>& meta,
             int target_col, const AuxParams& params,
             const std::vector<std::vector<int>>& numeric_order)
      : raw_(raw), meta_(meta), target_col_(target_col), params_(params),
        numeric_order_(numeric_order) {}

  Tree fit(const std::vector<int>& rows, const std::vector<double>& residual) {
    residual_ = &residual;
    leaf_of_.assign(raw_.rows(), -1);
    for (int r : rows) leaf_of_[r] = 0;

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<LeafState> leaves(1);
    leaves[0].node_id = 0;
    leaves[0].sum = 0.0;
    leaves[0].count = static_cast<int>(rows.size());
    for (int r : rows) leaves[0].sum += residual[r];
    find_best_split(leaves[0], 0);

    int leaf_total = 1;
    while (leaf_total < params_.num_leaves) {
      int pick = -1;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].open || leaves[i].best.feature < 0) continue;
        if (pick < 0 || leaves[i].best.gain > leaves[pick].best.gain) pick = static_cast<int>(i);
      }
      if (pick < 0) break;

      LeafState& parent = leaves[pick];
      const SplitCandidate& cand = parent.best;
      const int parent_node = parent.node_id;
      const int left_node = static_cast<int>(tree.nodes.size());
      const int right_node = left_node + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& pn = tree.nodes[parent_node];
      pn.feature = cand.feature;
      pn.threshold = cand.threshold;
      pn.left_categories = cand.left_cats;
      pn.left = left_node;
      pn.right = right_node;

      LeafState lchild, rchild;
      lchild.node_id = left_node;
      rchild.node_id = right_node;
      const int parent_leaf_id = pick;
      const int left_leaf_id = static_cast<int>(leaves.size());
      const int right_leaf_id = left_leaf_id + 1;
      for (std::size_t r = 0; r < leaf_of_.size(); ++r) {
        if (leaf_of_[r] != parent_leaf_id) continue;
        const bool go_left = route_left(tree.nodes[parent_node], static_cast<int>(r));
        leaf_of_[r] = go_left ? left_leaf_id : right_leaf_id;
        auto& child = go_left ? lchild : rchild;
        child.sum += (*residual_)[r];
        child.count += 1;
      }
      parent.open = false;
      leaves.push_back(std::move(lchild));
      leaves.push_back(std::move(rchild));
      find_best_split(leaves[left_leaf_id], left_leaf_id);
      find_best_split(leaves[right_leaf_id], right_leaf_id);
      ++leaf_total;
    }

    for (const auto& leaf : leaves) {
      if (!leaf.open) continue;
      tree.nodes[leaf.node_id].value = leaf.count > 0 ? leaf.sum / leaf.count : 0.0;
    }
    return tree;
  }

 private:
  const Tensor<double>& raw_;
  const std::vector<FeatureMeta>& meta_;
  int target_col_;
  const AuxParams& params_;
  const std::vector<std::vector<int>>& numeric_order_;
  const std::vector<double>* residual_ = nullptr;
  std::vector<int> leaf_of_;

  bool route_left(const TreeNode& n, int row) const {
    if (!n.left_categories.empty())
      return std::binary_search(n.left_categories.begin(), n.left_categories.end(),
                                static_cast<std::int32_t>(raw_(row, n.feature)));
    if (meta_[n.feature].categorical) return false;  // empty left set
    return raw_(row, n.feature) < n.threshold;
  }

  void find_best_split(LeafState& leaf, int leaf_id) {
    leaf.best = SplitCandidate{};
    if (leaf.count < 2 * params_.min_data_in_leaf || leaf.count < 2) return;
    const double parent_score = leaf.sum * leaf.sum / leaf.count;

    for (int f = 0; f < raw_.cols(); ++f) {
      if (f == target_col_) continue;
      if (meta_[f].categorical)
        scan_categorical(leaf, leaf_id, f, parent_score);
      else
        scan_numeric(leaf, leaf_id, f, parent_score);
    }
  }

  void scan_numeric(LeafState& leaf, int leaf_id, int f, double parent_score) {
    double left_sum = 0.0;
    int left_count = 0;
    double prev_value = 0.0;
    bool have_prev = false;
    const auto& order = numeric_order_[f];
    for (int r : order) {
      if (leaf_of_[r] != leaf_id) continue;
      const double v = raw_(r, f);
      if (have_prev && v != prev_value && left_count >= params_.min_data_in_leaf &&
          leaf.count - left_count >= params_.min_data_in_leaf) {
        const double right_sum = leaf.sum - left_sum;
        const int right_count = leaf.count - left_count;
        const double gain = left_sum * left_sum / left_count +
                            right_sum * right_sum / right_count - parent_score;
        if (gain > 1e-12 &&
            (gain > leaf.best.gain ||
             (gain == leaf.best.gain && leaf.best.feature > f))) {
          leaf.best.gain = gain;
          leaf.best.feature = f;
          leaf.best.threshold = prev_value + 0.5 * (v - prev_value);
          leaf.best.left_cats.clear();
        }
      }
      left_sum += (*residual_)[r];
      left_count += 1;
      prev_value = v;
      have_prev = true;
    }
  }

  void scan_categorical(LeafState& leaf, int leaf_id, int f, double parent_score) {
    const int cats = meta_[f].categories;
    std::vector<double> sum(cats, 0.0);
    std::vector<int> count(cats, 0);
    for (std::size_t r = 0; r < leaf_of_.size(); ++r) {
      if (leaf_of_[r] != leaf_id) continue;
      const auto code = static_cast<int>(raw_(r, f));
      sum[code] += (*residual_)[r];
      count[code] += 1;
    }
    std::vector<int> present;
    for (int c = 0; c < cats; ++c)
      if (count[c] > 0) present.push_back(c);
    if (present.size() < 2) return;
    // Order categories by mean residual; prefix subsets are the candidates.
    std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
      const double ma = sum[a] / count[a];
      const double mb = sum[b] / count[b];
      if (ma != mb) return ma < mb;
      return a < b;
    });
    double left_sum = 0.0;
    int left_count = 0;
    for (std::size_t i = 0; i + 1 < present.size(); ++i) {
      left_sum += sum[present[i]];
      left_count += count[present[i]];
      const int right_count = leaf.count - left_count;
      if (left_count < params_.min_data_in_leaf || right_count < params_.min_data_in_leaf)
        continue;
      const double right_sum = leaf.sum - left_sum;
      const double gain = left_sum * left_sum / left_count +
                          right_sum * right_sum / right_count - parent_score;
      if (gain > 1e-12 &&
          (gain > leaf.best.gain || (gain == leaf.best.gain && leaf.best.feature > f))) {
        leaf.best.gain = gain;
        leaf.best.feature = f;
        leaf.best.threshold = 0.0;
        leaf.best.left_cats.assign(present.begin(), present.begin() + i + 1);
        std::sort(leaf.best.left_cats.begin(), leaf.best.left_cats.end());
      }
    }
  }
};

std::vector<double> softmax(const std::vector<double>& scores) {
  double m = scores[0];
  for (double s : scores) m = std::max(m, s);
  double total = 0.0;
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - m);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

}  // namespace

AuxLearner AuxLearner::train(const Tensor<double>& raw, const std::vector<FeatureMeta>& meta,
                             int target_col, AuxObjective objective, const AuxParams& params,
                             double epsilon, std::uint64_t seed) {
  if (raw.rows() < 2) throw Error("aux learner needs at least 2 rows");
  if (static_cast<int>(meta.size()) != raw.cols())
    throw Error("feature metadata width mismatch");
  if (target_col < 0 || target_col >= raw.cols())
    throw Error("aux target column out of range");
  if (params.rounds < 1) throw ConfigError("aux rounds must be >= 1");
  if (params.num_leaves < 2) throw ConfigError("aux num_leaves must be >= 2");
  if (params.min_data_in_leaf < 1) throw ConfigError("aux min_data_in_leaf must be >= 1");

  const int n = raw.rows();
  std::vector<double> y(n);
  for (int r = 0; r < n; ++r) y[r] = raw(r, target_col);

  const bool classify = objective == AuxObjective::classification;
  const int cats = classify ? meta[target_col].categories : 0;
  if (classify && cats < 2)
    throw Error("classification aux target needs at least 2 categories");

  // Perturb first, then split, so hardened labels leak into both folds in a
  // seed-stable way.
  perturb_labels(y, classify, cats, epsilon, seed);

  std::vector<int> idx(n);
  for (int r = 0; r < n; ++r) idx[r] = r;
  Rng split_rng(mix_seed(seed, 0x56414cULL));  // "VAL"
  split_rng.shuffle(idx);
  auto n_train = static_cast<int>(std::floor((1.0 - params.validation_fraction) * n));
  n_train = std::clamp(n_train, 1, n);
  std::vector<int> train_rows(idx.begin(), idx.begin() + n_train);
  std::vector<int> val_rows(idx.begin() + n_train, idx.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  const bool use_early_stop = params.early_stopping_rounds > 0 && !val_rows.empty();

  // Global per-feature presort over the boosting fold.
  std::vector<std::vector<int>> numeric_order(raw.cols());
  for (int f = 0; f < raw.cols(); ++f) {
    if (f == target_col || meta[f].categorical) continue;
    numeric_order[f] = train_rows;
    std::stable_sort(numeric_order[f].begin(), numeric_order[f].end(),
                     [&](int a, int b) { return raw(a, f) < raw(b, f); });
  }

  AuxLearner model;
  model.target_col_ = target_col;
  model.objective_ = objective;
  model.learning_rate_ = params.learning_rate;

  const int k = classify ? cats : 1;
  if (classify) {
    std::vector<int> counts(cats, 0);
    for (int r : train_rows) counts[static_cast<int>(y[r])] += 1;
    for (int c = 0; c < cats; ++c)
      model.base_.push_back(std::log((counts[c] + 1.0) / (n_train + cats)));
  } else {
    double mean = 0.0;
    for (int r : train_rows) mean += y[r];
    model.base_.push_back(mean / n_train);
  }

  // Current scores for every row (train and validation).
  std::vector<std::vector<double>> score(k, std::vector<double>(n));
  for (int c = 0; c < k; ++c)
    std::fill(score[c].begin(), score[c].end(), model.base_[c]);

  TreeGrower grower(raw, meta, target_col, params, numeric_order);

  auto validation_loss = [&]() {
    double loss = 0.0;
    if (classify) {
      std::vector<double> s(k);
      for (int r : val_rows) {
        for (int c = 0; c < k; ++c) s[c] = score[c][r];
        const auto p = softmax(s);
        const auto label = static_cast<int>(y[r]);
        loss -= std::log(std::max(p[label], 1e-300));
      }
    } else {
      for (int r : val_rows) {
        const double d = y[r] - score[0][r];
        loss += d * d;
      }
    }
    return loss / static_cast<double>(val_rows.size());
  };

  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<double> residual(n, 0.0);
  for (int round = 0; round < params.rounds; ++round) {
    std::vector<Tree> round_trees;
    if (classify) {
      // Residuals against current softmax probabilities, one tree per class.
      std::vector<std::vector<double>> probs(k);
      for (int c = 0; c < k; ++c) probs[c].assign(n, 0.0);
      std::vector<double> s(k);
      for (int r : train_rows) {
        for (int c = 0; c < k; ++c) s[c] = score[c][r];
        const auto p = softmax(s);
        for (int c = 0; c < k; ++c) probs[c][r] = p[c];
      }
      for (int c = 0; c < k; ++c) {
        for (int r : train_rows)
          residual[r] = (static_cast<int>(y[r]) == c ? 1.0 : 0.0) - probs[c][r];
        round_trees.push_back(grower.fit(train_rows, residual));
      }
    } else {
      for (int r : train_rows) residual[r] = y[r] - score[0][r];
      round_trees.push_back(grower.fit(train_rows, residual));
    }

    for (int c = 0; c < k; ++c) {
      const Tree& t = round_trees[c];
      for (int r = 0; r < n; ++r) {
        const double* row = raw.data() + static_cast<std::size_t>(r) * raw.cols();
        score[c][r] += params.learning_rate * t.predict(row);
      }
    }
    model.trees_.push_back(std::move(round_trees));

    if (use_early_stop) {
      const double loss = validation_loss();
      if (loss < best_loss) {
        best_loss = loss;
        model.best_round_ = round + 1;
        since_best = 0;
      } else {
        ++since_best;
        if (since_best >= params.early_stopping_rounds) break;
      }
    } else {
      model.best_round_ = round + 1;
    }
  }

  if (model.best_round_ < 1) model.best_round_ = 1;
  model.trees_.resize(model.best_round_);
  return model;
}

std::vector<double> AuxLearner::raw_scores(const double* row) const {
  std::vector<double> s(base_);
  for (const auto& round : trees_)
    for (std::size_t c = 0; c < round.size(); ++c)
      s[c] += learning_rate_ * round[c].predict(row);
  return s;
}

std::vector<double> AuxLearner::predict_row(const double* row) const {
  auto s = raw_scores(row);
  if (objective_ == AuxObjective::regression) return s;
  return softmax(s);
}

double AuxLearner::predict_value(const double* row) const {
  if (objective_ != AuxObjective::regression)
    throw Error("predict_value on a classification aux learner");
  return raw_scores(row)[0];
}

std::string AuxLearner::dump() const {
  std::ostringstream out;
  out << "objective=" << (objective_ == AuxObjective::regression ? "regression" : "classification")
      << " target=" << target_col_ << " lr=" << format_double(learning_rate_)
      << " best_round=" << best_round_ << " base=";
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (i) out << ',';
    out << format_double(base_[i]);
  }
  out << '\n';
  for (std::size_t round = 0; round < trees_.size(); ++round) {
    for (std::size_t c = 0; c < trees_[round].size(); ++c) {
      out << "round=" << round << " class=" << c << '\n';
      const auto& nodes = trees_[round][c].nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& nd = nodes[i];
        if (nd.feature < 0) {
          out << "  node=" << i << " leaf value=" << format_double(nd.value) << '\n';
        } else if (!nd.left_categories.empty()) {
          out << "  node=" << i << " feature=" << nd.feature << " cats=";
          for (std::size_t j = 0; j < nd.left_categories.size(); ++j) {
            if (j) out << ',';
            out << nd.left_categories[j];
          }
          out << " left=" << nd.left << " right=" << nd.right << '\n';
        } else {
          out << "  node=" << i << " feature=" << nd.feature
              << " threshold=" << format_double(nd.threshold) << " left=" << nd.left
              << " right=" << nd.right << '\n';
        }
      }
    }
  }
  return out.str();
}

AuxLearner AuxLearner::restore(int target_col, AuxObjective objective, double learning_rate,
                               std::vector<double> base, std::vector<std::vector<Tree>> trees,
                               int best_round) {
  AuxLearner m;
  m.target_col_ = target_col;
  m.objective_ = objective;
  m.learning_rate_ = learning_rate;
  m.base_ = std::move(base);
  m.trees_ = std::move(trees);
  m.best_round_ = best_round;
  return m;
}

}  // namespace gantab
