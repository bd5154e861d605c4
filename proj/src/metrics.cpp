#include "gantab/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gantab/csv.hpp"
#include "gantab/gbdt.hpp"
#include "gantab/rng.hpp"

namespace gantab {

namespace {

constexpr std::uint64_t kTagTree = 0x54524545ULL;  // "TREE"
constexpr std::uint64_t kTagGbdt = 0x474254ULL;    // "GBT"

void require_same_schema(const DataTable& a, const DataTable& b) {
  const auto& ca = a.schema().columns;
  const auto& cb = b.schema().columns;
  if (ca.size() != cb.size()) throw Error("tables have different column counts");
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (ca[i].name != cb[i].name || ca[i].kind != cb[i].kind)
      throw Error("tables disagree on column '" + ca[i].name + "'");
}

std::vector<int> categorical_columns(const DatasetSchema& schema) {
  std::vector<int> out;
  for (std::size_t i = 0; i < schema.columns.size(); ++i)
    if (schema.columns[i].kind == ColumnKind::categorical)
      out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw Error("pr_auc needs matching non-empty scores and labels");
  long positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error("pr_auc labels must be 0 or 1");
    positives += l;
  }
  if (positives == 0 || positives == static_cast<long>(labels.size()))
    throw Error("pr_auc needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Walk thresholds from high to low, grouping tied scores, and accumulate
  // precision * (recall step) at each group boundary.
  double auc = 0.0;
  double tp = 0.0, fp = 0.0, prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) tp += 1.0;
      else fp += 1.0;
      ++j;
    }
    const double recall = tp / static_cast<double>(positives);
    const double precision = tp / (tp + fp);
    auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return auc;
}

double r2(const std::vector<double>& preds, const std::vector<double>& targets) {
  if (preds.empty() || preds.size() != targets.size())
    throw Error("r2 needs matching non-empty predictions and targets");
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot <= 0.0) return ss_res <= 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("ks_statistic on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  auto probe = [&](double x) {
    const double fa =
        static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / na;
    const double fb =
        static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / nb;
    d = std::max(d, std::abs(fa - fb));
  };
  for (double x : a) probe(x);
  for (double x : b) probe(x);
  return d;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cramers_v(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  if (a.size() != b.size()) throw Error("cramers_v length mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::map<std::int32_t, int> ia, ib;
  for (auto v : a) ia.emplace(v, static_cast<int>(ia.size()));
  for (auto v : b) ib.emplace(v, static_cast<int>(ib.size()));
  const int r = static_cast<int>(ia.size());
  const int c = static_cast<int>(ib.size());
  if (std::min(r, c) < 2) return 0.0;

  std::vector<double> counts(static_cast<std::size_t>(r) * c, 0.0);
  std::vector<double> row_tot(r, 0.0), col_tot(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int ra = ia[a[i]];
    const int cb = ib[b[i]];
    counts[static_cast<std::size_t>(ra) * c + cb] += 1.0;
    row_tot[ra] += 1.0;
    col_tot[cb] += 1.0;
  }
  double chi2 = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double expected = row_tot[i] * col_tot[j] / static_cast<double>(n);
      const double diff = counts[static_cast<std::size_t>(i) * c + j] - expected;
      chi2 += diff * diff / expected;
    }
  const double v = std::sqrt(chi2 / (static_cast<double>(n) * (std::min(r, c) - 1)));
  return std::clamp(v, 0.0, 1.0);
}

long upcc(const DataTable& t) {
  const auto cats = categorical_columns(t.schema());
  long total = 0;
  for (std::size_t i = 0; i < cats.size(); ++i)
    for (std::size_t j = i + 1; j < cats.size(); ++j) {
      const auto& a = t.codes(cats[i]);
      const auto& b = t.codes(cats[j]);
      std::unordered_set<std::uint64_t> pairs;
      for (std::size_t r = 0; r < t.rows(); ++r)
        pairs.insert((static_cast<std::uint64_t>(static_cast<std::uint32_t>(a[r])) << 32) |
                     static_cast<std::uint32_t>(b[r]));
      total += static_cast<long>(pairs.size());
    }
  return total;
}

double upcc_ratio(const DataTable& synth, const DataTable& train) {
  require_same_schema(synth, train);
  const long denom = upcc(train);
  if (denom == 0) throw Error("upcc of the training table is zero; ratio undefined");
  return static_cast<double>(upcc(synth)) / static_cast<double>(denom);
}

double cordv(double corr_rmse_value, double upcc_ratio_value) {
  if (upcc_ratio_value <= 0.0) throw Error("cordv requires a positive upcc ratio");
  return corr_rmse_value / upcc_ratio_value;
}

Tensor<double> correlation_matrix(const DataTable& t) {
  const int m = static_cast<int>(t.cols());
  Tensor<double> out(m, m, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < m; ++i) out(i, i) = 1.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const bool ni = t.is_numeric(i), nj = t.is_numeric(j);
      if (ni != nj) continue;
      const double v = ni ? pearson(t.numeric(i), t.numeric(j))
                          : cramers_v(t.codes(i), t.codes(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

double corr_rmse(const DataTable& real, const DataTable& synth) {
  require_same_schema(real, synth);
  const int m = static_cast<int>(real.cols());
  double acc = 0.0;
  long count = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const bool ni = real.is_numeric(i), nj = real.is_numeric(j);
      if (ni != nj) continue;
      const double vr = ni ? pearson(real.numeric(i), real.numeric(j))
                           : cramers_v(real.codes(i), real.codes(j));
      const double vs = ni ? pearson(synth.numeric(i), synth.numeric(j))
                           : cramers_v(synth.codes(i), synth.codes(j));
      acc += (vr - vs) * (vr - vs);
      ++count;
    }
  return count == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(count));
}

std::vector<double> column_ks(const DataTable& real, const DataTable& synth) {
  require_same_schema(real, synth);
  std::vector<double> out;
  for (int col = 0; col < static_cast<int>(real.cols()); ++col) {
    if (real.is_numeric(col)) {
      out.push_back(ks_statistic(real.numeric(col), synth.numeric(col)));
      continue;
    }
    // Shared integer coding: the real dictionary first, synthetic-only
    // labels appended in their first-appearance order.
    std::vector<double> a(real.rows()), b(synth.rows());
    for (std::size_t r = 0; r < real.rows(); ++r)
      a[r] = static_cast<double>(real.codes(col)[r]);
    std::map<std::string, int> extra;
    const int real_card = static_cast<int>(real.dictionary(col).size());
    for (std::size_t r = 0; r < synth.rows(); ++r) {
      const auto& label = synth.label(col, r);
      int code = real.code_of(col, label);
      if (code < 0) {
        auto it = extra.find(label);
        if (it == extra.end())
          it = extra.emplace(label, real_card + static_cast<int>(extra.size())).first;
        code = it->second;
      }
      b[r] = static_cast<double>(code);
    }
    out.push_back(ks_statistic(std::move(a), std::move(b)));
  }
  return out;
}

double dimwise_mean_rmse(const DataTable& real, const DataTable& synth) {
  require_same_schema(real, synth);
  if (real.rows() == 0 || synth.rows() == 0)
    throw Error("dimwise_mean_rmse on an empty table");
  std::vector<double> mr, ms;
  for (int col = 0; col < static_cast<int>(real.cols()); ++col) {
    if (real.is_numeric(col)) {
      const auto& rv = real.numeric(col);
      const auto [mn_it, mx_it] = std::minmax_element(rv.begin(), rv.end());
      const double mn = *mn_it;
      double range = *mx_it - mn;
      if (range <= 0.0) range = 1.0;
      double sr = 0.0, ss = 0.0;
      for (double v : rv) sr += (v - mn) / range;
      for (double v : synth.numeric(col)) ss += (v - mn) / range;
      mr.push_back(sr / static_cast<double>(real.rows()));
      ms.push_back(ss / static_cast<double>(synth.rows()));
      continue;
    }
    std::vector<std::string> labels = real.dictionary(col);
    for (const auto& l : synth.dictionary(col))
      if (real.code_of(col, l) < 0) labels.push_back(l);
    for (const auto& label : labels) {
      long cr = 0, cs = 0;
      const int rc = real.code_of(col, label);
      if (rc >= 0)
        for (auto code : real.codes(col)) cr += code == rc;
      const int sc = synth.code_of(col, label);
      if (sc >= 0)
        for (auto code : synth.codes(col)) cs += code == sc;
      mr.push_back(static_cast<double>(cr) / static_cast<double>(real.rows()));
      ms.push_back(static_cast<double>(cs) / static_cast<double>(synth.rows()));
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < mr.size(); ++i) acc += (mr[i] - ms[i]) * (mr[i] - ms[i]);
  return std::sqrt(acc / static_cast<double>(mr.size()));
}

double invalid_ratio(const DataTable& table, const std::vector<ValidityRule>& rules,
                     const DataTable& train) {
  if (table.rows() == 0) return 0.0;

  struct Prepared {
    RuleKind kind;
    int a = -1, b = -1;
    std::string label_a, label_b;
    std::unordered_set<std::string> allowed;  // pair_membership
  };
  std::vector<Prepared> prepared;
  for (const auto& rule : rules) {
    Prepared p;
    p.kind = rule.kind;
    p.a = table.schema().index_of(rule.column_a);
    p.b = table.schema().index_of(rule.column_b);
    if (p.a < 0 || p.b < 0)
      throw ConfigError("validity rule references unknown column");
    if (rule.kind == RuleKind::numeric_order) {
      if (!table.is_numeric(p.a) || !table.is_numeric(p.b))
        throw ConfigError("numeric_order rule on non-numeric columns");
    } else {
      if (table.is_numeric(p.a) || table.is_numeric(p.b))
        throw ConfigError("pair rule on numeric columns");
    }
    p.label_a = rule.label_a;
    p.label_b = rule.label_b;
    if (rule.kind == RuleKind::pair_membership) {
      const int ta = train.schema().index_of(rule.column_a);
      const int tb = train.schema().index_of(rule.column_b);
      if (ta < 0 || tb < 0)
        throw ConfigError("validity rule references unknown column in train table");
      for (std::size_t r = 0; r < train.rows(); ++r)
        p.allowed.insert(train.label(ta, r) + '\x1f' + train.label(tb, r));
    }
    prepared.push_back(std::move(p));
  }

  std::size_t invalid = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    bool bad = false;
    for (const auto& p : prepared) {
      switch (p.kind) {
        case RuleKind::pair_implication:
          bad = table.label(p.a, r) == p.label_a && table.label(p.b, r) != p.label_b;
          break;
        case RuleKind::pair_membership:
          bad = !p.allowed.count(table.label(p.a, r) + '\x1f' + table.label(p.b, r));
          break;
        case RuleKind::numeric_order:
          bad = table.numeric(p.a)[r] < table.numeric(p.b)[r];
          break;
      }
      if (bad) break;
    }
    invalid += bad;
  }
  return static_cast<double>(invalid) / static_cast<double>(table.rows());
}

// ---- TSTR -------------------------------------------------------------------

namespace {

struct TstrProblem {
  bool classification = false;
  int target = -1;
  Tensor<double> train_raw, test_raw;     // tree-learner inputs, all columns
  std::vector<FeatureMeta> meta;
  Eigen::MatrixXd train_x, test_x;        // linear-model design matrices
  Eigen::VectorXd train_y;
  std::vector<int> y_class;               // test labels (classification)
  std::vector<double> y_value;            // test targets (regression)
};

TstrProblem build_tstr(const DataTable& synth, const DataTable& real) {
  require_same_schema(synth, real);
  const auto& schema = real.schema();
  TstrProblem p;
  p.target = schema.target_index();
  if (p.target < 0) throw Error("tstr requires a schema with a target column");
  if (schema.task == Task::none) throw Error("tstr requires a prediction task");
  p.classification = schema.task == Task::binary_classification;

  const int m = static_cast<int>(schema.columns.size());
  const std::size_t ns = synth.rows(), nr = real.rows();
  if (ns == 0 || nr == 0) throw Error("tstr on an empty table");

  std::string positive;
  if (p.classification) {
    if (real.dictionary(p.target).size() < 2)
      throw Error("binary target needs two classes in the real table");
    positive = real.dictionary(p.target)[1];
  }

  // Tree-learner matrices: numeric passthrough, synth-dictionary codes for
  // categoricals (labels unseen in synth get the out-of-dictionary code).
  p.train_raw = Tensor<double>(static_cast<int>(ns), m);
  p.test_raw = Tensor<double>(static_cast<int>(nr), m);
  p.meta.resize(m);
  for (int c = 0; c < m; ++c) {
    if (synth.is_numeric(c)) {
      for (std::size_t r = 0; r < ns; ++r)
        p.train_raw(static_cast<int>(r), c) = synth.numeric(c)[r];
      for (std::size_t r = 0; r < nr; ++r)
        p.test_raw(static_cast<int>(r), c) = real.numeric(c)[r];
      continue;
    }
    const int card = static_cast<int>(synth.dictionary(c).size());
    p.meta[c] = {true, card};
    for (std::size_t r = 0; r < ns; ++r)
      p.train_raw(static_cast<int>(r), c) = static_cast<double>(synth.codes(c)[r]);
    for (std::size_t r = 0; r < nr; ++r) {
      const int code = synth.code_of(c, real.label(c, r));
      p.test_raw(static_cast<int>(r), c) = static_cast<double>(code < 0 ? card : code);
    }
  }
  if (p.classification) {
    p.meta[p.target] = {true, 2};
    for (std::size_t r = 0; r < ns; ++r)
      p.train_raw(static_cast<int>(r), p.target) =
          synth.label(p.target, r) == positive ? 1.0 : 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      p.test_raw(static_cast<int>(r), p.target) = 0.0;
      p.y_class.push_back(real.label(p.target, r) == positive ? 1 : 0);
    }
  } else {
    p.meta[p.target] = {false, 0};
    p.y_value = real.numeric(p.target);
  }

  // Linear-model design: min-max numerics (synth bounds), one-hot
  // categoricals (synth dictionaries, unseen labels all-zero), bias term.
  int width = 1;
  for (int c = 0; c < m; ++c) {
    if (c == p.target) continue;
    width += synth.is_numeric(c) ? 1 : static_cast<int>(synth.dictionary(c).size());
  }
  p.train_x = Eigen::MatrixXd::Zero(static_cast<long>(ns), width);
  p.test_x = Eigen::MatrixXd::Zero(static_cast<long>(nr), width);
  p.train_y.resize(static_cast<long>(ns));
  int off = 0;
  for (int c = 0; c < m; ++c) {
    if (c == p.target) continue;
    if (synth.is_numeric(c)) {
      const auto& sv = synth.numeric(c);
      const auto [mn_it, mx_it] = std::minmax_element(sv.begin(), sv.end());
      const double mn = *mn_it;
      double range = *mx_it - mn;
      if (range <= 0.0) range = 1.0;
      for (std::size_t r = 0; r < ns; ++r)
        p.train_x(static_cast<long>(r), off) = (sv[r] - mn) / range;
      for (std::size_t r = 0; r < nr; ++r)
        p.test_x(static_cast<long>(r), off) = (real.numeric(c)[r] - mn) / range;
      ++off;
      continue;
    }
    const int card = static_cast<int>(synth.dictionary(c).size());
    for (std::size_t r = 0; r < ns; ++r)
      p.train_x(static_cast<long>(r), off + synth.codes(c)[r]) = 1.0;
    for (std::size_t r = 0; r < nr; ++r) {
      const int code = synth.code_of(c, real.label(c, r));
      if (code >= 0) p.test_x(static_cast<long>(r), off + code) = 1.0;
    }
    off += card;
  }
  p.train_x.col(width - 1).setOnes();
  p.test_x.col(width - 1).setOnes();
  for (std::size_t r = 0; r < ns; ++r)
    p.train_y(static_cast<long>(r)) = p.classification
                                          ? p.train_raw(static_cast<int>(r), p.target)
                                          : synth.numeric(p.target)[r];
  return p;
}

std::vector<double> linear_model_scores(const TstrProblem& p) {
  const double lambda = 1e-3;
  Eigen::VectorXd w;
  if (p.classification) {
    const long n = p.train_x.rows();
    w = Eigen::VectorXd::Zero(p.train_x.cols());
    for (int it = 0; it < 1000; ++it) {
      Eigen::VectorXd z = p.train_x * w;
      Eigen::VectorXd prob =
          z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      Eigen::VectorXd grad =
          p.train_x.transpose() * (prob - p.train_y) / static_cast<double>(n) +
          lambda * w;
      w -= 0.5 * grad;
    }
  } else {
    const Eigen::MatrixXd gram =
        p.train_x.transpose() * p.train_x +
        lambda * static_cast<double>(p.train_x.rows()) *
            Eigen::MatrixXd::Identity(p.train_x.cols(), p.train_x.cols());
    w = gram.ldlt().solve(p.train_x.transpose() * p.train_y);
  }
  Eigen::VectorXd z = p.test_x * w;
  std::vector<double> scores(z.size());
  for (long i = 0; i < z.size(); ++i)
    scores[i] = p.classification ? 1.0 / (1.0 + std::exp(-z(i))) : z(i);
  return scores;
}

std::vector<double> learner_scores(const TstrProblem& p, const AuxLearner& learner) {
  std::vector<double> scores(p.test_raw.rows());
  std::vector<double> row(p.test_raw.cols());
  for (int r = 0; r < p.test_raw.rows(); ++r) {
    for (int c = 0; c < p.test_raw.cols(); ++c) row[c] = p.test_raw(r, c);
    scores[r] = p.classification ? learner.predict_row(row.data())[1]
                                 : learner.predict_value(row.data());
  }
  return scores;
}

}  // namespace

double tstr(const DataTable& synth_train, const DataTable& real_test, std::uint64_t seed,
            std::vector<PredictorScore>* breakdown) {
  const auto p = build_tstr(synth_train, real_test);
  const auto objective =
      p.classification ? AuxObjective::classification : AuxObjective::regression;

  AuxParams tree_params;
  tree_params.rounds = 1;
  tree_params.learning_rate = 1.0;
  tree_params.num_leaves = 32;
  const auto tree = AuxLearner::train(p.train_raw, p.meta, p.target, objective,
                                      tree_params, 0.0, mix_seed(seed, kTagTree));
  const auto boosted = AuxLearner::train(p.train_raw, p.meta, p.target, objective,
                                         AuxParams{}, 0.0, mix_seed(seed, kTagGbdt));

  auto score = [&](const std::vector<double>& s) {
    return p.classification ? pr_auc(s, p.y_class) : r2(s, p.y_value);
  };
  std::vector<PredictorScore> scores;
  scores.push_back({p.classification ? "logistic" : "linear",
                    score(linear_model_scores(p))});
  scores.push_back({"tree", score(learner_scores(p, tree))});
  scores.push_back({"gbdt", score(learner_scores(p, boosted))});

  double mean = 0.0;
  for (const auto& s : scores) mean += s.score;
  mean /= static_cast<double>(scores.size());
  if (breakdown) *breakdown = std::move(scores);
  return mean;
}

EvalReport evaluate(const DataTable& synth, const DataTable& real, std::uint64_t seed) {
  require_same_schema(synth, real);
  EvalReport report;
  report.task = real.schema().task;
  if (report.task != Task::none && real.schema().target_index() >= 0) {
    report.has_tstr = true;
    report.tstr_metric = tstr(synth, real, seed, &report.tstr_scores);
  }
  report.dimwise_rmse = dimwise_mean_rmse(real, synth);
  report.ks = column_ks(real, synth);
  report.ks_mean = 0.0;
  for (double k : report.ks) report.ks_mean += k;
  if (!report.ks.empty()) report.ks_mean /= static_cast<double>(report.ks.size());
  report.corr_rmse_value = corr_rmse(real, synth);
  report.upcc_synth = upcc(synth);
  report.upcc_train = upcc(real);
  if (report.upcc_train > 0) {
    report.has_upcc = true;
    report.upcc_ratio_value = upcc_ratio(synth, real);
    if (report.upcc_ratio_value > 0.0)
      report.cordv_value = cordv(report.corr_rmse_value, report.upcc_ratio_value);
  }
  report.invalid_ratio_value = invalid_ratio(synth, real.schema().rules, real);
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "task = " << to_string(task) << '\n';
  if (has_tstr) {
    for (const auto& s : tstr_scores)
      out << "tstr_" << s.name << " = " << format_double(s.score) << '\n';
    out << "tstr_metric = " << format_double(tstr_metric) << '\n';
  }
  out << "dimwise_mean_rmse = " << format_double(dimwise_rmse) << '\n';
  out << "ks_mean = " << format_double(ks_mean) << '\n';
  out << "corr_rmse = " << format_double(corr_rmse_value) << '\n';
  out << "upcc_synth = " << upcc_synth << '\n';
  out << "upcc_train = " << upcc_train << '\n';
  const bool ratio_defined = has_upcc;
  out << "upcc_ratio = "
      << (ratio_defined ? format_double(upcc_ratio_value) : "undefined") << '\n';
  out << "cordv = "
      << (ratio_defined && upcc_ratio_value > 0.0 ? format_double(cordv_value)
                                                  : "undefined")
      << '\n';
  out << "invalid_ratio = " << format_double(invalid_ratio_value) << '\n';
  return out.str();
}

}  // namespace gantab
