#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gantab/metrics.hpp"
#include "gantab/rng.hpp"

using namespace gantab;

namespace {

// ---- independent oracles ----------------------------------------------------

// Average precision by explicit enumeration of every distinct threshold with
// a >= predicate.
double brute_pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  long positives = 0;
  for (int l : labels) positives += l;
  double auc = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    long tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        if (labels[i] == 1) ++tp;
        else ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    auc += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return auc;
}

double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  auto cdf = [](const std::vector<double>& v, double x) {
    long c = 0;
    for (double u : v) c += u <= x;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  for (double x : a) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  for (double x : b) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  return d;
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  if (vx <= 0 || vy <= 0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

double brute_cramers(const std::vector<std::int32_t>& a,
                     const std::vector<std::int32_t>& b) {
  std::map<std::pair<std::int32_t, std::int32_t>, double> cells;
  std::map<std::int32_t, double> ra, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    cb[b[i]] += 1;
  }
  if (ra.size() < 2 || cb.size() < 2) return 0.0;
  const double n = static_cast<double>(a.size());
  double chi2 = 0.0;
  for (const auto& [ka, na] : ra)
    for (const auto& [kb, nb] : cb) {
      const double expected = na * nb / n;
      auto it = cells.find({ka, kb});
      const double observed = it == cells.end() ? 0.0 : it->second;
      chi2 += (observed - expected) * (observed - expected) / expected;
    }
  const double k = static_cast<double>(std::min(ra.size(), cb.size())) - 1.0;
  return std::sqrt(chi2 / (n * k));
}

long brute_upcc(const DataTable& t) {
  long total = 0;
  for (std::size_t i = 0; i < t.cols(); ++i) {
    if (t.is_numeric(static_cast<int>(i))) continue;
    for (std::size_t j = i + 1; j < t.cols(); ++j) {
      if (t.is_numeric(static_cast<int>(j))) continue;
      std::set<std::pair<std::string, std::string>> seen;
      for (std::size_t r = 0; r < t.rows(); ++r)
        seen.insert({t.label(static_cast<int>(i), r), t.label(static_cast<int>(j), r)});
      total += static_cast<long>(seen.size());
    }
  }
  return total;
}

// ---- fixtures ---------------------------------------------------------------

std::shared_ptr<DatasetSchema> schema_of(std::vector<ColumnSpec> cols,
                                         Task task = Task::none,
                                         std::vector<ValidityRule> rules = {}) {
  auto s = std::make_shared<DatasetSchema>();
  s->columns = std::move(cols);
  s->task = task;
  s->rules = std::move(rules);
  s->validate();
  return s;
}

DataTable random_mixed(std::size_t n, std::uint64_t seed) {
  auto schema = schema_of({{"a", ColumnKind::numeric, ColumnRole::feature},
                           {"b", ColumnKind::categorical, ColumnRole::feature},
                           {"c", ColumnKind::numeric, ColumnRole::feature},
                           {"d", ColumnKind::categorical, ColumnRole::feature}});
  DataTable t(schema);
  Rng rng(seed);
  const std::vector<std::string> bs = {"u", "v", "w"};
  const std::vector<std::string> ds = {"p", "q"};
  for (std::size_t i = 0; i < n; ++i)
    t.append_row({rng.normal(), rng.normal(2.0, 3.0)},
                 {bs[rng.below(3)], ds[rng.below(2)]});
  return t;
}

}  // namespace

TEST_CASE("pr_auc handles perfect, tied, and constant rankings") {
  CHECK(pr_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(pr_auc({0.9, 0.8, 0.4, 0.2}, {1, 0, 1, 0}) ==
        doctest::Approx(0.5 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(pr_auc({0.8, 0.8, 0.4}, {1, 0, 1}) ==
        doctest::Approx(0.25 + 1.0 / 3.0).epsilon(1e-12));

  // A constant ranking scores the positive-class prevalence.
  std::vector<double> flat(10, 0.5);
  std::vector<int> labels(10, 0);
  labels[0] = labels[4] = labels[7] = 1;
  CHECK(pr_auc(flat, labels) == doctest::Approx(0.3).epsilon(1e-12));

  CHECK_THROWS_AS(pr_auc({0.5, 0.4}, {1, 1}), Error);
  CHECK_THROWS_AS(pr_auc({}, {}), Error);
}

TEST_CASE("pr_auc equals threshold-enumeration oracle on random fixtures") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
      // Coarse grid forces score ties.
      scores.push_back(std::floor(rng.uniform() * 8.0) / 8.0);
      labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(pr_auc(scores, labels) ==
          doctest::Approx(brute_pr_auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("r2 matches hand-computed values") {
  CHECK(r2({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  // SS_res = 4, SS_tot = 5 around the target mean 2.5.
  CHECK(r2({1, 2, 3, 4}, {2, 1, 4, 3}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r2({2, 2, 2}, {2, 2, 2}) == doctest::Approx(1.0));
  CHECK(r2({1, 2, 3}, {2, 2, 2}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(r2({}, {}), Error);
}

TEST_CASE("ks statistic: identity, disjoint, symmetry, brute force") {
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(ks_statistic({1, 2, 3}, {4, 5, 6}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ks_statistic({}, {1.0}), Error);

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 50; ++i) a.push_back(rng.normal());
    for (int i = 0; i < 31; ++i) b.push_back(rng.normal(0.5, 1.5));
    const double d = ks_statistic(a, b);
    CHECK(d == doctest::Approx(brute_ks(a, b)).epsilon(1e-12));
    CHECK(d == doctest::Approx(ks_statistic(b, a)).epsilon(1e-12));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("pearson: exact linear, constant, oracle") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> lin;
  for (double v : x) lin.push_back(2 * v + 3);
  CHECK(pearson(x, lin) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(x, {1, 3, 2, 4}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(pearson(x, {5, 5, 5, 5}) == doctest::Approx(0.0));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 60; ++i) {
      a.push_back(rng.normal());
      b.push_back(0.3 * a.back() + rng.normal());
    }
    CHECK(pearson(a, b) == doctest::Approx(brute_pearson(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("cramers_v: perfect association, hand 2x2, permutation invariance") {
  std::vector<std::int32_t> a = {0, 0, 1, 1, 2, 2};
  CHECK(cramers_v(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  // 2x2 contingency [[20,5],[5,20]]: chi2 = 18, V = sqrt(18/50) = 0.6.
  std::vector<std::int32_t> x, y;
  auto fill = [&](int va, int vb, int count) {
    for (int i = 0; i < count; ++i) {
      x.push_back(va);
      y.push_back(vb);
    }
  };
  fill(0, 0, 20);
  fill(0, 1, 5);
  fill(1, 0, 5);
  fill(1, 1, 20);
  CHECK(cramers_v(x, y) == doctest::Approx(0.6).epsilon(1e-12));

  // Relabeling categories leaves the statistic unchanged.
  std::vector<std::int32_t> xr, yr;
  for (auto v : x) xr.push_back(v == 0 ? 7 : 3);
  for (auto v : y) yr.push_back(v == 0 ? 1 : 0);
  CHECK(cramers_v(xr, yr) == doctest::Approx(0.6).epsilon(1e-12));

  // Perfectly balanced table -> independence -> 0.
  x.clear();
  y.clear();
  fill(0, 0, 10);
  fill(0, 1, 10);
  fill(1, 0, 10);
  fill(1, 1, 10);
  CHECK(cramers_v(x, y) == doctest::Approx(0.0));

  // Single category on one side is degenerate.
  CHECK(cramers_v({0, 0, 0}, {0, 1, 2}) == doctest::Approx(0.0));

  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::int32_t> u, v;
    for (int i = 0; i < 80; ++i) {
      u.push_back(static_cast<std::int32_t>(rng.below(4)));
      v.push_back(static_cast<std::int32_t>(rng.below(3)));
    }
    CHECK(cramers_v(u, v) == doctest::Approx(brute_cramers(u, v)).epsilon(1e-10));
    CHECK(cramers_v(u, v) >= 0.0);
    CHECK(cramers_v(u, v) <= 1.0);
  }
}

TEST_CASE("upcc counts distinct pairs and ignores duplication") {
  auto schema = schema_of({{"a", ColumnKind::categorical, ColumnRole::feature},
                           {"b", ColumnKind::categorical, ColumnRole::feature},
                           {"c", ColumnKind::categorical, ColumnRole::feature}});
  DataTable one(schema);
  one.append_row({}, {"x", "y", "z"});
  CHECK(upcc(one) == 3);

  const auto t = random_mixed(120, 17);
  CHECK(upcc(t) == brute_upcc(t));

  // Row duplication leaves the distinct-pair count unchanged.
  std::vector<std::size_t> twice;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    twice.push_back(r);
    twice.push_back(r);
  }
  CHECK(upcc(t.select_rows(twice)) == upcc(t));
}

TEST_CASE("upcc_ratio and cordv follow their definitions") {
  const auto train = random_mixed(100, 1);
  const auto synth = random_mixed(100, 2);
  const double ratio = upcc_ratio(synth, train);
  CHECK(ratio == doctest::Approx(static_cast<double>(upcc(synth)) / upcc(train))
                     .epsilon(1e-15));

  CHECK(cordv(0.0, 0.5) == doctest::Approx(0.0));
  CHECK(cordv(0.25, 1.0) == doctest::Approx(0.25));
  CHECK(cordv(0.0368, 2369.0 / 3004.0) == doctest::Approx(0.0467).epsilon(2e-3));
  CHECK_THROWS_AS(cordv(0.1, 0.0), Error);

  // cordv * ratio recovers corr_rmse.
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const double c = rng.uniform();
    const double u = rng.uniform() + 0.1;
    CHECK(cordv(c, u) * u == doctest::Approx(c).epsilon(1e-14));
  }

  auto numeric_only = schema_of({{"a", ColumnKind::numeric, ColumnRole::feature}});
  DataTable empty_cats(numeric_only);
  empty_cats.append_row({1.0}, {});
  CHECK_THROWS_AS(upcc_ratio(empty_cats, empty_cats), Error);
}

TEST_CASE("corr_rmse: identity zero, single-pair hand case, oracle") {
  const auto t = random_mixed(150, 23);
  CHECK(corr_rmse(t, t) == doctest::Approx(0.0));

  auto two_num = schema_of({{"x", ColumnKind::numeric, ColumnRole::feature},
                            {"y", ColumnKind::numeric, ColumnRole::feature}});
  DataTable real(two_num), synth(two_num);
  for (int i = 1; i <= 4; ++i) {
    real.append_row({static_cast<double>(i), 2.0 * i}, {});
    synth.append_row({static_cast<double>(i), 5.0}, {});
  }
  CHECK(corr_rmse(real, synth) == doctest::Approx(1.0).epsilon(1e-12));

  const auto a = random_mixed(150, 29);
  const auto b = random_mixed(150, 31);
  // Oracle: recompute over same-kind pairs with the brute-force association
  // measures.
  double acc = 0.0;
  long cnt = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (a.is_numeric(i) != a.is_numeric(j)) continue;
      double va, vb;
      if (a.is_numeric(i)) {
        va = brute_pearson(a.numeric(i), a.numeric(j));
        vb = brute_pearson(b.numeric(i), b.numeric(j));
      } else {
        va = brute_cramers(a.codes(i), a.codes(j));
        vb = brute_cramers(b.codes(i), b.codes(j));
      }
      acc += (va - vb) * (va - vb);
      ++cnt;
    }
  CHECK(corr_rmse(a, b) ==
        doctest::Approx(std::sqrt(acc / static_cast<double>(cnt))).epsilon(1e-10));
}

TEST_CASE("column_ks aligns categorical codings across tables") {
  auto schema = schema_of({{"c", ColumnKind::categorical, ColumnRole::feature}});
  DataTable real(schema), synth(schema);
  real.append_row({}, {"a"});
  real.append_row({}, {"a"});
  real.append_row({}, {"b"});
  synth.append_row({}, {"b"});
  synth.append_row({}, {"c"});
  synth.append_row({}, {"c"});
  // Shared codes: a=0, b=1, c=2. ECDF gap peaks at 2/3.
  const auto ks = column_ks(real, synth);
  REQUIRE(ks.size() == 1);
  CHECK(ks[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const auto t = random_mixed(80, 41);
  for (double v : column_ks(t, t)) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("dimwise_mean_rmse: identity, binary hand case, oracle") {
  const auto t = random_mixed(90, 51);
  CHECK(dimwise_mean_rmse(t, t) == doctest::Approx(0.0));

  auto schema = schema_of({{"flag", ColumnKind::categorical, ColumnRole::feature}});
  DataTable real(schema), synth(schema);
  for (int i = 0; i < 6; ++i) real.append_row({}, {"yes"});
  for (int i = 0; i < 4; ++i) real.append_row({}, {"no"});
  for (int i = 0; i < 5; ++i) synth.append_row({}, {"yes"});
  for (int i = 0; i < 5; ++i) synth.append_row({}, {"no"});
  CHECK(dimwise_mean_rmse(real, synth) == doctest::Approx(0.1).epsilon(1e-12));

  const auto a = random_mixed(90, 53);
  const auto b = random_mixed(110, 57);
  // Oracle: explicit mean vectors in the normalized one-hot space.
  std::vector<double> da, db;
  for (int col = 0; col < 4; ++col) {
    if (a.is_numeric(col)) {
      double mn = a.numeric(col)[0], mx = a.numeric(col)[0];
      for (double v : a.numeric(col)) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      const double range = mx - mn;
      double sa = 0, sb = 0;
      for (double v : a.numeric(col)) sa += (v - mn) / range;
      for (double v : b.numeric(col)) sb += (v - mn) / range;
      da.push_back(sa / static_cast<double>(a.rows()));
      db.push_back(sb / static_cast<double>(b.rows()));
    } else {
      std::vector<std::string> labels = a.dictionary(col);
      for (const auto& l : b.dictionary(col))
        if (std::find(labels.begin(), labels.end(), l) == labels.end())
          labels.push_back(l);
      for (const auto& l : labels) {
        long ca = 0, cb = 0;
        for (std::size_t r = 0; r < a.rows(); ++r) ca += a.label(col, r) == l;
        for (std::size_t r = 0; r < b.rows(); ++r) cb += b.label(col, r) == l;
        da.push_back(static_cast<double>(ca) / static_cast<double>(a.rows()));
        db.push_back(static_cast<double>(cb) / static_cast<double>(b.rows()));
      }
    }
  }
  double acc = 0;
  for (std::size_t i = 0; i < da.size(); ++i) acc += (da[i] - db[i]) * (da[i] - db[i]);
  CHECK(dimwise_mean_rmse(a, b) ==
        doctest::Approx(std::sqrt(acc / static_cast<double>(da.size()))).epsilon(1e-12));
}

TEST_CASE("invalid_ratio applies each rule kind and stays monotone") {
  auto schema = schema_of({{"relationship", ColumnKind::categorical, ColumnRole::feature},
                           {"sex", ColumnKind::categorical, ColumnRole::feature},
                           {"built", ColumnKind::numeric, ColumnRole::feature},
                           {"renovated", ColumnKind::numeric, ColumnRole::feature}});
  DataTable train(schema);
  train.append_row({1950, 1980}, {"husband", "male"});
  train.append_row({1960, 1960}, {"wife", "female"});
  train.append_row({1970, 2000}, {"single", "female"});

  DataTable t(schema);
  int planted = 0;
  for (int i = 0; i < 100; ++i) {
    const bool violate = i % 14 == 3 && planted < 7;  // 7 planted violations
    if (violate) {
      ++planted;
      t.append_row({1990, 2000}, {"husband", "female"});
    } else {
      t.append_row({1990, 2000}, {"husband", "male"});
    }
  }
  REQUIRE(planted == 7);

  ValidityRule husband;
  husband.kind = RuleKind::pair_implication;
  husband.column_a = "relationship";
  husband.label_a = "husband";
  husband.column_b = "sex";
  husband.label_b = "male";
  CHECK(invalid_ratio(t, {husband}, train) == doctest::Approx(0.07).epsilon(1e-12));

  // Renovation before construction violates the order rule.
  ValidityRule order;
  order.kind = RuleKind::numeric_order;
  order.column_a = "renovated";
  order.column_b = "built";
  DataTable houses(schema);
  houses.append_row({1950, 1980}, {"single", "male"});    // ok
  houses.append_row({1990, 1960}, {"single", "male"});    // renovated < built
  houses.append_row({2000, 2000}, {"single", "male"});    // equal is ok
  CHECK(invalid_ratio(houses, {order}, train) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Membership: the (relationship, sex) pair must appear in the train table.
  ValidityRule member;
  member.kind = RuleKind::pair_membership;
  member.column_a = "relationship";
  member.column_b = "sex";
  DataTable pairs(schema);
  pairs.append_row({0, 0}, {"husband", "male"});   // seen in train
  pairs.append_row({0, 0}, {"husband", "female"}); // unseen
  pairs.append_row({0, 0}, {"wife", "female"});    // seen
  pairs.append_row({0, 0}, {"wife", "male"});      // unseen
  CHECK(invalid_ratio(pairs, {member}, train) == doctest::Approx(0.5).epsilon(1e-12));

  // Rows violating any rule count once; adding rules never lowers the ratio.
  const double base = invalid_ratio(t, {husband}, train);
  const double more = invalid_ratio(t, {husband, member, order}, train);
  CHECK(more >= base);
  CHECK(invalid_ratio(t, {}, train) == doctest::Approx(0.0));

  // Oracle: row-by-row manual check of all three rules together.
  DataTable mixed(schema);
  Rng rule_rng(77);
  const std::vector<std::string> rels = {"husband", "wife", "single"};
  const std::vector<std::string> sexes = {"male", "female"};
  for (int i = 0; i < 150; ++i) {
    const double built = 1900 + rule_rng.below(100);
    const double renovated = 1900 + rule_rng.below(130);
    mixed.append_row({built, renovated},
                     {rels[rule_rng.below(3)], sexes[rule_rng.below(2)]});
  }
  long bad = 0;
  for (std::size_t r = 0; r < mixed.rows(); ++r) {
    const bool v1 = mixed.label(0, r) == "husband" && mixed.label(1, r) != "male";
    bool v2 = true;
    for (std::size_t tr = 0; tr < train.rows(); ++tr)
      if (train.label(0, tr) == mixed.label(0, r) &&
          train.label(1, tr) == mixed.label(1, r))
        v2 = false;
    const bool v3 = mixed.numeric(3)[r] < mixed.numeric(2)[r];
    bad += (v1 || v2 || v3) ? 1 : 0;
  }
  const double expected = static_cast<double>(bad) / 150.0;
  CHECK(invalid_ratio(mixed, {husband, member, order}, train) ==
        doctest::Approx(expected).epsilon(1e-12));
}

namespace {

// Separable binary task: y = pos when 3a - 2b + noise > 0.
DataTable labeled_table(std::size_t n, std::uint64_t seed, bool shuffle_labels = false) {
  auto schema = schema_of({{"a", ColumnKind::numeric, ColumnRole::feature},
                           {"b", ColumnKind::numeric, ColumnRole::feature},
                           {"grp", ColumnKind::categorical, ColumnRole::feature},
                           {"y", ColumnKind::categorical, ColumnRole::target}},
                          Task::binary_classification);
  Rng rng(seed);
  std::vector<double> as, bs;
  std::vector<std::string> grps, labels;
  for (std::size_t i = 0; i < n; ++i) {
    as.push_back(rng.normal());
    bs.push_back(rng.normal());
    grps.push_back(rng.uniform() < 0.5 ? "g1" : "g2");
    const double logit = 3.0 * as.back() - 2.0 * bs.back() + rng.normal(0.0, 0.3);
    labels.push_back(logit > 0 ? "pos" : "neg");
  }
  if (shuffle_labels) rng.shuffle(labels);
  DataTable t(schema);
  for (std::size_t i = 0; i < n; ++i) t.append_row({as[i], bs[i]}, {grps[i], labels[i]});
  return t;
}

DataTable regression_table(std::size_t n, std::uint64_t seed, bool shuffle = false) {
  auto schema = schema_of({{"a", ColumnKind::numeric, ColumnRole::feature},
                           {"b", ColumnKind::numeric, ColumnRole::feature},
                           {"y", ColumnKind::numeric, ColumnRole::target}},
                          Task::regression);
  Rng rng(seed);
  std::vector<double> as, bs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    as.push_back(rng.normal());
    bs.push_back(rng.normal());
    ys.push_back(3.0 * as.back() - 2.0 * bs.back() + rng.normal(0.0, 0.2));
  }
  if (shuffle) rng.shuffle(ys);
  DataTable t(schema);
  for (std::size_t i = 0; i < n; ++i) t.append_row({as[i], bs[i], ys[i]}, {});
  return t;
}

}  // namespace

TEST_CASE("tstr separates informative from shuffled training data") {
  const auto train = labeled_table(400, 101);
  const auto test = labeled_table(200, 202);

  std::vector<PredictorScore> scores;
  const double informative = tstr(train, test, 5, &scores);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0].name == "logistic");
  CHECK(scores[1].name == "tree");
  CHECK(scores[2].name == "gbdt");
  double mean = 0;
  for (const auto& s : scores) mean += s.score;
  CHECK(informative == doctest::Approx(mean / 3.0).epsilon(1e-12));
  CHECK(informative > 0.85);

  // Shuffled labels leave only the prior: PR-AUC near the prevalence.
  const auto shuffled = labeled_table(400, 101, true);
  double prevalence = 0;
  for (std::size_t r = 0; r < test.rows(); ++r)
    prevalence += test.label(3, r) == test.dictionary(3)[1] ? 1.0 : 0.0;
  prevalence /= static_cast<double>(test.rows());
  const double degraded = tstr(shuffled, test, 5);
  CHECK(degraded < informative - 0.2);
  CHECK(std::abs(degraded - prevalence) < 0.25);

  // Deterministic in the seed.
  CHECK(tstr(train, test, 5) == informative);
}

TEST_CASE("tstr regression scores r2 and degrades under shuffling") {
  const auto train = regression_table(400, 301);
  const auto test = regression_table(200, 302);
  const double informative = tstr(train, test, 9);
  CHECK(informative > 0.8);
  const double degraded = tstr(regression_table(400, 301, true), test, 9);
  CHECK(degraded < 0.3);
}

TEST_CASE("evaluate produces a stable identity report") {
  const auto t = random_mixed(120, 71);
  const auto report = evaluate(t, t, 3);
  CHECK_FALSE(report.has_tstr);
  CHECK(report.dimwise_rmse == doctest::Approx(0.0));
  CHECK(report.ks_mean == doctest::Approx(0.0));
  CHECK(report.corr_rmse_value == doctest::Approx(0.0));
  CHECK(report.upcc_ratio_value == doctest::Approx(1.0));
  CHECK(report.cordv_value == doctest::Approx(0.0));
  CHECK(report.invalid_ratio_value == doctest::Approx(0.0));

  const std::string text = report.to_text();
  CHECK(text == evaluate(t, t, 3).to_text());
  CHECK(text.find("task = none\n") != std::string::npos);
  CHECK(text.find("dimwise_mean_rmse = 0\n") != std::string::npos);
  CHECK(text.find("upcc_ratio = 1\n") != std::string::npos);
  CHECK(text.find("invalid_ratio = 0\n") != std::string::npos);
  CHECK(text.find("tstr") == std::string::npos);
}

TEST_CASE("evaluate includes tstr lines when the schema declares a task") {
  const auto train = labeled_table(150, 401);
  const auto test = labeled_table(150, 402);
  const auto report = evaluate(train, test, 11);
  CHECK(report.has_tstr);
  CHECK(report.tstr_scores.size() == 3);
  const std::string text = report.to_text();
  CHECK(text.find("tstr_logistic = ") != std::string::npos);
  CHECK(text.find("tstr_metric = ") != std::string::npos);
}
