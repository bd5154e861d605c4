#include "gantab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "gantab/csv.hpp"
#include "gantab/rng.hpp"

namespace gantab {

namespace {

constexpr std::uint64_t kTagAttack = 0x4154544bULL;  // "ATTK"

std::size_t rounded_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::floor(raw + 0.5));
  return std::min(k, n);
}

void require_same_schema(const DataTable& a, const DataTable& b) {
  const auto& ca = a.schema().columns;
  const auto& cb = b.schema().columns;
  if (ca.size() != cb.size()) throw Error("tables have different column counts");
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (ca[i].name != cb[i].name || ca[i].kind != cb[i].kind)
      throw Error("tables disagree on column '" + ca[i].name + "'");
}

}  // namespace

void AttackConfig::validate() const {
  if (iterations < 1) throw ConfigError("attack iterations must be >= 1");
  if (!(attacked_fraction > 0.0) || attacked_fraction > 1.0)
    throw ConfigError("attacked_fraction must be in (0, 1]");
}

AttackOutcome whitebox_attack(const DataTable& synth,
                              const std::vector<AuxLearner>& learners,
                              const TableCodec* codec, const AttackConfig& config) {
  config.validate();
  const int m = static_cast<int>(synth.cols());
  if (learners.size() != static_cast<std::size_t>(m))
    throw Error("one auxiliary learner per column is required");
  if (config.access_preprocessors && codec == nullptr)
    throw Error("access_preprocessors requires the model codec");

  const std::size_t n = synth.rows();
  const std::size_t k = rounded_count(config.attacked_fraction, n);
  if (k == 0) throw Error("attacked_fraction selects zero rows");

  Rng rng(mix_seed(config.seed, kTagAttack));
  AttackOutcome out{synth, rng.sample_indices(n, k)};

  // Attacker-side dictionaries: the model's fitted ones with access, the
  // synthetic table's own first-appearance ones without.
  std::vector<std::vector<std::string>> dicts(m);
  std::vector<std::unordered_map<std::string, int>> index(m);
  for (int c = 0; c < m; ++c) {
    if (synth.is_numeric(c)) continue;
    dicts[c] = config.access_preprocessors ? codec->onehot(c).labels
                                           : synth.dictionary(c);
    for (std::size_t i = 0; i < dicts[c].size(); ++i)
      index[c].emplace(dicts[c][i], static_cast<int>(i));
  }

  auto encode_row = [&](std::size_t r, std::vector<double>& raw) {
    for (int c = 0; c < m; ++c) {
      if (out.attacked.is_numeric(c)) {
        raw[c] = out.attacked.numeric(c)[r];
        continue;
      }
      const auto& label = out.attacked.label(c, r);
      const auto it = index[c].find(label);
      if (it == index[c].end())
        throw Error("label '" + label + "' missing from the attack dictionary of '" +
                    synth.schema().columns[c].name + "'");
      raw[c] = static_cast<double>(it->second);
    }
  };

  std::vector<double> raw(m);
  for (int it = 0; it < config.iterations; ++it) {
    for (int c = 0; c < m; ++c) {
      const auto& learner = learners[c];
      for (std::size_t r : out.rows) {
        encode_row(r, raw);
        if (out.attacked.is_numeric(c)) {
          out.attacked.set_numeric(c, r, learner.predict_value(raw.data()));
          continue;
        }
        const auto probs = learner.predict_row(raw.data());
        int cls = 0;
        for (std::size_t j = 1; j < probs.size(); ++j)
          if (probs[j] > probs[cls]) cls = static_cast<int>(j);
        if (cls < static_cast<int>(dicts[c].size()))
          out.attacked.set_label(c, r, dicts[c][cls]);
      }
    }
  }
  return out;
}

namespace {

// Row embedding in the train-anchored normalized one-hot space.
struct DistanceSpace {
  struct NumericDim {
    int col = 0;
    double min = 0.0, range = 1.0;
  };
  struct CategoricalDim {
    int col = 0;
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> index;
  };
  std::vector<NumericDim> numerics;
  std::vector<CategoricalDim> categoricals;
  int width = 0;

  void embed(const DataTable& t, std::size_t row, std::vector<double>& out) const {
    out.assign(width, 0.0);
    int off = 0;
    for (const auto& d : numerics) {
      out[off++] = (t.numeric(d.col)[row] - d.min) / d.range;
    }
    for (const auto& d : categoricals) {
      const auto it = d.index.find(t.label(d.col, row));
      if (it != d.index.end()) out[off + it->second] = 1.0;
      off += static_cast<int>(d.labels.size());
    }
  }
};

DistanceSpace build_space(const DataTable& train, const DataTable& attacked,
                          const DataTable& preattack) {
  DistanceSpace space;
  const int m = static_cast<int>(train.cols());
  for (int c = 0; c < m; ++c) {
    if (train.is_numeric(c)) {
      const auto& v = train.numeric(c);
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      DistanceSpace::NumericDim d;
      d.col = c;
      d.min = *mn;
      d.range = *mx - *mn;
      if (d.range <= 0.0) d.range = 1.0;
      space.numerics.push_back(d);
      space.width += 1;
      continue;
    }
    DistanceSpace::CategoricalDim d;
    d.col = c;
    d.labels = train.dictionary(c);
    for (const DataTable* t : {&attacked, &preattack})
      for (const auto& label : t->dictionary(c))
        if (std::find(d.labels.begin(), d.labels.end(), label) == d.labels.end())
          d.labels.push_back(label);
    for (std::size_t i = 0; i < d.labels.size(); ++i)
      d.index.emplace(d.labels[i], static_cast<int>(i));
    space.width += static_cast<int>(d.labels.size());
    space.categoricals.push_back(std::move(d));
  }
  return space;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

AttackReport attack_distances(const DataTable& attacked, const DataTable& preattack,
                              const DataTable& train,
                              const std::vector<std::size_t>& rows,
                              std::vector<RowDistance>* per_row) {
  require_same_schema(attacked, preattack);
  require_same_schema(attacked, train);
  if (train.rows() == 0) throw Error("attack distances need a non-empty train table");
  if (attacked.rows() != preattack.rows())
    throw Error("attacked and pre-attack tables differ in row count");
  if (rows.empty()) throw Error("no attacked rows to score");

  const auto space = build_space(train, attacked, preattack);
  std::vector<std::vector<double>> train_points(train.rows());
  for (std::size_t r = 0; r < train.rows(); ++r) space.embed(train, r, train_points[r]);

  AttackReport report;
  report.attacked_rows = rows.size();
  if (per_row) per_row->clear();
  std::vector<double> va, vp;
  for (std::size_t r : rows) {
    if (r >= attacked.rows()) throw Error("attacked row id out of range");
    space.embed(attacked, r, va);
    space.embed(preattack, r, vp);
    double nearest = euclidean(va, train_points[0]);
    for (std::size_t t = 1; t < train_points.size(); ++t)
      nearest = std::min(nearest, euclidean(va, train_points[t]));
    const double drift = euclidean(va, vp);
    report.euc_to_train += nearest;
    report.euc_to_preattack += drift;
    if (per_row) per_row->push_back({r, nearest, drift});
  }
  report.euc_to_train /= static_cast<double>(rows.size());
  report.euc_to_preattack /= static_cast<double>(rows.size());
  return report;
}

std::string AttackReport::to_text() const {
  std::ostringstream out;
  out << "access_preprocessors = " << (access_preprocessors ? "true" : "false") << '\n';
  out << "epsilon = " << format_double(epsilon) << '\n';
  out << "attacked_rows = " << attacked_rows << '\n';
  out << "euc_to_train = " << format_double(euc_to_train) << '\n';
  out << "euc_to_preattack = " << format_double(euc_to_preattack) << '\n';
  return out.str();
}

}  // namespace gantab
