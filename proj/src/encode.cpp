#include "gantab/encode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gantab/error.hpp"

namespace gantab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double digamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12 -
                    inv2 * (1.0 / 120 -
                            inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
  return result;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Variational posterior state for one component: Dirichlet pseudo-count and
// Normal-Gamma parameters over (mean, precision).
struct Component {
  double alpha, beta, m, a, b;
};

struct Priors {
  double alpha0, beta0, m0, a0, b0;
};

// KL(Dirichlet(alpha) || Dirichlet(alpha0 * 1))
double dirichlet_kl(const std::vector<Component>& comps, double alpha0) {
  const int k = static_cast<int>(comps.size());
  double alpha_sum = 0.0;
  for (const auto& c : comps) alpha_sum += c.alpha;
  double kl = std::lgamma(alpha_sum) - std::lgamma(k * alpha0);
  for (const auto& c : comps) {
    kl += std::lgamma(alpha0) - std::lgamma(c.alpha);
    kl += (c.alpha - alpha0) * (digamma(c.alpha) - digamma(alpha_sum));
  }
  return kl;
}

// KL(NormalGamma(q) || NormalGamma(prior)) for one component.
double normal_gamma_kl(const Component& q, const Priors& p) {
  const double e_tau = q.a / q.b;
  const double normal_part = 0.5 * std::log(q.beta / p.beta0) - 0.5 +
                             0.5 * p.beta0 * (e_tau * (q.m - p.m0) * (q.m - p.m0) + 1.0 / q.beta);
  const double gamma_part = (q.a - p.a0) * digamma(q.a) - std::lgamma(q.a) +
                            std::lgamma(p.a0) + p.a0 * (std::log(q.b) - std::log(p.b0)) +
                            q.a * (p.b0 - q.b) / q.b;
  return normal_part + gamma_part;
}

}  // namespace

VgmEncoder fit_vgm(const std::vector<double>& values, const VgmParams& params,
                   std::uint64_t seed, VgmTrace* trace) {
  if (values.empty()) throw Error("fit_vgm: no values");
  if (params.max_components < 1) throw ConfigError("vgm max_components must be >= 1");
  if (params.weight_threshold < 0.0 || params.weight_threshold >= 1.0)
    throw ConfigError("vgm weight_threshold must be in [0, 1)");

  const std::size_t n = values.size();
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);

  if (var < 1e-24) {
    VgmEncoder enc;
    enc.weights = {1.0};
    enc.means = {mean};
    enc.stddevs = {std::max(std::abs(mean) * 1e-6, 1e-6)};
    if (trace) trace->elbo.clear();
    return enc;
  }

  const int k = params.max_components;
  const Priors prior{1e-3, 1.0, mean, 0.5, 0.5 * var};

  // k-means++-style seeding for the initial responsibilities.
  Rng rng(mix_seed(seed, 0x76676d2bULL));
  std::vector<double> centers;
  centers.push_back(values[rng.below(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(values[rng.below(n)]);
      continue;
    }
    double u = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      u -= d2[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }

  // Hard initial assignment to the nearest center.
  std::vector<double> nk(k, 0.0), xbar(k, 0.0), sk(k, 0.0);
  std::vector<int> assign(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = (values[i] - centers[c]) * (values[i] - centers[c]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    assign[i] = best;
    nk[best] += 1.0;
    xbar[best] += values[i];
  }
  for (int c = 0; c < k; ++c)
    if (nk[c] > 0) xbar[c] /= nk[c];
  for (std::size_t i = 0; i < n; ++i) {
    const int c = assign[i];
    sk[c] += (values[i] - xbar[c]) * (values[i] - xbar[c]);
  }
  for (int c = 0; c < k; ++c)
    if (nk[c] > 0) sk[c] /= nk[c];

  std::vector<Component> comps(k);
  auto m_step = [&] {
    for (int c = 0; c < k; ++c) {
      const double nc = nk[c];
      comps[c].alpha = prior.alpha0 + nc;
      comps[c].beta = prior.beta0 + nc;
      comps[c].m = (prior.beta0 * prior.m0 + nc * xbar[c]) / comps[c].beta;
      comps[c].a = prior.a0 + 0.5 * nc;
      comps[c].b = prior.b0 +
                   0.5 * (nc * sk[c] + prior.beta0 * nc * (xbar[c] - prior.m0) * (xbar[c] - prior.m0) /
                                           (prior.beta0 + nc));
    }
  };
  m_step();

  if (trace) trace->elbo.clear();
  std::vector<double> logrho(k), resp(k);
  double prev_elbo = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    double alpha_sum = 0.0;
    for (const auto& c : comps) alpha_sum += c.alpha;
    std::vector<double> e_log_pi(k), e_log_tau(k), e_tau(k);
    for (int c = 0; c < k; ++c) {
      e_log_pi[c] = digamma(comps[c].alpha) - digamma(alpha_sum);
      e_log_tau[c] = digamma(comps[c].a) - std::log(comps[c].b);
      e_tau[c] = comps[c].a / comps[c].b;
    }

    // E-step with running statistics; the data fit term of the ELBO is
    // sum_n logsumexp_k log rho_nk for the optimal q(Z).
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(xbar.begin(), xbar.end(), 0.0);
    std::fill(sk.begin(), sk.end(), 0.0);
    double fit_term = 0.0;
    std::vector<std::vector<double>> all_resp(k, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const double dx = values[i] - comps[c].m;
        logrho[c] = e_log_pi[c] + 0.5 * e_log_tau[c] - 0.5 * kLog2Pi -
                    0.5 * (1.0 / comps[c].beta + e_tau[c] * dx * dx);
      }
      const double lse = log_sum_exp(logrho);
      fit_term += lse;
      for (int c = 0; c < k; ++c) {
        const double r = std::exp(logrho[c] - lse);
        all_resp[c][i] = r;
        nk[c] += r;
      }
    }
    for (int c = 0; c < k; ++c) {
      if (nk[c] > 1e-300) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += all_resp[c][i] * values[i];
        xbar[c] = s / nk[c];
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          q += all_resp[c][i] * (values[i] - xbar[c]) * (values[i] - xbar[c]);
        sk[c] = q / nk[c];
      } else {
        xbar[c] = prior.m0;
        sk[c] = 0.0;
      }
    }

    double elbo = fit_term - dirichlet_kl(comps, prior.alpha0);
    for (const auto& c : comps) elbo -= normal_gamma_kl(c, prior);
    if (trace) trace->elbo.push_back(elbo);

    m_step();

    if (iter > 0 &&
        std::abs(elbo - prev_elbo) <=
            params.tolerance * (std::abs(elbo) + static_cast<double>(n)))
      break;
    prev_elbo = elbo;
  }

  // Point estimates, pruning, canonical order by mean.
  double alpha_sum = 0.0;
  for (const auto& c : comps) alpha_sum += c.alpha;
  struct Mode {
    double w, mu, sigma;
  };
  std::vector<Mode> modes;
  for (const auto& c : comps) {
    const double w = c.alpha / alpha_sum;
    if (w >= params.weight_threshold)
      modes.push_back({w, c.m, std::sqrt(c.b / c.a)});
  }
  if (modes.empty()) {
    const auto* best = &comps[0];
    for (const auto& c : comps)
      if (c.alpha > best->alpha) best = &c;
    modes.push_back({1.0, best->m, std::sqrt(best->b / best->a)});
  }
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.mu != b.mu) return a.mu < b.mu;
    return a.w > b.w;
  });
  double wsum = 0.0;
  for (const auto& m : modes) wsum += m.w;

  VgmEncoder enc;
  for (const auto& m : modes) {
    enc.weights.push_back(m.w / wsum);
    enc.means.push_back(m.mu);
    enc.stddevs.push_back(std::max(m.sigma, 1e-12));
  }
  return enc;
}

std::vector<double> vgm_posterior(const VgmEncoder& enc, double x) {
  const int k = enc.modes();
  std::vector<double> logp(k);
  for (int c = 0; c < k; ++c) {
    const double z = (x - enc.means[c]) / enc.stddevs[c];
    logp[c] = std::log(enc.weights[c]) - std::log(enc.stddevs[c]) - 0.5 * z * z;
  }
  const double lse = log_sum_exp(logp);
  std::vector<double> out(k);
  for (int c = 0; c < k; ++c) out[c] = std::exp(logp[c] - lse);
  return out;
}

EncodedNumeric vgm_encode(const VgmEncoder& enc, double x, Rng& rng) {
  const auto probs = vgm_posterior(enc, x);
  const double u = rng.uniform();
  int mode = enc.modes() - 1;
  double acc = 0.0;
  for (int c = 0; c < enc.modes(); ++c) {
    acc += probs[c];
    if (u < acc) {
      mode = c;
      break;
    }
  }
  const double raw = (x - enc.means[mode]) / (4.0 * enc.stddevs[mode]);
  return {std::clamp(raw, -1.0, 1.0), mode};
}

double vgm_decode_hard(const VgmEncoder& enc, double scalar, int mode) {
  if (mode < 0 || mode >= enc.modes()) throw Error("vgm mode out of range");
  return scalar * 4.0 * enc.stddevs[mode] + enc.means[mode];
}

double vgm_decode_soft(const VgmEncoder& enc, double scalar,
                       const std::vector<double>& mode_probs) {
  if (static_cast<int>(mode_probs.size()) != enc.modes())
    throw Error("vgm_decode_soft: probability width mismatch");
  double out = 0.0;
  for (int c = 0; c < enc.modes(); ++c)
    out += mode_probs[c] * (scalar * 4.0 * enc.stddevs[c] + enc.means[c]);
  return out;
}

int OneHotEncoder::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

void TableCodec::build_layout() {
  layout_.cols.clear();
  layout_.total_width = 0;
  for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
    int width;
    if (schema_->columns[col].kind == ColumnKind::numeric)
      width = 1 + vgms_[slot_[col]].modes();
    else
      width = onehots_[slot_[col]].size();
    layout_.cols.push_back({layout_.total_width, width});
    layout_.total_width += width;
  }
}

void TableCodec::fit(const DataTable& train, const VgmParams& params, std::uint64_t seed) {
  if (train.rows() == 0) throw Error("TableCodec::fit: empty training table");
  schema_ = train.schema_ptr();
  slot_.assign(schema_->columns.size(), -1);
  vgms_.clear();
  onehots_.clear();
  stats_.assign(schema_->columns.size(), NumericStats{});

  for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
    if (schema_->columns[col].kind == ColumnKind::numeric) {
      const auto& v = train.numeric(static_cast<int>(col));
      slot_[col] = static_cast<int>(vgms_.size());
      vgms_.push_back(fit_vgm(v, params, mix_seed(seed, col)));

      NumericStats st;
      st.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double var = 0.0;
      st.min = v[0];
      st.max = v[0];
      for (double x : v) {
        var += (x - st.mean) * (x - st.mean);
        st.min = std::min(st.min, x);
        st.max = std::max(st.max, x);
      }
      st.stddev = std::sqrt(var / static_cast<double>(v.size()));
      if (st.stddev < 1e-12) st.stddev = 1.0;
      stats_[col] = st;
    } else {
      // Frozen from categories actually present in the training split, in
      // first appearance order.
      const auto& codes = train.codes(static_cast<int>(col));
      const auto& dict = train.dictionary(static_cast<int>(col));
      OneHotEncoder enc;
      std::vector<bool> seen(dict.size(), false);
      for (auto code : codes) {
        if (!seen[code]) {
          seen[code] = true;
          enc.labels.push_back(dict[code]);
        }
      }
      slot_[col] = static_cast<int>(onehots_.size());
      onehots_.push_back(std::move(enc));
    }
  }
  build_layout();
  fitted_ = true;
}

void TableCodec::restore(std::shared_ptr<const DatasetSchema> schema,
                         std::vector<VgmEncoder> vgms, std::vector<OneHotEncoder> onehots,
                         std::vector<NumericStats> stats) {
  schema_ = std::move(schema);
  vgms_ = std::move(vgms);
  onehots_ = std::move(onehots);
  stats_ = std::move(stats);
  slot_.assign(schema_->columns.size(), -1);
  std::size_t vi = 0, oi = 0;
  for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
    if (schema_->columns[col].kind == ColumnKind::numeric)
      slot_[col] = static_cast<int>(vi++);
    else
      slot_[col] = static_cast<int>(oi++);
  }
  if (vi != vgms_.size() || oi != onehots_.size())
    throw Error("TableCodec::restore: encoder count mismatch");
  build_layout();
  fitted_ = true;
}

const VgmEncoder& TableCodec::vgm(int col) const {
  if (schema_->columns[col].kind != ColumnKind::numeric)
    throw Error("vgm() on categorical column");
  return vgms_[slot_[col]];
}

const OneHotEncoder& TableCodec::onehot(int col) const {
  if (schema_->columns[col].kind != ColumnKind::categorical)
    throw Error("onehot() on numeric column");
  return onehots_[slot_[col]];
}

const NumericStats& TableCodec::stats(int col) const { return stats_[col]; }

Tensor<double> TableCodec::encode(const DataTable& table, Rng& rng) const {
  if (!fitted_) throw Error("TableCodec: encode before fit");
  const std::size_t n = table.rows();
  Tensor<double> out(static_cast<int>(n), layout_.total_width);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
      const auto& slice = layout_.cols[col];
      if (schema_->columns[col].kind == ColumnKind::numeric) {
        const auto& enc = vgms_[slot_[col]];
        const auto e = vgm_encode(enc, table.numeric(static_cast<int>(col))[r], rng);
        out(static_cast<int>(r), slice.offset) = e.scalar;
        out(static_cast<int>(r), slice.offset + 1 + e.mode) = 1.0;
      } else {
        const auto& enc = onehots_[slot_[col]];
        const std::string& label = table.label(static_cast<int>(col), r);
        const int idx = enc.index_of(label);
        if (idx < 0)
          throw Error("unseen category '" + label + "' in column " +
                      schema_->columns[col].name);
        out(static_cast<int>(r), slice.offset + idx) = 1.0;
      }
    }
  }
  return out;
}

DataTable TableCodec::decode(const Tensor<double>& encoded) const {
  if (!fitted_) throw Error("TableCodec: decode before fit");
  if (encoded.cols() != layout_.total_width)
    throw Error("decode: width mismatch");
  DataTable out(schema_);
  std::vector<double> numerics;
  std::vector<std::string> labels;
  for (int r = 0; r < encoded.rows(); ++r) {
    numerics.clear();
    labels.clear();
    for (std::size_t col = 0; col < schema_->columns.size(); ++col) {
      const auto& slice = layout_.cols[col];
      if (schema_->columns[col].kind == ColumnKind::numeric) {
        const auto& enc = vgms_[slot_[col]];
        const double scalar = encoded(r, slice.offset);
        int mode = 0;
        double best = encoded(r, slice.offset + 1);
        for (int k = 1; k < enc.modes(); ++k) {
          const double v = encoded(r, slice.offset + 1 + k);
          if (v > best) {
            best = v;
            mode = k;
          }
        }
        numerics.push_back(vgm_decode_hard(enc, scalar, mode));
      } else {
        const auto& enc = onehots_[slot_[col]];
        int idx = 0;
        double best = encoded(r, slice.offset);
        for (int k = 1; k < enc.size(); ++k) {
          const double v = encoded(r, slice.offset + k);
          if (v > best) {
            best = v;
            idx = k;
          }
        }
        labels.push_back(enc.labels[idx]);
      }
    }
    out.append_row(numerics, labels);
  }
  return out;
}

Tensor<double> TableCodec::encode_raw(const DataTable& table) const {
  if (!fitted_) throw Error("TableCodec: encode_raw before fit");
  const std::size_t n = table.rows();
  const int m = static_cast<int>(schema_->columns.size());
  Tensor<double> out(static_cast<int>(n), m);
  for (std::size_t r = 0; r < n; ++r) {
    for (int col = 0; col < m; ++col) {
      if (schema_->columns[col].kind == ColumnKind::numeric) {
        out(static_cast<int>(r), col) = table.numeric(col)[r];
      } else {
        const auto& enc = onehots_[slot_[col]];
        const std::string& label = table.label(col, r);
        const int idx = enc.index_of(label);
        if (idx < 0)
          throw Error("unseen category '" + label + "' in column " +
                      schema_->columns[col].name);
        out(static_cast<int>(r), col) = static_cast<double>(idx);
      }
    }
  }
  return out;
}

}  // namespace gantab
