#include "gantab/gan.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "gantab/csv.hpp"

namespace gantab {

namespace {

constexpr std::uint64_t kTagVgm = 0x56474dULL;    // "VGM"
constexpr std::uint64_t kTagAux = 0x415558ULL;    // "AUX"
constexpr std::uint64_t kTagEnc = 0x454e43ULL;    // "ENC"
constexpr std::uint64_t kTagInit = 0x494e4954ULL; // "INIT"
constexpr std::uint64_t kTagTrain = 0x54524eULL;  // "TRN"
constexpr std::uint64_t kTagSample = 0x534d50ULL; // "SMP"

int thread_budget(int want) {
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget < 1) budget = 1;
  if (const char* env = std::getenv("GANTAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) budget = parsed;
  }
  return std::min(want, budget);
}

// ---- templated working copies (training precision) ------------------------

template <class T>
struct WHead {
  bool numeric = false;
  nn::Dense<T> scalar;
  nn::Dense<T> modes;
};

template <class T>
struct WStage {
  nn::Stack<T> primary;
  WHead<T> head;
  nn::Stack<T> secondary;
  std::vector<WHead<T>> sec_heads;
};

template <class T>
struct WDisc {
  nn::Stack<T> stack;
  nn::Dense<T> out;
};

template <class T>
nn::Dense<T> cast_dense(const nn::Dense<double>& d) {
  return {d.w.template cast<T>(), d.b.template cast<T>()};
}

nn::Dense<double> master_dense(const nn::Dense<float>& d) {
  return {d.w.cast<double>(), d.b.cast<double>()};
}
nn::Dense<double> master_dense(const nn::Dense<double>& d) { return d; }

template <class T>
nn::Stack<T> cast_stack(const nn::Stack<double>& s) {
  nn::Stack<T> out;
  out.act = s.act;
  out.slope = s.slope;
  for (const auto& d : s.dense) out.dense.push_back(cast_dense<T>(d));
  for (const auto& n : s.norm)
    out.norm.push_back({n.gain.template cast<T>(), n.bias.template cast<T>()});
  return out;
}

template <class T>
nn::Stack<double> master_stack(const nn::Stack<T>& s) {
  nn::Stack<double> out;
  out.act = s.act;
  out.slope = s.slope;
  for (const auto& d : s.dense) out.dense.push_back(master_dense(d));
  for (const auto& n : s.norm)
    out.norm.push_back({n.gain.template cast<double>(), n.bias.template cast<double>()});
  return out;
}

template <class T>
WHead<T> cast_head(const HeadParams& h) {
  WHead<T> out;
  out.numeric = h.numeric;
  if (h.numeric) out.scalar = cast_dense<T>(h.scalar);
  out.modes = cast_dense<T>(h.modes);
  return out;
}

template <class T>
HeadParams master_head(const WHead<T>& h) {
  HeadParams out;
  out.numeric = h.numeric;
  if (h.numeric) out.scalar = master_dense(h.scalar);
  out.modes = master_dense(h.modes);
  return out;
}

// ---- initialization --------------------------------------------------------

template <class T>
WHead<T> init_head(int hidden_width, bool numeric, int block_width, Rng& rng) {
  WHead<T> h;
  h.numeric = numeric;
  if (numeric) {
    h.scalar = nn::init_dense<T>(hidden_width, 1, rng);
    h.modes = nn::init_dense<T>(hidden_width, block_width - 1, rng);
  } else {
    h.modes = nn::init_dense<T>(hidden_width, block_width, rng);
  }
  return h;
}

template <class T>
std::vector<WStage<T>> init_stages(const GanConfig& cfg, const DatasetSchema& schema,
                                   const ColumnLayout& layout, Rng& rng) {
  const int m = static_cast<int>(schema.columns.size());
  std::vector<WStage<T>> stages;
  int generated_width = 0;
  for (int i = 0; i < m; ++i) {
    WStage<T> st;
    const int phi_width = cfg.noise_dim + generated_width;
    st.primary = nn::init_stack<T>(phi_width, cfg.gen_hidden, nn::Activation::leaky_relu,
                                   cfg.leaky_slope, rng);
    const bool numeric = schema.columns[i].kind == ColumnKind::numeric;
    st.head = init_head<T>(cfg.gen_hidden.back(), numeric, layout.cols[i].width, rng);
    if (i + 1 < m) {
      st.secondary = nn::init_stack<T>(cfg.noise_dim, cfg.sec_hidden,
                                       nn::Activation::leaky_relu, cfg.leaky_slope, rng);
      for (int j = i + 1; j < m; ++j) {
        const bool jn = schema.columns[j].kind == ColumnKind::numeric;
        st.sec_heads.push_back(
            init_head<T>(cfg.sec_hidden.back(), jn, layout.cols[j].width, rng));
      }
    }
    stages.push_back(std::move(st));
    generated_width += layout.cols[i].width;
  }
  return stages;
}

template <class T>
WDisc<T> init_disc(const GanConfig& cfg, int input_width, Rng& rng) {
  WDisc<T> d;
  d.stack = nn::init_stack<T>(input_width, cfg.disc_hidden, nn::Activation::relu, 0.0, rng);
  d.out = nn::init_dense<T>(cfg.disc_hidden.back(), 1, rng);
  return d;
}

// ---- var wrapping ----------------------------------------------------------

using ad::Var;

template <class T>
struct ParamSet {
  std::vector<Tensor<T>*> tensors;
  std::vector<Var<T>> vars;
};

template <class T>
Var<T> take(Tensor<T>& t, bool train, ParamSet<T>* sink) {
  auto v = train ? ad::leaf(t) : ad::constant(t);
  if (train && sink) {
    sink->tensors.push_back(&t);
    sink->vars.push_back(v);
  }
  return v;
}

template <class T>
nn::StackVars<T> wrap_stack(nn::Stack<T>& s, bool train, ParamSet<T>* sink) {
  nn::StackVars<T> out;
  out.act = s.act;
  out.slope = s.slope;
  for (std::size_t i = 0; i < s.dense.size(); ++i) {
    out.dense.push_back({take(s.dense[i].w, train, sink), take(s.dense[i].b, train, sink)});
    out.norm.push_back({take(s.norm[i].gain, train, sink), take(s.norm[i].bias, train, sink)});
  }
  return out;
}

template <class T>
struct HeadVars {
  bool numeric = false;
  nn::DenseVars<T> scalar;
  nn::DenseVars<T> modes;
};

template <class T>
HeadVars<T> wrap_head(WHead<T>& h, bool train, ParamSet<T>* sink) {
  HeadVars<T> out;
  out.numeric = h.numeric;
  if (h.numeric)
    out.scalar = {take(h.scalar.w, train, sink), take(h.scalar.b, train, sink)};
  out.modes = {take(h.modes.w, train, sink), take(h.modes.b, train, sink)};
  return out;
}

template <class T>
struct StageVars {
  nn::StackVars<T> primary;
  HeadVars<T> head;
  nn::StackVars<T> secondary;
  std::vector<HeadVars<T>> sec_heads;
};

// Primary parameters optionally trainable; secondary networks are always
// wrapped as constants (frozen at initialization by design).
template <class T>
std::vector<StageVars<T>> wrap_stages(std::vector<WStage<T>>& stages, bool train,
                                      ParamSet<T>* sink) {
  std::vector<StageVars<T>> out;
  for (auto& st : stages) {
    StageVars<T> sv;
    ParamSet<T>* frozen = nullptr;
    sv.primary = wrap_stack(st.primary, train, sink);
    sv.head = wrap_head(st.head, train, sink);
    sv.secondary = wrap_stack(st.secondary, false, frozen);
    for (auto& h : st.sec_heads) sv.sec_heads.push_back(wrap_head(h, false, frozen));
    out.push_back(std::move(sv));
  }
  return out;
}

template <class T>
struct DiscVars {
  nn::StackVars<T> stack;
  nn::DenseVars<T> out;
};

template <class T>
DiscVars<T> wrap_disc(WDisc<T>& d, bool train, ParamSet<T>* sink) {
  DiscVars<T> out;
  out.stack = wrap_stack(d.stack, train, sink);
  out.out = {take(d.out.w, train, sink), take(d.out.b, train, sink)};
  return out;
}

// ---- forward ----------------------------------------------------------------

template <class T>
Var<T> head_forward(const HeadVars<T>& head, const Var<T>& h, double tau, Rng& rng) {
  if (head.numeric) {
    auto s = ad::tanh_v(nn::linear(head.scalar, h));
    auto p = nn::gumbel_softmax(nn::linear(head.modes, h), tau, rng);
    return ad::concat_cols<T>({s, p});
  }
  return nn::gumbel_softmax(nn::linear(head.modes, h), tau, rng);
}

template <class T>
struct CascadeOut {
  Var<T> x_hat;                   // full generated row, layout order
  std::vector<Var<T>> blocks;     // per-column generated block
  std::vector<Var<T>> pads;       // per-stage critic/aux input (when requested)
};

template <class T>
CascadeOut<T> cascade_forward(const std::vector<StageVars<T>>& stages, const Var<T>& z,
                              double tau, Rng& rng, bool need_pads) {
  CascadeOut<T> out;
  Var<T> g_prev;
  const int m = static_cast<int>(stages.size());
  for (int i = 0; i < m; ++i) {
    auto phi = i == 0 ? z : ad::concat_cols<T>({z, g_prev});
    auto h = nn::stack_forward(stages[i].primary, phi);
    auto x_i = head_forward(stages[i].head, h, tau, rng);
    out.blocks.push_back(x_i);
    auto g_cur = i == 0 ? x_i : ad::concat_cols<T>({g_prev, x_i});
    if (need_pads) {
      if (i + 1 < m) {
        auto sh = nn::stack_forward(stages[i].secondary, z);
        std::vector<Var<T>> parts{g_cur};
        for (const auto& head : stages[i].sec_heads)
          parts.push_back(head_forward(head, sh, tau, rng));
        out.pads.push_back(ad::concat_cols<T>(parts));
      } else {
        out.pads.push_back(g_cur);
      }
    }
    g_prev = g_cur;
  }
  out.x_hat = g_prev;
  return out;
}

// ---- training steps -----------------------------------------------------------

template <class T>
Tensor<T> gather_rows(const Tensor<T>& source, const std::vector<std::size_t>& order,
                      std::size_t begin, int count) {
  Tensor<T> out(count, source.cols());
  for (int r = 0; r < count; ++r) {
    const auto src = order[begin + r];
    for (int c = 0; c < source.cols(); ++c) out(r, c) = source(static_cast<int>(src), c);
  }
  return out;
}

template <class T>
Tensor<T> noise_matrix(int rows, int cols, Rng& rng) {
  Tensor<T> out(rows, cols);
  for (auto& v : out.raw()) v = static_cast<T>(rng.normal());
  return out;
}

template <class T>
struct TrainContext {
  const GanConfig* cfg = nullptr;
  const DatasetSchema* schema = nullptr;
  const TableCodec* codec = nullptr;
  const std::vector<AuxLearner>* aux = nullptr;
  std::vector<double> lambdas;
  std::vector<WStage<T>>* stages = nullptr;
  WDisc<T>* disc = nullptr;
  nn::Adam<T>* adam_g = nullptr;
  nn::Adam<T>* adam_d = nullptr;
};

template <class T>
Var<T> disc_forward(const DiscVars<T>& d, const Var<T>& x) {
  return nn::linear(d.out, nn::stack_forward(d.stack, x));
}

template <class T>
double d_train_step(TrainContext<T>& ctx, const Tensor<T>& real_rows, Rng& rng) {
  const GanConfig& cfg = *ctx.cfg;
  const int batch = real_rows.rows();

  Tensor<T> real = real_rows;
  if (cfg.real_noise_std > 0)
    for (auto& v : real.raw())
      v = static_cast<T>(v + static_cast<T>(rng.normal(0.0, cfg.real_noise_std)));

  // Fake rows from the frozen generator; only the value is needed.
  auto stage_vs = wrap_stages(*ctx.stages, false, static_cast<ParamSet<T>*>(nullptr));
  auto z = ad::constant(noise_matrix<T>(batch, cfg.noise_dim, rng));
  auto fake = cascade_forward(stage_vs, z, cfg.tau, rng, false).x_hat->value;

  // Per-row interpolation points for the gradient penalty.
  Tensor<T> mix(batch, real.cols());
  for (int r = 0; r < batch; ++r) {
    const T u = static_cast<T>(rng.uniform());
    for (int c = 0; c < real.cols(); ++c)
      mix(r, c) = u * real(r, c) + (T(1) - u) * fake(r, c);
  }

  ParamSet<T> dparams;
  auto dv = wrap_disc(*ctx.disc, true, &dparams);
  auto forward = [&](const Var<T>& x) { return disc_forward(dv, x); };

  auto d_fake = ad::mean_all(forward(ad::constant(std::move(fake))));
  auto d_real = ad::mean_all(forward(ad::constant(std::move(real))));
  auto x_hat = ad::leaf(std::move(mix));
  auto penalty = nn::gradient_penalty(forward, x_hat);
  auto loss = ad::add(ad::sub(d_fake, d_real), ad::scale(penalty, cfg.lambda_gp));

  auto grads = ad::grad(loss, dparams.vars);
  std::vector<Tensor<T>> gvals;
  gvals.reserve(grads.size());
  for (auto& g : grads) gvals.push_back(g->value);
  ctx.adam_d->step(dparams.tensors, gvals);
  return static_cast<double>(loss->value.item());
}

// Decodes one padded row into raw aux learner inputs (numeric values and
// integer category codes). Constant with respect to the graph.
template <class T>
void decode_pad_row(const TableCodec& codec, const Tensor<T>& pad, int row,
                    std::vector<double>& out) {
  const auto& layout = codec.layout();
  const auto& schema = codec.schema();
  const int m = static_cast<int>(schema.columns.size());
  for (int col = 0; col < m; ++col) {
    const auto& slice = layout.cols[col];
    if (schema.columns[col].kind == ColumnKind::numeric) {
      const auto& enc = codec.vgm(col);
      int mode = 0;
      T best = pad(row, slice.offset + 1);
      for (int k = 1; k < enc.modes(); ++k) {
        const T v = pad(row, slice.offset + 1 + k);
        if (v > best) {
          best = v;
          mode = k;
        }
      }
      out[col] = vgm_decode_hard(enc, static_cast<double>(pad(row, slice.offset)), mode);
    } else {
      int idx = 0;
      T best = pad(row, slice.offset);
      for (int k = 1; k < slice.width; ++k) {
        const T v = pad(row, slice.offset + k);
        if (v > best) {
          best = v;
          idx = k;
        }
      }
      out[col] = static_cast<double>(idx);
    }
  }
}

// Auxiliary loss for stage i: query the frozen learner on the decoded pad and
// compare with the generator's own block for column i.
template <class T>
Var<T> aux_loss(TrainContext<T>& ctx, int col, const Var<T>& pad, const Var<T>& block) {
  const auto& learner = (*ctx.aux)[col];
  const auto& schema = *ctx.schema;
  const int batch = pad->value.rows();
  std::vector<double> rawrow(schema.columns.size(), 0.0);

  if (schema.columns[col].kind == ColumnKind::categorical) {
    const int classes = learner.classes();
    Tensor<T> q(batch, classes);
    for (int r = 0; r < batch; ++r) {
      decode_pad_row(*ctx.codec, pad->value, r, rawrow);
      const auto probs = learner.predict_row(rawrow.data());
      for (int c = 0; c < classes; ++c) q(r, c) = static_cast<T>(probs[c]);
    }
    auto ce = ad::mul(ad::constant(std::move(q)), ad::log_v(ad::add_scalar(block, 1e-9)));
    return ad::scale(ad::sum_all(ce), -1.0 / batch);
  }

  const auto& enc = ctx.codec->vgm(col);
  Tensor<T> target(batch, 1);
  for (int r = 0; r < batch; ++r) {
    decode_pad_row(*ctx.codec, pad->value, r, rawrow);
    target(r, 0) = static_cast<T>(learner.predict_value(rawrow.data()));
  }
  const int k = enc.modes();
  Tensor<T> four_sigma(1, k), mu(1, k);
  for (int i = 0; i < k; ++i) {
    four_sigma(0, i) = static_cast<T>(4.0 * enc.stddevs[i]);
    mu(0, i) = static_cast<T>(enc.means[i]);
  }
  auto s = ad::slice_cols(block, 0, 1);
  auto p = ad::slice_cols(block, 1, k);
  auto per_mode = ad::add(ad::mul(s, ad::constant(std::move(four_sigma))),
                          ad::constant(std::move(mu)));
  auto x_soft = ad::sum_over_cols(ad::mul(p, per_mode));
  const double scale = 1.0 / ctx.codec->stats(col).stddev;
  auto diff = ad::scale(ad::sub(x_soft, ad::constant(std::move(target))), scale);
  return ad::mean_all(ad::square(diff));
}

template <class T>
void g_train_step(TrainContext<T>& ctx, int batch, Rng& rng, double& adv_out,
                  std::vector<double>& aux_out) {
  const GanConfig& cfg = *ctx.cfg;
  ParamSet<T> gparams;
  auto stage_vs = wrap_stages(*ctx.stages, true, &gparams);
  auto dv = wrap_disc(*ctx.disc, false, static_cast<ParamSet<T>*>(nullptr));

  auto z = ad::constant(noise_matrix<T>(batch, cfg.noise_dim, rng));
  auto out = cascade_forward(stage_vs, z, cfg.tau, rng, true);

  const int m = static_cast<int>(stage_vs.size());
  Var<T> total;
  adv_out = 0.0;
  aux_out.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    auto adv = ad::neg(ad::mean_all(disc_forward(dv, out.pads[i])));
    auto aux = aux_loss(ctx, i, out.pads[i], out.blocks[i]);
    adv_out += static_cast<double>(adv->value.item());
    aux_out[i] = static_cast<double>(aux->value.item());
    auto term = ad::add(adv, ad::scale(aux, ctx.lambdas[i]));
    total = i == 0 ? term : ad::add(total, term);
  }

  auto grads = ad::grad(total, gparams.vars);
  std::vector<Tensor<T>> gvals;
  gvals.reserve(grads.size());
  for (auto& g : grads) gvals.push_back(g->value);
  ctx.adam_g->step(gparams.tensors, gvals);
}

template <class T>
void run_training(GanModel& model, LossHistory& history, const Tensor<double>& encoded) {
  const GanConfig& cfg = model.config;
  const auto& schema = *model.schema;
  const int m = static_cast<int>(schema.columns.size());

  Rng init_rng(mix_seed(cfg.seed, kTagInit));
  auto stages = init_stages<T>(cfg, schema, model.codec.layout(), init_rng);
  auto disc = init_disc<T>(cfg, model.codec.layout().total_width, init_rng);

  nn::Adam<T> adam_g(cfg.adam_alpha, cfg.adam_beta1, cfg.adam_beta2);
  nn::Adam<T> adam_d(cfg.adam_alpha, cfg.adam_beta1, cfg.adam_beta2);

  TrainContext<T> ctx;
  ctx.cfg = &cfg;
  ctx.schema = model.schema.get();
  ctx.codec = &model.codec;
  ctx.aux = &model.aux;
  ctx.lambdas = aux_coefficients(m, cfg.lambda_al_first, cfg.lambda_al_last);
  ctx.stages = &stages;
  ctx.disc = &disc;
  ctx.adam_g = &adam_g;
  ctx.adam_d = &adam_d;

  const auto real = encoded.cast<T>();
  const std::size_t n = static_cast<std::size_t>(real.rows());
  const std::size_t batches = n / static_cast<std::size_t>(cfg.batch_size);

  Rng rng(mix_seed(cfg.seed, kTagTrain));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> aux_means(m);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double d_sum = 0.0, adv_sum = 0.0;
    std::vector<double> aux_sum(m, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
      const auto batch_rows =
          gather_rows(real, order, b * cfg.batch_size, cfg.batch_size);
      for (int s = 0; s < cfg.d_steps; ++s) d_sum += d_train_step(ctx, batch_rows, rng);
      double adv = 0.0;
      g_train_step(ctx, cfg.batch_size, rng, adv, aux_means);
      adv_sum += adv;
      for (int i = 0; i < m; ++i) aux_sum[i] += aux_means[i];
    }
    const double dn = static_cast<double>(batches * cfg.d_steps);
    history.d_loss.push_back(d_sum / dn);
    history.g_adv.push_back(adv_sum / static_cast<double>(batches));
    for (int i = 0; i < m; ++i) aux_sum[i] /= static_cast<double>(batches);
    history.aux.push_back(aux_sum);
  }

  model.stages.clear();
  for (auto& st : stages) {
    StageParams sp;
    sp.primary = master_stack(st.primary);
    sp.head = master_head(st.head);
    sp.secondary = master_stack(st.secondary);
    for (auto& h : st.sec_heads) sp.sec_heads.push_back(master_head(h));
    model.stages.push_back(std::move(sp));
  }
  model.disc.stack = master_stack(disc.stack);
  model.disc.out = master_dense(disc.out);
}

template <class T>
Tensor<double> sample_encoded(const GanModel& model, std::size_t n, std::uint64_t seed) {
  const GanConfig& cfg = model.config;
  std::vector<WStage<T>> stages;
  for (const auto& sp : model.stages) {
    WStage<T> st;
    st.primary = cast_stack<T>(sp.primary);
    st.head = cast_head<T>(sp.head);
    st.secondary = cast_stack<T>(sp.secondary);
    for (const auto& h : sp.sec_heads) st.sec_heads.push_back(cast_head<T>(h));
    stages.push_back(std::move(st));
  }
  auto stage_vs = wrap_stages(stages, false, static_cast<ParamSet<T>*>(nullptr));

  Tensor<double> out(static_cast<int>(n), model.codec.layout().total_width);
  Rng rng(mix_seed(seed, kTagSample));
  constexpr std::size_t kChunk = 8192;
  std::size_t done = 0;
  while (done < n) {
    const int batch = static_cast<int>(std::min(kChunk, n - done));
    auto z = ad::constant(noise_matrix<T>(batch, cfg.noise_dim, rng));
    auto x = cascade_forward(stage_vs, z, cfg.tau, rng, false).x_hat->value;
    for (int r = 0; r < batch; ++r)
      for (int c = 0; c < x.cols(); ++c)
        out(static_cast<int>(done) + r, c) = static_cast<double>(x(r, c));
    done += batch;
  }
  return out;
}

}  // namespace

void GanConfig::validate(std::size_t train_rows) const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs > 0 && static_cast<std::size_t>(batch_size) > train_rows)
    throw ConfigError("batch_size exceeds the number of training rows");
  if (noise_dim < 1) throw ConfigError("noise_dim must be >= 1");
  if (d_steps < 1) throw ConfigError("d_steps must be >= 1");
  if (tau <= 0) throw ConfigError("tau must be > 0");
  if (lambda_gp < 0) throw ConfigError("lambda_gp must be >= 0");
  if (real_noise_std < 0) throw ConfigError("real_noise_std must be >= 0");
  if (adam_alpha <= 0) throw ConfigError("adam_alpha must be > 0");
  if (epsilon < 0 || epsilon > 1) throw ConfigError("epsilon must be in [0, 1]");
  if (gen_hidden.empty() || sec_hidden.empty() || disc_hidden.empty())
    throw ConfigError("hidden layer lists must not be empty");
  for (int h : gen_hidden)
    if (h < 1) throw ConfigError("generator hidden widths must be >= 1");
  for (int h : sec_hidden)
    if (h < 1) throw ConfigError("secondary hidden widths must be >= 1");
  for (int h : disc_hidden)
    if (h < 1) throw ConfigError("discriminator hidden widths must be >= 1");
}

std::vector<double> aux_coefficients(int m, double first, double last) {
  if (m < 1) throw ConfigError("aux_coefficients requires at least one stage");
  std::vector<double> out(m, first);
  if (m == 1) return out;
  const double step = (last - first) / static_cast<double>(m - 1);
  for (int i = 0; i < m; ++i) out[i] = first + step * i;
  return out;
}

std::string LossHistory::to_csv() const {
  std::ostringstream out;
  const std::size_t m = aux.empty() ? 0 : aux[0].size();
  out << "epoch,d_loss,g_adv_loss";
  for (std::size_t i = 1; i <= m; ++i) out << ",aux_loss_" << i;
  out << '\n';
  for (std::size_t e = 0; e < d_loss.size(); ++e) {
    out << (e + 1) << ',' << format_double(d_loss[e]) << ',' << format_double(g_adv[e]);
    for (std::size_t i = 0; i < m; ++i) out << ',' << format_double(aux[e][i]);
    out << '\n';
  }
  return out.str();
}

TrainResult train_gan(const DataTable& train_table, const GanConfig& config) {
  config.validate(train_table.rows());
  if (train_table.rows() < 2) throw Error("training table needs at least 2 rows");
  const bool checks_before = ad::finite_checks();
  ad::finite_checks() = config.check_finite;

  TrainResult result;
  GanModel& model = result.model;
  model.schema = train_table.schema_ptr();
  model.config = config;
  model.train_rows = train_table.rows();
  model.codec.fit(train_table, config.vgm, mix_seed(config.seed, kTagVgm));

  // Auxiliary learners, one per column, trained in parallel.
  const auto raw = model.codec.encode_raw(train_table);
  const int m = model.columns();
  std::vector<FeatureMeta> meta(m);
  for (int c = 0; c < m; ++c) {
    if (model.schema->columns[c].kind == ColumnKind::categorical)
      meta[c] = {true, model.codec.onehot(c).size()};
  }
  model.aux.resize(m);
  {
    const int workers = thread_budget(m);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(m);
    auto work = [&] {
      for (int c = next.fetch_add(1); c < m; c = next.fetch_add(1)) {
        try {
          const auto objective = meta[c].categorical ? AuxObjective::classification
                                                     : AuxObjective::regression;
          model.aux[c] = AuxLearner::train(raw, meta, c, objective, config.aux,
                                           config.epsilon,
                                           mix_seed(config.seed, kTagAux + c));
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Rng enc_rng(mix_seed(config.seed, kTagEnc));
  const auto encoded = model.codec.encode(train_table, enc_rng);

  if (config.precision == Precision::f32)
    run_training<float>(model, result.history, encoded);
  else
    run_training<double>(model, result.history, encoded);

  ad::finite_checks() = checks_before;
  return result;
}

DataTable GanModel::sample(std::size_t n, std::uint64_t seed) const {
  if (stages.empty()) throw Error("sample on an empty model");
  const auto encoded = config.precision == Precision::f32
                           ? sample_encoded<float>(*this, n, seed)
                           : sample_encoded<double>(*this, n, seed);
  return codec.decode(encoded);
}

}  // namespace gantab
