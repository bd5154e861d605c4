#include "gantab/container.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace gantab {
namespace {

using nlohmann::json;  // std::map-backed: keys serialize in sorted order

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<unsigned char> b64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw Error("container: base64 length not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw Error("container: stray base64 padding");
        vals[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw Error("container: stray base64 padding");
        vals[k] = b64_value(c);
        if (vals[k] < 0) throw Error("container: invalid base64 character");
      }
    }
    const unsigned v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

json tensor_to_json(const Tensor<double>& t) {
  std::vector<unsigned char> bytes;
  bytes.reserve(t.raw().size() * 8);
  for (double v : t.raw()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int k = 0; k < 8; ++k)
      bytes.push_back(static_cast<unsigned char>((bits >> (8 * k)) & 0xff));
  }
  return json{{"b64", b64_encode(bytes)}, {"cols", t.cols()}, {"rows", t.rows()}};
}

Tensor<double> tensor_from_json(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  if (rows < 0 || cols < 0) throw Error("container: negative tensor shape");
  const auto bytes = b64_decode(j.at("b64").get<std::string>());
  const std::size_t expect = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8;
  if (bytes.size() != expect) throw Error("container: tensor payload size mismatch");
  Tensor<double> t(rows, cols);
  for (std::size_t i = 0; i < t.raw().size(); ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
      bits |= static_cast<std::uint64_t>(bytes[i * 8 + k]) << (8 * k);
    double v;
    std::memcpy(&v, &bits, 8);
    t.raw()[i] = v;
  }
  return t;
}

json dense_to_json(const nn::Dense<double>& d) {
  return json{{"b", tensor_to_json(d.b)}, {"w", tensor_to_json(d.w)}};
}

nn::Dense<double> dense_from_json(const json& j) {
  return {tensor_from_json(j.at("w")), tensor_from_json(j.at("b"))};
}

json stack_to_json(const nn::Stack<double>& s) {
  json dense = json::array();
  for (const auto& d : s.dense) dense.push_back(dense_to_json(d));
  json norm = json::array();
  for (const auto& n : s.norm)
    norm.push_back(json{{"bias", tensor_to_json(n.bias)}, {"gain", tensor_to_json(n.gain)}});
  return json{{"act", s.act == nn::Activation::relu ? "relu" : "leaky_relu"},
              {"dense", std::move(dense)},
              {"norm", std::move(norm)},
              {"slope", s.slope}};
}

nn::Stack<double> stack_from_json(const json& j) {
  nn::Stack<double> s;
  const auto act = j.at("act").get<std::string>();
  if (act == "relu")
    s.act = nn::Activation::relu;
  else if (act == "leaky_relu")
    s.act = nn::Activation::leaky_relu;
  else
    throw Error("container: unknown activation '" + act + "'");
  s.slope = j.at("slope").get<double>();
  for (const auto& d : j.at("dense")) s.dense.push_back(dense_from_json(d));
  for (const auto& n : j.at("norm"))
    s.norm.push_back({tensor_from_json(n.at("gain")), tensor_from_json(n.at("bias"))});
  if (s.dense.size() != s.norm.size())
    throw Error("container: stack dense/norm layer count mismatch");
  return s;
}

json head_to_json(const HeadParams& h) {
  return json{{"modes", dense_to_json(h.modes)},
              {"numeric", h.numeric},
              {"scalar", dense_to_json(h.scalar)}};
}

HeadParams head_from_json(const json& j) {
  HeadParams h;
  h.numeric = j.at("numeric").get<bool>();
  h.scalar = dense_from_json(j.at("scalar"));
  h.modes = dense_from_json(j.at("modes"));
  return h;
}

json config_to_json(const GanConfig& c) {
  return json{{"adam_alpha", c.adam_alpha},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"aux",
               json{{"early_stopping_rounds", c.aux.early_stopping_rounds},
                    {"learning_rate", c.aux.learning_rate},
                    {"min_data_in_leaf", c.aux.min_data_in_leaf},
                    {"num_leaves", c.aux.num_leaves},
                    {"rounds", c.aux.rounds},
                    {"validation_fraction", c.aux.validation_fraction}}},
              {"batch_size", c.batch_size},
              {"check_finite", c.check_finite},
              {"d_steps", c.d_steps},
              {"disc_hidden", c.disc_hidden},
              {"epochs", c.epochs},
              {"epsilon", c.epsilon},
              {"gen_hidden", c.gen_hidden},
              {"lambda_al_first", c.lambda_al_first},
              {"lambda_al_last", c.lambda_al_last},
              {"lambda_gp", c.lambda_gp},
              {"leaky_slope", c.leaky_slope},
              {"noise_dim", c.noise_dim},
              {"precision", c.precision == Precision::f64 ? "f64" : "f32"},
              {"real_noise_std", c.real_noise_std},
              {"sec_hidden", c.sec_hidden},
              {"seed", c.seed},
              {"tau", c.tau},
              {"vgm",
               json{{"max_components", c.vgm.max_components},
                    {"max_iterations", c.vgm.max_iterations},
                    {"tolerance", c.vgm.tolerance},
                    {"weight_threshold", c.vgm.weight_threshold}}}};
}

GanConfig config_from_json(const json& j) {
  GanConfig c;
  c.adam_alpha = j.at("adam_alpha").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.check_finite = j.at("check_finite").get<bool>();
  c.d_steps = j.at("d_steps").get<int>();
  c.disc_hidden = j.at("disc_hidden").get<std::vector<int>>();
  c.epochs = j.at("epochs").get<int>();
  c.epsilon = j.at("epsilon").get<double>();
  c.gen_hidden = j.at("gen_hidden").get<std::vector<int>>();
  c.lambda_al_first = j.at("lambda_al_first").get<double>();
  c.lambda_al_last = j.at("lambda_al_last").get<double>();
  c.lambda_gp = j.at("lambda_gp").get<double>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.noise_dim = j.at("noise_dim").get<int>();
  const auto prec = j.at("precision").get<std::string>();
  if (prec == "f32")
    c.precision = Precision::f32;
  else if (prec == "f64")
    c.precision = Precision::f64;
  else
    throw Error("container: unknown precision '" + prec + "'");
  c.real_noise_std = j.at("real_noise_std").get<double>();
  c.sec_hidden = j.at("sec_hidden").get<std::vector<int>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.tau = j.at("tau").get<double>();
  const auto& aux = j.at("aux");
  c.aux.early_stopping_rounds = aux.at("early_stopping_rounds").get<int>();
  c.aux.learning_rate = aux.at("learning_rate").get<double>();
  c.aux.min_data_in_leaf = aux.at("min_data_in_leaf").get<int>();
  c.aux.num_leaves = aux.at("num_leaves").get<int>();
  c.aux.rounds = aux.at("rounds").get<int>();
  c.aux.validation_fraction = aux.at("validation_fraction").get<double>();
  const auto& vgm = j.at("vgm");
  c.vgm.max_components = vgm.at("max_components").get<int>();
  c.vgm.max_iterations = vgm.at("max_iterations").get<int>();
  c.vgm.tolerance = vgm.at("tolerance").get<double>();
  c.vgm.weight_threshold = vgm.at("weight_threshold").get<double>();
  return c;
}

const char* rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::pair_implication: return "pair_implication";
    case RuleKind::pair_membership: return "pair_membership";
    case RuleKind::numeric_order: return "numeric_order";
  }
  throw Error("container: unhandled rule kind");
}

RuleKind rule_kind_from(const std::string& s) {
  if (s == "pair_implication") return RuleKind::pair_implication;
  if (s == "pair_membership") return RuleKind::pair_membership;
  if (s == "numeric_order") return RuleKind::numeric_order;
  throw Error("container: unknown rule kind '" + s + "'");
}

json schema_to_json(const DatasetSchema& s) {
  json columns = json::array();
  for (const auto& c : s.columns)
    columns.push_back(json{{"kind", to_string(c.kind)},
                           {"name", c.name},
                           {"role", c.role == ColumnRole::target ? "target" : "feature"}});
  json rules = json::array();
  for (const auto& r : s.rules)
    rules.push_back(json{{"column_a", r.column_a},
                         {"column_b", r.column_b},
                         {"kind", rule_kind_name(r.kind)},
                         {"label_a", r.label_a},
                         {"label_b", r.label_b}});
  return json{{"columns", std::move(columns)},
              {"rules", std::move(rules)},
              {"task", to_string(s.task)}};
}

DatasetSchema schema_from_json(const json& j) {
  DatasetSchema s;
  for (const auto& c : j.at("columns")) {
    ColumnSpec spec;
    spec.name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    if (kind == "numeric")
      spec.kind = ColumnKind::numeric;
    else if (kind == "categorical")
      spec.kind = ColumnKind::categorical;
    else
      throw Error("container: unknown column kind '" + kind + "'");
    const auto role = c.at("role").get<std::string>();
    if (role == "feature")
      spec.role = ColumnRole::feature;
    else if (role == "target")
      spec.role = ColumnRole::target;
    else
      throw Error("container: unknown column role '" + role + "'");
    s.columns.push_back(std::move(spec));
  }
  s.task = task_from_string(j.at("task").get<std::string>());
  for (const auto& r : j.at("rules")) {
    ValidityRule rule;
    rule.kind = rule_kind_from(r.at("kind").get<std::string>());
    rule.column_a = r.at("column_a").get<std::string>();
    rule.column_b = r.at("column_b").get<std::string>();
    rule.label_a = r.at("label_a").get<std::string>();
    rule.label_b = r.at("label_b").get<std::string>();
    s.rules.push_back(std::move(rule));
  }
  s.validate();
  return s;
}

json codec_to_json(const TableCodec& codec) {
  const auto& schema = codec.schema();
  json vgms = json::array();
  json onehots = json::array();
  json stats = json::array();
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const int col = static_cast<int>(c);
    if (schema.columns[c].kind == ColumnKind::numeric) {
      const auto& v = codec.vgm(col);
      vgms.push_back(json{{"means", v.means}, {"stddevs", v.stddevs}, {"weights", v.weights}});
    } else {
      onehots.push_back(json{{"labels", codec.onehot(col).labels}});
    }
    const auto& st = codec.stats(col);
    stats.push_back(json{
        {"max", st.max}, {"mean", st.mean}, {"min", st.min}, {"stddev", st.stddev}});
  }
  return json{{"onehots", std::move(onehots)},
              {"stats", std::move(stats)},
              {"vgms", std::move(vgms)}};
}

void codec_from_json(const json& j, std::shared_ptr<const DatasetSchema> schema,
                     TableCodec& codec) {
  std::vector<VgmEncoder> vgms;
  for (const auto& v : j.at("vgms")) {
    VgmEncoder enc;
    enc.weights = v.at("weights").get<std::vector<double>>();
    enc.means = v.at("means").get<std::vector<double>>();
    enc.stddevs = v.at("stddevs").get<std::vector<double>>();
    if (enc.means.size() != enc.weights.size() || enc.stddevs.size() != enc.weights.size())
      throw Error("container: mixture component arrays disagree");
    vgms.push_back(std::move(enc));
  }
  std::vector<OneHotEncoder> onehots;
  for (const auto& o : j.at("onehots"))
    onehots.push_back({o.at("labels").get<std::vector<std::string>>()});
  std::vector<NumericStats> stats;
  for (const auto& st : j.at("stats"))
    stats.push_back({st.at("mean").get<double>(), st.at("stddev").get<double>(),
                     st.at("min").get<double>(), st.at("max").get<double>()});
  codec.restore(std::move(schema), std::move(vgms), std::move(onehots), std::move(stats));
}

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back(json{{"feature", n.feature},
                         {"left", n.left},
                         {"left_categories", n.left_categories},
                         {"right", n.right},
                         {"threshold", n.threshold},
                         {"value", n.value}});
  return json{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left_categories = n.at("left_categories").get<std::vector<std::int32_t>>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.value = n.at("value").get<double>();
    t.nodes.push_back(std::move(node));
  }
  return t;
}

json learner_to_json(const AuxLearner& a) {
  json rounds = json::array();
  for (const auto& round : a.rounds()) {
    json per_class = json::array();
    for (const auto& tree : round) per_class.push_back(tree_to_json(tree));
    rounds.push_back(std::move(per_class));
  }
  return json{{"base", a.base_scores()},
              {"best_round", a.best_round()},
              {"learning_rate", a.learning_rate()},
              {"objective",
               a.objective() == AuxObjective::classification ? "classification" : "regression"},
              {"rounds", std::move(rounds)},
              {"target_col", a.target_col()}};
}

AuxLearner learner_from_json(const json& j) {
  const auto obj_text = j.at("objective").get<std::string>();
  AuxObjective objective;
  if (obj_text == "regression")
    objective = AuxObjective::regression;
  else if (obj_text == "classification")
    objective = AuxObjective::classification;
  else
    throw Error("container: unknown objective '" + obj_text + "'");
  std::vector<std::vector<Tree>> trees;
  for (const auto& round : j.at("rounds")) {
    std::vector<Tree> per_class;
    for (const auto& tree : round) per_class.push_back(tree_from_json(tree));
    trees.push_back(std::move(per_class));
  }
  return AuxLearner::restore(j.at("target_col").get<int>(), objective,
                             j.at("learning_rate").get<double>(),
                             j.at("base").get<std::vector<double>>(), std::move(trees),
                             j.at("best_round").get<int>());
}

json stage_to_json(const StageParams& st) {
  json sec_heads = json::array();
  for (const auto& h : st.sec_heads) sec_heads.push_back(head_to_json(h));
  return json{{"head", head_to_json(st.head)},
              {"primary", stack_to_json(st.primary)},
              {"sec_heads", std::move(sec_heads)},
              {"secondary", stack_to_json(st.secondary)}};
}

StageParams stage_from_json(const json& j) {
  StageParams st;
  st.primary = stack_from_json(j.at("primary"));
  st.head = head_from_json(j.at("head"));
  st.secondary = stack_from_json(j.at("secondary"));
  for (const auto& h : j.at("sec_heads")) st.sec_heads.push_back(head_from_json(h));
  return st;
}

}  // namespace

std::string serialize_config(const GanConfig& config) {
  return config_to_json(config).dump();
}

std::string serialize_model(const GanModel& model) {
  if (!model.schema) throw Error("container: model has no schema");
  json doc{{"aux", json::array()},
           {"codec", codec_to_json(model.codec)},
           {"config", config_to_json(model.config)},
           {"disc",
            json{{"out", dense_to_json(model.disc.out)}, {"stack", stack_to_json(model.disc.stack)}}},
           {"format_version", kContainerFormatVersion},
           {"schema", schema_to_json(*model.schema)},
           {"stages", json::array()},
           {"train_rows", model.train_rows}};
  for (const auto& a : model.aux) doc["aux"].push_back(learner_to_json(a));
  for (const auto& st : model.stages) doc["stages"].push_back(stage_to_json(st));
  return doc.dump(1) + "\n";
}

GanModel deserialize_model(const std::string& text, const std::string& origin) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kContainerFormatVersion)
      throw Error("unsupported container format_version " + std::to_string(version));
    GanModel model;
    auto schema = std::make_shared<DatasetSchema>(schema_from_json(doc.at("schema")));
    model.schema = schema;
    codec_from_json(doc.at("codec"), schema, model.codec);
    model.config = config_from_json(doc.at("config"));
    for (const auto& a : doc.at("aux")) model.aux.push_back(learner_from_json(a));
    for (const auto& st : doc.at("stages")) model.stages.push_back(stage_from_json(st));
    model.disc.stack = stack_from_json(doc.at("disc").at("stack"));
    model.disc.out = dense_from_json(doc.at("disc").at("out"));
    model.train_rows = doc.at("train_rows").get<std::size_t>();
    if (model.aux.size() != schema->columns.size())
      throw Error("auxiliary learner count does not match the schema");
    if (model.stages.size() != schema->columns.size())
      throw Error("stage count does not match the schema");
    return model;
  } catch (const json::exception& e) {
    throw Error(origin + ": " + e.what());
  } catch (const Error& e) {
    throw Error(origin + ": " + e.what());
  }
}

void save_model(const GanModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << serialize_model(model);
  if (!out) throw Error("failed writing " + path.string());
}

GanModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path.string());
}

}  // namespace gantab
