#include "gantab/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gantab/attack.hpp"
#include "gantab/container.hpp"
#include "gantab/gan.hpp"
#include "gantab/ingest.hpp"
#include "gantab/metrics.hpp"

namespace gantab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kTagAux = 0x415558ULL;  // matches the training stream

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void require_exists(const fs::path& path, const char* what) {
  if (!fs::exists(path))
    throw ConfigError(std::string(what) + " file " + path.string() + " does not exist");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void check_known_keys(const json& obj, const std::set<std::string>& known,
                      const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  std::string config_path;
  std::string out_dir;
};

GanConfig config_overrides(GanConfig base, const json& j, const std::string& where) {
  check_known_keys(j, {"adam_alpha", "adam_beta1", "adam_beta2", "aux", "batch_size",
                       "check_finite", "d_steps", "disc_hidden", "epochs", "epsilon",
                       "gen_hidden", "lambda_al_first", "lambda_al_last", "lambda_gp",
                       "leaky_slope", "noise_dim", "precision", "real_noise_std",
                       "sec_hidden", "seed", "tau", "vgm"},
                   where);
  if (j.contains("adam_alpha")) base.adam_alpha = j.at("adam_alpha").get<double>();
  if (j.contains("adam_beta1")) base.adam_beta1 = j.at("adam_beta1").get<double>();
  if (j.contains("adam_beta2")) base.adam_beta2 = j.at("adam_beta2").get<double>();
  if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
  if (j.contains("check_finite")) base.check_finite = j.at("check_finite").get<bool>();
  if (j.contains("d_steps")) base.d_steps = j.at("d_steps").get<int>();
  if (j.contains("disc_hidden")) base.disc_hidden = j.at("disc_hidden").get<std::vector<int>>();
  if (j.contains("epochs")) base.epochs = j.at("epochs").get<int>();
  if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
  if (j.contains("gen_hidden")) base.gen_hidden = j.at("gen_hidden").get<std::vector<int>>();
  if (j.contains("lambda_al_first")) base.lambda_al_first = j.at("lambda_al_first").get<double>();
  if (j.contains("lambda_al_last")) base.lambda_al_last = j.at("lambda_al_last").get<double>();
  if (j.contains("lambda_gp")) base.lambda_gp = j.at("lambda_gp").get<double>();
  if (j.contains("leaky_slope")) base.leaky_slope = j.at("leaky_slope").get<double>();
  if (j.contains("noise_dim")) base.noise_dim = j.at("noise_dim").get<int>();
  if (j.contains("precision")) {
    const auto p = j.at("precision").get<std::string>();
    if (p == "f32")
      base.precision = Precision::f32;
    else if (p == "f64")
      base.precision = Precision::f64;
    else
      throw ConfigError(where + ": precision must be 'f32' or 'f64', got '" + p + "'");
  }
  if (j.contains("real_noise_std")) base.real_noise_std = j.at("real_noise_std").get<double>();
  if (j.contains("sec_hidden")) base.sec_hidden = j.at("sec_hidden").get<std::vector<int>>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tau")) base.tau = j.at("tau").get<double>();
  if (j.contains("aux")) {
    const auto& a = j.at("aux");
    check_known_keys(a, {"early_stopping_rounds", "learning_rate", "min_data_in_leaf",
                         "num_leaves", "rounds", "validation_fraction"},
                     where + ".aux");
    if (a.contains("early_stopping_rounds"))
      base.aux.early_stopping_rounds = a.at("early_stopping_rounds").get<int>();
    if (a.contains("learning_rate")) base.aux.learning_rate = a.at("learning_rate").get<double>();
    if (a.contains("min_data_in_leaf"))
      base.aux.min_data_in_leaf = a.at("min_data_in_leaf").get<int>();
    if (a.contains("num_leaves")) base.aux.num_leaves = a.at("num_leaves").get<int>();
    if (a.contains("rounds")) base.aux.rounds = a.at("rounds").get<int>();
    if (a.contains("validation_fraction"))
      base.aux.validation_fraction = a.at("validation_fraction").get<double>();
  }
  if (j.contains("vgm")) {
    const auto& v = j.at("vgm");
    check_known_keys(v, {"max_components", "max_iterations", "tolerance", "weight_threshold"},
                     where + ".vgm");
    if (v.contains("max_components")) base.vgm.max_components = v.at("max_components").get<int>();
    if (v.contains("max_iterations")) base.vgm.max_iterations = v.at("max_iterations").get<int>();
    if (v.contains("tolerance")) base.vgm.tolerance = v.at("tolerance").get<double>();
    if (v.contains("weight_threshold"))
      base.vgm.weight_threshold = v.at("weight_threshold").get<double>();
  }
  return base;
}

int cmd_fit(const FitArgs& args) {
  const fs::path config_path(args.config_path);
  require_exists(config_path, "config");
  json doc;
  try {
    doc = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(config_path.string() + ": expected a JSON object");
  check_known_keys(doc, {"config", "data", "data_hash", "format_version", "holdout_fraction",
                         "schema", "seed"},
                   config_path.string());
  if (doc.contains("format_version") && doc.at("format_version").get<int>() != 1)
    throw ConfigError(config_path.string() + ": unsupported manifest format_version");
  if (!doc.contains("data")) throw ConfigError(config_path.string() + ": missing 'data'");
  if (!doc.contains("schema")) throw ConfigError(config_path.string() + ": missing 'schema'");

  // Relative paths resolve against the config file; the manifest records them
  // absolute so a rerun finds the same files from any directory.
  const fs::path base = config_path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  const fs::path data_path = resolve(doc.at("data").get<std::string>());
  const fs::path schema_path = resolve(doc.at("schema").get<std::string>());
  require_exists(schema_path, "schema");
  require_exists(data_path, "data");

  const double holdout_fraction =
      doc.contains("holdout_fraction") ? doc.at("holdout_fraction").get<double>() : 0.2;
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must be in (0, 1)");
  const std::uint64_t seed = doc.contains("seed") ? doc.at("seed").get<std::uint64_t>() : 0;

  GanConfig config;
  config.seed = seed;
  if (doc.contains("config"))
    config = config_overrides(config, doc.at("config"), config_path.string() + ": config");

  const std::string data_bytes = read_file(data_path);
  const std::string data_hash = fnv1a64_hex(data_bytes);
  if (doc.contains("data_hash") && doc.at("data_hash").get<std::string>() != data_hash)
    throw ConfigError(data_path.string() + ": content hash does not match the manifest");

  auto schema = std::make_shared<DatasetSchema>(read_schema(schema_path));
  const DataTable table = table_from_csv(parse_csv(data_bytes, data_path.string()), schema,
                                         data_path.string());
  const SplitResult split = split_holdout(table, 1.0 - holdout_fraction, seed);

  const TrainResult result = train_gan(split.train, config);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  save_model(result.model, out / "model.json");
  write_text(out / "loss_history.csv", result.history.to_csv());
  save_table(split.train, out / "train.csv");
  save_table(split.holdout, out / "holdout.csv");

  json manifest{{"config", json::parse(serialize_config(config))},
                {"data", fs::absolute(data_path).lexically_normal().string()},
                {"data_hash", data_hash},
                {"format_version", 1},
                {"holdout_fraction", holdout_fraction},
                {"schema", fs::absolute(schema_path).lexically_normal().string()},
                {"seed", seed}};
  write_text(out / "manifest.json", manifest.dump(1) + "\n");

  std::cout << "train rows = " << split.train.rows() << "\n"
            << "holdout rows = " << split.holdout.rows() << "\n"
            << "model = " << (out / "model.json").string() << "\n";
  return 0;
}

// ---- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string model_path;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string out_csv;
};

int cmd_sample(const SampleArgs& args) {
  require_exists(args.model_path, "model");
  const GanModel model = load_model(args.model_path);
  const DataTable table = model.sample(static_cast<std::size_t>(args.n), args.seed);
  const fs::path out(args.out_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_table(table, out);
  std::cout << "rows = " << table.rows() << "\n"
            << "csv = " << out.string() << "\n";
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string synth_csv;
  std::string model_path;
  std::int64_t n = -1;
  std::string real_csv;
  std::string schema_path;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void require_schema_match(const DatasetSchema& a, const DatasetSchema& b,
                          const std::string& what) {
  bool same = a.columns.size() == b.columns.size() && a.task == b.task;
  for (std::size_t i = 0; same && i < a.columns.size(); ++i)
    same = a.columns[i].name == b.columns[i].name && a.columns[i].kind == b.columns[i].kind;
  if (!same) throw ConfigError(what + " schema does not match --schema");
}

std::string correlation_csv(const DataTable& table) {
  const Tensor<double> m = correlation_matrix(table);
  std::ostringstream out;
  out << "column";
  for (const auto& c : table.schema().columns) out << "," << csv_quote(c.name);
  out << "\n";
  for (std::size_t r = 0; r < table.cols(); ++r) {
    out << csv_quote(table.schema().columns[r].name);
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const double v = m(static_cast<int>(r), static_cast<int>(c));
      out << ",";
      if (std::isfinite(v)) out << format_double(v);  // mixed-kind pairs stay empty
    }
    out << "\n";
  }
  return out.str();
}

std::string distributions_csv(const DataTable& synth, const DataTable& real) {
  std::ostringstream out;
  out << "column,value,real,synth\n";
  const auto& schema = real.schema();
  const double real_n = static_cast<double>(real.rows());
  const double synth_n = static_cast<double>(synth.rows());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const int col = static_cast<int>(c);
    const std::string name = csv_quote(schema.columns[c].name);
    if (schema.columns[c].kind == ColumnKind::numeric) {
      double lo = real.numeric(col)[0], hi = lo;
      for (const DataTable* t : {&real, &synth})
        for (double v : t->numeric(col)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      const int bins = 20;
      const double width = hi > lo ? (hi - lo) / bins : 1.0;
      std::vector<double> rf(bins, 0.0), sf(bins, 0.0);
      auto bin_of = [&](double v) {
        return std::min(bins - 1, static_cast<int>((v - lo) / width));
      };
      for (double v : real.numeric(col)) rf[bin_of(v)] += 1.0 / real_n;
      for (double v : synth.numeric(col)) sf[bin_of(v)] += 1.0 / synth_n;
      for (int b = 0; b < bins; ++b)
        out << name << "," << format_double(lo + (b + 0.5) * width) << ","
            << format_double(rf[b]) << "," << format_double(sf[b]) << "\n";
    } else {
      std::vector<std::string> labels = real.dictionary(col);
      for (const auto& l : synth.dictionary(col))
        if (real.code_of(col, l) < 0) labels.push_back(l);
      for (const auto& label : labels) {
        double rf = 0.0, sf = 0.0;
        for (std::size_t r = 0; r < real.rows(); ++r)
          if (real.label(col, r) == label) rf += 1.0 / real_n;
        for (std::size_t r = 0; r < synth.rows(); ++r)
          if (synth.label(col, r) == label) sf += 1.0 / synth_n;
        out << name << "," << csv_quote(label) << "," << format_double(rf) << ","
            << format_double(sf) << "\n";
      }
    }
  }
  return out.str();
}

int cmd_eval(const EvalArgs& args) {
  require_exists(args.schema_path, "schema");
  require_exists(args.real_csv, "real data");
  auto schema = std::make_shared<DatasetSchema>(read_schema(args.schema_path));
  const DataTable real = load_table(args.real_csv, schema);

  DataTable synth;
  if (!args.synth_csv.empty()) {
    require_exists(args.synth_csv, "synthetic data");
    synth = load_table(args.synth_csv, schema);
  } else {
    require_exists(args.model_path, "model");
    const GanModel model = load_model(args.model_path);
    require_schema_match(*model.schema, *schema, "model");
    const std::size_t n =
        args.n >= 0 ? static_cast<std::size_t>(args.n) : model.train_rows;
    synth = model.sample(n, args.seed);
  }

  EvalReport report = evaluate(synth, real, args.seed);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  write_text(out / "report.txt", report.to_text());

  std::ostringstream uni;
  uni << "column,ks\n";
  for (std::size_t c = 0; c < real.cols(); ++c)
    uni << csv_quote(real.schema().columns[c].name) << "," << format_double(report.ks[c])
        << "\n";
  write_text(out / "univariate.csv", uni.str());
  write_text(out / "distributions.csv", distributions_csv(synth, real));
  write_text(out / "corr_real.csv", correlation_csv(real));
  write_text(out / "corr_synth.csv", correlation_csv(synth));

  std::cout << report.to_text();
  return 0;
}

// ---- attack -----------------------------------------------------------------

struct AttackArgs {
  std::string model_path;
  std::string train_csv;
  std::string synth_csv;
  std::int64_t n = -1;
  int iterations = 5;
  double fraction = 0.10;
  bool access = false;
  std::string eps_manifest;
  std::uint64_t seed = 0;
  std::string out_dir;
};

std::string distances_csv(const std::vector<RowDistance>& per_row) {
  std::ostringstream out;
  out << "row,euc_to_train,euc_to_preattack\n";
  for (const auto& d : per_row)
    out << d.row << "," << format_double(d.to_train) << "," << format_double(d.to_preattack)
        << "\n";
  return out.str();
}

AttackReport run_attack(const DataTable& synth, const std::vector<AuxLearner>& learners,
                        const GanModel& model, const DataTable& train,
                        const AttackArgs& args, double epsilon, const fs::path& out,
                        const std::string& suffix) {
  AttackConfig cfg;
  cfg.iterations = args.iterations;
  cfg.attacked_fraction = args.fraction;
  cfg.access_preprocessors = args.access;
  cfg.seed = args.seed;
  const AttackOutcome outcome =
      whitebox_attack(synth, learners, args.access ? &model.codec : nullptr, cfg);
  std::vector<RowDistance> per_row;
  AttackReport report =
      attack_distances(outcome.attacked, synth, train, outcome.rows, &per_row);
  report.epsilon = epsilon;
  report.access_preprocessors = args.access;
  write_text(out / ("report" + suffix + ".txt"), report.to_text());
  write_text(out / ("distances" + suffix + ".csv"), distances_csv(per_row));
  return report;
}

int cmd_attack(const AttackArgs& args) {
  require_exists(args.model_path, "model");
  require_exists(args.train_csv, "train data");
  const GanModel model = load_model(args.model_path);
  const DataTable train = load_table(args.train_csv, model.schema);

  DataTable synth;
  if (!args.synth_csv.empty()) {
    require_exists(args.synth_csv, "synthetic data");
    synth = load_table(args.synth_csv, model.schema);
  } else {
    const std::size_t n =
        args.n >= 0 ? static_cast<std::size_t>(args.n) : model.train_rows;
    synth = model.sample(n, args.seed);
  }

  const fs::path out(args.out_dir);
  fs::create_directories(out);

  if (args.eps_manifest.empty()) {
    const AttackReport report =
        run_attack(synth, model.aux, model, train, args, model.config.epsilon, out, "");
    std::cout << report.to_text();
    return 0;
  }

  // Hardening sweep: retrain the auxiliary learners on the training table at
  // each requested epsilon (same seeds the fit used) and rerun the protocol.
  require_exists(args.eps_manifest, "epsilon manifest");
  json doc;
  try {
    doc = json::parse(read_file(args.eps_manifest));
  } catch (const json::exception& e) {
    throw ConfigError(args.eps_manifest + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw ConfigError(args.eps_manifest + ": expected a non-empty JSON array of numbers");
  std::vector<double> epsilons;
  for (const auto& v : doc) {
    if (!v.is_number()) throw ConfigError(args.eps_manifest + ": epsilons must be numbers");
    const double eps = v.get<double>();
    if (eps < 0.0 || eps > 1.0)
      throw ConfigError(args.eps_manifest + ": epsilon must lie in [0, 1]");
    epsilons.push_back(eps);
  }

  const Tensor<double> raw = model.codec.encode_raw(train);
  std::vector<FeatureMeta> meta(train.cols());
  for (std::size_t c = 0; c < train.cols(); ++c)
    if (!train.is_numeric(static_cast<int>(c)))
      meta[c] = {true, model.codec.onehot(static_cast<int>(c)).size()};

  std::ostringstream summary;
  summary << "epsilon,attacked_rows,euc_to_train,euc_to_preattack\n";
  for (double eps : epsilons) {
    std::vector<AuxLearner> learners;
    for (std::size_t c = 0; c < train.cols(); ++c) {
      const auto objective = train.is_numeric(static_cast<int>(c))
                                 ? AuxObjective::regression
                                 : AuxObjective::classification;
      learners.push_back(AuxLearner::train(raw, meta, static_cast<int>(c), objective,
                                           model.config.aux, eps,
                                           mix_seed(model.config.seed, kTagAux + c)));
    }
    const std::string suffix = "_eps" + format_double(eps);
    const AttackReport report =
        run_attack(synth, learners, model, train, args, eps, out, suffix);
    summary << format_double(eps) << "," << report.attacked_rows << ","
            << format_double(report.euc_to_train) << ","
            << format_double(report.euc_to_preattack) << "\n";
    std::cout << "epsilon " << format_double(eps)
              << ": euc_to_train = " << format_double(report.euc_to_train) << "\n";
  }
  write_text(out / "summary.csv", summary.str());
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Synthetic tabular data toolkit: cascaded per-feature GAN with "
               "auxiliary-learner guidance"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* cmd_f = app.add_subcommand("fit", "Train a model from a run config");
  cmd_f->add_option("--config", fit.config_path, "Run config or manifest JSON")->required();
  cmd_f->add_option("--out", fit.out_dir, "Output directory")->required();

  SampleArgs sample;
  auto* cmd_s = app.add_subcommand("sample", "Draw synthetic rows from a trained model");
  cmd_s->add_option("--model", sample.model_path, "Model container")->required();
  cmd_s->add_option("-n", sample.n, "Row count")->required()->check(CLI::NonNegativeNumber);
  cmd_s->add_option("--seed", sample.seed, "Sampling seed");
  cmd_s->add_option("--out", sample.out_csv, "Output CSV path")->required();

  EvalArgs eval_args;
  auto* cmd_e = app.add_subcommand("eval", "Compare synthetic data against real data");
  auto* synth_opt = cmd_e->add_option("--synth", eval_args.synth_csv, "Synthetic CSV");
  cmd_e->add_option("--model", eval_args.model_path, "Model container (samples internally)")
      ->excludes(synth_opt);
  cmd_e->add_option("-n", eval_args.n, "Rows to sample with --model (default: training size)")
      ->check(CLI::NonNegativeNumber);
  cmd_e->add_option("--real", eval_args.real_csv, "Real CSV (similarity reference and "
                    "downstream-task test set)")
      ->required();
  cmd_e->add_option("--schema", eval_args.schema_path, "Schema file")->required();
  cmd_e->add_option("--seed", eval_args.seed, "Sampling / internal model seed");
  cmd_e->add_option("--out", eval_args.out_dir, "Output directory")->required();

  AttackArgs attack;
  auto* cmd_a = app.add_subcommand("attack", "Simulate a white-box privacy attack");
  cmd_a->add_option("--model", attack.model_path, "Model container")->required();
  cmd_a->add_option("--train", attack.train_csv, "Training split CSV (distance reference)")
      ->required();
  cmd_a->add_option("--synth", attack.synth_csv, "Attacked CSV (default: sample internally)");
  cmd_a->add_option("-n", attack.n, "Rows to sample when no --synth")
      ->check(CLI::NonNegativeNumber);
  cmd_a->add_option("--iterations", attack.iterations, "Re-imputation sweeps")
      ->capture_default_str();
  cmd_a->add_option("--fraction", attack.fraction, "Fraction of rows attacked")
      ->capture_default_str();
  cmd_a->add_flag("--access-preprocessors", attack.access,
                  "Attacker sees the fitted encoders");
  cmd_a->add_option("--eps-manifest", attack.eps_manifest,
                    "JSON array of epsilons: retrain auxiliary learners per value");
  cmd_a->add_option("--seed", attack.seed, "Attack / sampling seed");
  cmd_a->add_option("--out", attack.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_f->parsed()) return cmd_fit(fit);
    if (cmd_s->parsed()) return cmd_sample(sample);
    if (cmd_e->parsed()) {
      if (eval_args.synth_csv.empty() && eval_args.model_path.empty())
        throw ConfigError("eval needs --synth or --model");
      return cmd_eval(eval_args);
    }
    if (cmd_a->parsed()) return cmd_attack(attack);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gantab
