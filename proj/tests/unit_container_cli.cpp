#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gantab/container.hpp"
#include "gantab/ingest.hpp"
#include "gantab/rng.hpp"

using namespace gantab;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<DatasetSchema> tiny_schema() {
  auto s = std::make_shared<DatasetSchema>();
  s->columns = {{"amount", ColumnKind::numeric, ColumnRole::feature},
                {"city", ColumnKind::categorical, ColumnRole::feature}};
  s->validate();
  return s;
}

DataTable tiny_table(std::size_t n, std::uint64_t seed) {
  DataTable t(tiny_schema());
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double amount = i % 2 ? rng.normal(4.0, 0.5) : rng.normal(-3.0, 0.8);
    t.append_row({amount}, {"c" + std::to_string(i % 3)});
  }
  return t;
}

GanConfig tiny_config() {
  GanConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.noise_dim = 8;
  cfg.gen_hidden = {12, 8};
  cfg.sec_hidden = {8};
  cfg.disc_hidden = {12, 8};
  cfg.vgm.max_components = 2;
  cfg.aux.rounds = 6;
  cfg.aux.early_stopping_rounds = 3;
  cfg.seed = 11;
  cfg.check_finite = true;
  return cfg;
}

std::vector<std::string> table_cells(const DataTable& t) {
  std::vector<std::string> cells;
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c)
      cells.push_back(t.cell_text(static_cast<int>(c), r));
  return cells;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const fs::path& dir, const std::string& args) {
  const char* bin = std::getenv("GANTAB_BIN");
  REQUIRE(bin != nullptr);
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  const std::string cmd = std::string(bin) + " " + args + " > " + out_path.string() +
                          " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("container round trip is byte-stable and behavior-preserving") {
  const auto train = tiny_table(120, 3);
  const auto result = train_gan(train, tiny_config());

  const std::string first = serialize_model(result.model);
  const GanModel restored = deserialize_model(first, "<memory>");
  CHECK(serialize_model(restored) == first);

  CHECK(restored.train_rows == result.model.train_rows);
  CHECK(restored.config.epochs == 2);
  CHECK(restored.config.seed == 11);
  CHECK(restored.schema->columns.size() == 2);
  CHECK(restored.codec.onehot(1).labels == result.model.codec.onehot(1).labels);
  for (std::size_t c = 0; c < restored.aux.size(); ++c)
    CHECK(restored.aux[c].dump() == result.model.aux[c].dump());

  CHECK(table_cells(restored.sample(40, 5)) == table_cells(result.model.sample(40, 5)));
}

TEST_CASE("container save/load and failure modes") {
  const auto train = tiny_table(80, 4);
  auto cfg = tiny_config();
  cfg.epochs = 1;
  const auto result = train_gan(train, cfg);

  const fs::path dir = fs::temp_directory_path() / "gantab_container_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_model(result.model, dir / "m.json");
  const GanModel loaded = load_model(dir / "m.json");
  CHECK(serialize_model(loaded) == serialize_model(result.model));

  std::string text = serialize_model(result.model);
  const std::string tag = "\"format_version\": 1";
  REQUIRE(contains(text, tag));
  text.replace(text.find(tag), tag.size(), "\"format_version\": 99");
  CHECK_THROWS_AS(deserialize_model(text, "<memory>"), Error);

  CHECK_THROWS_AS(deserialize_model("not json", "<memory>"), Error);
  CHECK_THROWS_AS(deserialize_model("{}", "<memory>"), Error);
  CHECK_THROWS_AS(load_model(dir / "absent.json"), Error);

  const std::string cfg_json = serialize_config(result.model.config);
  CHECK(contains(cfg_json, "\"epochs\":1"));
  CHECK(contains(cfg_json, "\"precision\":\"f32\""));
}

TEST_CASE("cli end to end: fit, sample, eval, attack") {
  const fs::path dir = fs::temp_directory_path() / "gantab_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  spit(dir / "schema.txt",
       "task: none\n"
       "column: amount numeric\n"
       "column: city categorical\n"
       "column: tier categorical\n"
       "rule: pair_in_train city tier\n");

  {
    std::ostringstream csv;
    csv << "amount,city,tier\n";
    Rng rng(19);
    for (int i = 0; i < 260; ++i) {
      const int cidx = i % 4;
      const std::string tier = cidx < 2 ? "low" : "high";
      const double amount = cidx < 2 ? rng.normal(5.0, 1.0) : rng.normal(-4.0, 1.5);
      csv << format_double(amount) << ",c" << cidx << "," << tier << "\n";
    }
    spit(dir / "data.csv", csv.str());
  }

  spit(dir / "cfg.json",
       "{\"data\": \"data.csv\", \"schema\": \"schema.txt\","
       " \"holdout_fraction\": 0.25, \"seed\": 11,"
       " \"config\": {\"epochs\": 2, \"batch_size\": 32, \"noise_dim\": 8,"
       " \"gen_hidden\": [12, 8], \"sec_hidden\": [8], \"disc_hidden\": [12, 8],"
       " \"epsilon\": 0.25, \"vgm\": {\"max_components\": 2},"
       " \"aux\": {\"rounds\": 6, \"early_stopping_rounds\": 3}}}");

  // fit
  auto fit1 = run_cli(dir, "fit --config " + (dir / "cfg.json").string() + " --out " +
                               (dir / "out1").string());
  REQUIRE(fit1.code == 0);
  CHECK(contains(fit1.out, "train rows = 195"));
  CHECK(contains(fit1.out, "holdout rows = 65"));
  for (const char* f : {"model.json", "loss_history.csv", "manifest.json", "train.csv",
                        "holdout.csv"})
    CHECK(fs::exists(dir / "out1" / f));
  CHECK(contains(slurp(dir / "out1" / "loss_history.csv"),
                 "epoch,d_loss,g_adv_loss,aux_loss_1,aux_loss_2,aux_loss_3"));

  // refit from the emitted manifest reproduces the container byte for byte
  auto fit2 = run_cli(dir, "fit --config " + (dir / "out1" / "manifest.json").string() +
                               " --out " + (dir / "out2").string());
  REQUIRE(fit2.code == 0);
  CHECK(slurp(dir / "out1" / "model.json") == slurp(dir / "out2" / "model.json"));

  // sample
  const std::string model = (dir / "out1" / "model.json").string();
  auto s1 = run_cli(dir, "sample --model " + model + " -n 10 --seed 3 --out " +
                             (dir / "s1.csv").string());
  REQUIRE(s1.code == 0);
  CHECK(line_count(slurp(dir / "s1.csv")) == 11);
  auto s2 = run_cli(dir, "sample --model " + model + " -n 10 --seed 3 --out " +
                             (dir / "s2.csv").string());
  REQUIRE(s2.code == 0);
  CHECK(slurp(dir / "s1.csv") == slurp(dir / "s2.csv"));
  auto s3 = run_cli(dir, "sample --model " + model + " -n 10 --seed 4 --out " +
                             (dir / "s3.csv").string());
  REQUIRE(s3.code == 0);
  CHECK(slurp(dir / "s1.csv") != slurp(dir / "s3.csv"));

  auto schema = std::make_shared<DatasetSchema>(read_schema(dir / "schema.txt"));
  CHECK(load_table(dir / "s1.csv", schema).rows() == 10);

  // eval identity: holdout against itself
  auto ev = run_cli(dir, "eval --synth " + (dir / "out1" / "holdout.csv").string() +
                             " --real " + (dir / "out1" / "holdout.csv").string() +
                             " --schema " + (dir / "schema.txt").string() + " --out " +
                             (dir / "ev1").string());
  REQUIRE(ev.code == 0);
  const std::string report = slurp(dir / "ev1" / "report.txt");
  CHECK(contains(report, "dimwise_mean_rmse = 0\n"));
  CHECK(contains(report, "corr_rmse = 0\n"));
  CHECK(contains(report, "upcc_ratio = 1\n"));
  CHECK(contains(report, "invalid_ratio = 0\n"));
  CHECK(contains(ev.out, "dimwise_mean_rmse = 0\n"));
  CHECK(line_count(slurp(dir / "ev1" / "univariate.csv")) == 4);
  CHECK(slurp(dir / "ev1" / "corr_real.csv") == slurp(dir / "ev1" / "corr_synth.csv"));
  CHECK(line_count(slurp(dir / "ev1" / "distributions.csv")) > 10);

  // eval with internal sampling
  auto ev2 = run_cli(dir, "eval --model " + model + " -n 40 --real " +
                              (dir / "out1" / "holdout.csv").string() + " --schema " +
                              (dir / "schema.txt").string() + " --out " +
                              (dir / "ev2").string());
  REQUIRE(ev2.code == 0);
  CHECK(fs::exists(dir / "ev2" / "report.txt"));

  // attack: epsilon echoed from the model container
  auto atk = run_cli(dir, "attack --model " + model + " --train " +
                              (dir / "out1" / "train.csv").string() +
                              " -n 60 --fraction 0.2 --seed 5 --out " +
                              (dir / "atk").string());
  REQUIRE(atk.code == 0);
  const std::string atk_report = slurp(dir / "atk" / "report.txt");
  CHECK(contains(atk_report, "epsilon = 0.25\n"));
  CHECK(contains(atk_report, "attacked_rows = 12\n"));
  CHECK(line_count(slurp(dir / "atk" / "distances.csv")) == 13);

  // attack hardening sweep
  spit(dir / "eps.json", "[0.0, 0.3]");
  auto sweep = run_cli(dir, "attack --model " + model + " --train " +
                                (dir / "out1" / "train.csv").string() +
                                " -n 60 --fraction 0.2 --seed 5 --eps-manifest " +
                                (dir / "eps.json").string() + " --out " +
                                (dir / "sweep").string());
  REQUIRE(sweep.code == 0);
  CHECK(line_count(slurp(dir / "sweep" / "summary.csv")) == 3);
  CHECK(fs::exists(dir / "sweep" / "report_eps0.txt"));
  CHECK(fs::exists(dir / "sweep" / "report_eps0.3.txt"));
  CHECK(contains(slurp(dir / "sweep" / "report_eps0.3.txt"), "epsilon = 0.3\n"));
}

TEST_CASE("cli error contracts") {
  const fs::path dir = fs::temp_directory_path() / "gantab_cli_errors";
  fs::remove_all(dir);
  fs::create_directories(dir);

  spit(dir / "missing_schema.json",
       "{\"data\": \"data.csv\", \"schema\": \"nowhere.txt\"}");
  spit(dir / "data.csv", "x\n1\n2\n");
  auto fit = run_cli(dir, "fit --config " + (dir / "missing_schema.json").string() +
                              " --out " + (dir / "o").string());
  CHECK(fit.code == 2);
  CHECK(contains(fit.err, "nowhere.txt"));

  spit(dir / "bad_key.json",
       "{\"data\": \"data.csv\", \"schema\": \"s.txt\", \"typo\": 1}");
  auto fit2 = run_cli(dir, "fit --config " + (dir / "bad_key.json").string() + " --out " +
                               (dir / "o").string());
  CHECK(fit2.code == 2);
  CHECK(contains(fit2.err, "typo"));

  auto ev = run_cli(dir, "eval --real " + (dir / "data.csv").string() + " --schema s --out o");
  CHECK(ev.code == 2);

  auto missing = run_cli(dir, "sample --model " + (dir / "no.json").string() +
                                  " -n 5 --seed 1 --out " + (dir / "x.csv").string());
  CHECK(missing.code == 2);

  spit(dir / "corrupt.json", "{\"format_version\": 1}");
  auto corrupt = run_cli(dir, "sample --model " + (dir / "corrupt.json").string() +
                                  " -n 5 --seed 1 --out " + (dir / "x.csv").string());
  CHECK(corrupt.code == 1);

  auto none = run_cli(dir, "");
  CHECK(none.code == 2);

  auto neg = run_cli(dir, "sample --model m -n -3 --seed 1 --out x.csv");
  CHECK(neg.code == 2);
}
