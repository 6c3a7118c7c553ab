#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftlgan/cli.hpp"
#include "ftlgan/error.hpp"
#include "ftlgan/training.hpp"

using namespace ftlgan;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ftlgan");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Shared prepared toy data: 8 identities x 4 images at 14 and 28.
struct Workspace {
  fs::path root = fs::temp_directory_path() / "ftlgan_cli_ws";
  Workspace() {
    fs::remove_all(root);
    REQUIRE(run_cli({"--seed", "3", "--out", (root / "corpus").string(), "synth", "--identities", "8", "--images", "4"}) ==
            0);
    REQUIRE(run_cli({"--seed", "3", "--out", (root / "data").string(), "prepare", "--corpus", (root / "corpus").string(),
                     "--resolutions", "14,28"}) == 0);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string data() const { return (root / "data").string(); }
};

}  // namespace

TEST_CASE("prepare summary and reproducibility") {
  Workspace ws;
  cli::GlobalOptions g;
  g.seed = 3;
  g.out = ws.root / "again";
  cli::PrepareOptions o;
  o.corpus = ws.root / "corpus";
  o.resolutions = {14, 28};
  const auto summary = cli::cmd_prepare(g, o);
  const std::string text = summary.text();
  CHECK(text.find("resolution 14: 32 images") != std::string::npos);
  CHECK(text.find("resolution 112: 32 images") != std::string::npos);
  CHECK(slurp(ws.root / "again" / "manifest.jsonl") == slurp(ws.root / "data" / "manifest.jsonl"));
  CHECK(slurp(ws.root / "again" / "triplets_28.tsv") == slurp(ws.root / "data" / "triplets_28.tsv"));
  CHECK(run_cli({"--out", (ws.root / "x").string(), "prepare", "--corpus", (ws.root / "missing").string()}) == 2);
}

TEST_CASE("exit codes") {
  Workspace ws;
  const std::string out = (ws.root / "out").string();
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"bogus"}) == 2);
  CHECK(run_cli({"--out", out, "evaluate", "--model", "sinc", "--data", ws.data(), "--resolution", "28"}) == 2);
  CHECK(run_cli({"--out", out, "--toy", "evaluate", "--model", "bicubic", "--data", ws.data(), "--resolution", "28",
                 "--pairs", "1"}) == 3);
  CHECK(run_cli({"--out", out, "compare", "--data", ws.data()}) == 2);

  // Scale and resolution disagree: config error before any training.
  ExperimentConfig bad;
  bad.name = "bad";
  bad.anchor_resolution = 28;
  bad.generator = GeneratorConfig::toy(8);
  nlohmann::json j = bad;
  std::ofstream(ws.root / "bad.json") << j.dump();
  CHECK(run_cli({"--out", out, "train", "--config", (ws.root / "bad.json").string(), "--data", ws.data()}) == 4);
}

TEST_CASE("evaluate writes reports and is reproducible") {
  Workspace ws;
  const fs::path out = ws.root / "eval";
  for (const char* dir : {"a", "b"})
    REQUIRE(run_cli({"--seed", "1", "--out", (out / dir).string(), "--toy", "evaluate", "--model", "bicubic", "--data",
                     ws.data(), "--resolution", "28", "--pairs", "40"}) == 0);
  for (const char* f : {"bicubic_r28_scores.csv", "bicubic_r28_report.json", "bicubic_r28_hist.png", "bicubic_r28_roc.png"}) {
    CHECK(fs::exists(out / "a" / f));
    CHECK(slurp(out / "a" / f) == slurp(out / "b" / f));
  }
}

TEST_CASE("train and compare") {
  Workspace ws;
  const fs::path out = ws.root / "out";
  ExperimentConfig c;
  c.name = "tiny";
  c.anchor_resolution = 28;
  c.generator = GeneratorConfig::toy(4);
  c.generator.n_rrdb = 1;
  c.extractor = "toy_deterministic";
  c.learning_rate = 0.02;
  c.batch_size = 4;
  c.triplets_per_epoch = 4;
  c.validation_pairs = 20;
  nlohmann::json j = c;
  std::ofstream(ws.root / "tiny.json") << j.dump();
  REQUIRE(run_cli({"--seed", "2", "--out", out.string(), "train", "--config", (ws.root / "tiny.json").string(), "--data",
                   ws.data(), "--epochs", "1"}) == 0);
  const fs::path run = out / "runs" / "tiny-s2";
  REQUIRE(fs::exists(run / "checkpoint_final.ftw"));
  const TrainLog log = load_train_log(run / "train_log.jsonl");
  CHECK(log.steps.size() == 1);
  CHECK(log.status == RunStatus::completed);
  CHECK(fs::exists(out / "runs.jsonl"));

  const std::string ckpt = "ftl=" + (run / "checkpoint_final.ftw").string();
  for (const char* dir : {"c1", "c2"})
    REQUIRE(run_cli({"--seed", "1", "--out", (ws.root / dir).string(), "--toy", "compare", "--models", "bicubic", ckpt,
                     "--data", ws.data(), "--resolutions", "14,28", "--pairs", "40"}) == 0);
  const std::string csv = slurp(ws.root / "c1" / "comparison.csv");
  CHECK(csv == slurp(ws.root / "c2" / "comparison.csv"));
  std::istringstream lines(csv);
  std::string header, bicubic, ftl;
  std::getline(lines, header);
  std::getline(lines, bicubic);
  std::getline(lines, ftl);
  CHECK(header == "model,dprime_14,auc_14,dprime_28,auc_28,dprime_avg,auc_avg");
  CHECK(bicubic.rfind("bicubic,", 0) == 0);
  // The checkpoint is x4, so it has no 14x14 cell.
  CHECK(ftl.rfind("ftl *,NA,NA,", 0) == 0);
}

TEST_CASE("model specs") {
  const auto s = cli::ModelSpec::parse("mine=runs/{res}/g.ftw");
  CHECK(s.label == "mine");
  CHECK(s.spec == "runs/{res}/g.ftw");
  CHECK(cli::ModelSpec::parse("lanczos").label == "lanczos");
  CHECK(cli::ModelSpec::parse("lanczos").resolve(14)(ImageArray(14, 14, 0.5)).height() == 112);
  CHECK_THROWS_AS(cli::ModelSpec::parse("nope").resolve(28), InvalidArgument);
}

TEST_CASE("unique run ids") {
  const fs::path root = fs::temp_directory_path() / "ftlgan_cli_ids";
  fs::remove_all(root);
  CHECK(cli::unique_run_id(root, "base", 4) == "base-s4");
  fs::create_directories(root / "runs" / "base-s4");
  CHECK(cli::unique_run_id(root, "base", 4) == "base-s4-2");
  fs::remove_all(root);
}

TEST_CASE("ablate subset") {
  Workspace ws;
  const fs::path out = ws.root / "abl";
  REQUIRE(run_cli({"--seed", "1", "--out", out.string(), "--toy", "ablate", "--data", ws.data(), "--only", "base,2",
                   "--epochs", "1", "--triplets", "2", "--batch-size", "2", "--pairs", "20"}) == 0);
  std::istringstream lines(slurp(out / "ablation.csv"));
  std::string line;
  std::vector<std::string> rows;
  std::getline(lines, line);
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line.substr(0, line.find(',')));
  CHECK(rows == std::vector<std::string>{"base", "2"});
}
