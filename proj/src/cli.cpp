#include "ftlgan/cli.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "ftlgan/error.hpp"
#include "ftlgan/upsamplers.hpp"

namespace ftlgan::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

DatasetManifest load_data(const fs::path& data) {
  const fs::path m = data / "manifest.jsonl";
  if (!fs::exists(m)) throw DataError("no manifest.jsonl under " + data.string() + " (run prepare first)");
  return load_manifest(m);
}

std::string evaluation_backend(const std::string& name, bool toy) {
  const ExtractorBackend b = parse_backend(name);
  return to_string(toy ? toy_counterpart(b) : b);
}

void check_device(const GlobalOptions& g) {
  if (g.device != "cpu") throw ConfigError("device '" + g.device + "' is not available (only cpu)");
}

std::string safe_label(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

EvalReport evaluate_model(const SrModel& model, const std::string& label, const DatasetManifest& manifest,
                          ImageStore& store, int resolution, int pairs, std::uint64_t seed,
                          const EmbeddingExtractor& extractor, const fs::path& out_dir) {
  auto [probes, gallery] = load_eval_split(manifest, store, resolution);
  ScoreSet scores = build_score_set(probes, gallery, model, extractor, pairs, seed);
  scores.model = label;
  scores.resolution = resolution;
  EvalReport rep = evaluate_scores(scores);
  if (!out_dir.empty()) {
    const std::string stem = safe_label(label) + "_r" + std::to_string(resolution);
    save_score_set_csv(out_dir / (stem + "_scores.csv"), scores);
    save_report_json(out_dir / (stem + "_report.json"), rep, scores);
    plot_histogram_png(out_dir / (stem + "_hist.png"), rep.hist);
    plot_roc_png(out_dir / (stem + "_roc.png"), rep.roc_points);
  }
  return rep;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const RunRecord& r) {
  j = {{"run_id", r.run_id},     {"config", r.config},           {"artifacts", r.artifacts},
       {"started_at", r.started_at}, {"finished_at", r.finished_at}, {"status", r.status}};
}

void append_run_index(const fs::path& out_root, const RunRecord& record) {
  fs::create_directories(out_root);
  std::ofstream out(out_root / "runs.jsonl", std::ios::app);
  if (!out) throw Error("cannot append to " + (out_root / "runs.jsonl").string());
  out << nlohmann::json(record).dump() << '\n';
}

std::string unique_run_id(const fs::path& out_root, const std::string& name, std::uint64_t seed) {
  const std::string base = safe_label(name) + "-s" + std::to_string(seed);
  std::string id = base;
  for (int k = 2; fs::exists(out_root / "runs" / id); ++k) id = base + "-" + std::to_string(k);
  return id;
}

std::string PrepareSummary::text() const {
  std::set<int> resolutions;
  for (const auto& [key, _] : counts) resolutions.insert(key.second);
  std::ostringstream out;
  for (int r : resolutions) {
    auto get = [&](const char* split) {
      auto it = counts.find({split, r});
      return it == counts.end() ? std::pair{0, 0} : it->second;
    };
    const auto tr = get("train");
    const auto te = get("test");
    out << "resolution " << r << ": " << tr.first + te.first << " images (train " << tr.first << ", test "
        << te.first << "); identities train " << tr.second << ", test " << te.second << '\n';
  }
  out << "triplets: " << manifest.triplets.size() << '\n';
  return out.str();
}

PrepareSummary cmd_prepare(const GlobalOptions& g, const PrepareOptions& o) {
  std::vector<int> res = o.resolutions;
  if (std::find(res.begin(), res.end(), 112) == res.end()) res.push_back(112);
  PrepareSummary s;
  s.manifest = build_resolution_sets(o.corpus, g.out, res, g.seed, o.test_fraction);
  const DatasetManifest train = s.manifest.split_view(Split::train);
  for (int r : o.resolutions) {
    if (r == 112) continue;
    const int count = o.triplets > 0 ? o.triplets : static_cast<int>(train.select(r).size());
    auto t = sample_triplets(train, r, count, g.seed);
    save_triplets(g.out / ("triplets_" + std::to_string(r) + ".tsv"), t);
    s.manifest.triplets.insert(s.manifest.triplets.end(), t.begin(), t.end());
  }
  save_manifest(g.out / "manifest.jsonl", s.manifest);
  for (const Split split : {Split::train, Split::test}) {
    const DatasetManifest view = s.manifest.split_view(split);
    for (int r : res) {
      const auto entries = view.select(r);
      std::set<std::string> ids;
      for (const auto& e : entries) ids.insert(e.identity);
      s.counts[{to_string(split), r}] = {static_cast<int>(entries.size()), static_cast<int>(ids.size())};
    }
  }
  return s;
}

RunRecord cmd_train(const GlobalOptions& g, const TrainOptions& o) {
  check_device(g);
  ExperimentConfig config = load_experiment_config(o.config);
  if (o.epochs) config.epochs = *o.epochs;
  if (o.learning_rate) config.learning_rate = *o.learning_rate;
  if (g.seed_given) config.seed = g.seed;
  if (g.toy) config = toy_variant(config);
  config.validate();
  const DatasetManifest manifest = load_data(o.data);

  RunRecord rec;
  rec.run_id = unique_run_id(g.out, config.name, config.seed);
  rec.config = config;
  rec.started_at = utc_now();
  const fs::path dir = g.out / "runs" / rec.run_id;
  RunOptions ro;
  ro.data_root = o.data;
  ro.out_dir = dir;
  const ExperimentResult r = run_experiment(config, manifest, ro);
  rec.finished_at = utc_now();
  rec.status = to_string(r.log.status);
  rec.artifacts["checkpoint"] = r.final_checkpoint.string();
  if (!r.best_checkpoint.empty()) rec.artifacts["best_checkpoint"] = r.best_checkpoint.string();
  rec.artifacts["log"] = r.log_path.string();
  rec.artifacts["config"] = (dir / "config.json").string();
  append_run_index(g.out, rec);
  return rec;
}

ModelSpec ModelSpec::parse(const std::string& text) {
  ModelSpec m;
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    m.label = text.substr(0, eq);
    m.spec = text.substr(eq + 1);
  } else {
    m.spec = text;
    const auto& names = resample_method_names();
    m.label = std::find(names.begin(), names.end(), text) != names.end() ? text : fs::path(text).stem().string();
  }
  if (m.spec.empty() || m.label.empty()) throw InvalidArgument("empty model spec '" + text + "'");
  return m;
}

SrModel ModelSpec::resolve(int resolution) const {
  const auto& names = resample_method_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    const ResampleMethod method = ResampleMethod::parse(spec);
    return [method](const ImageArray& x) { return upsample_chain(x, 112, method); };
  }
  std::string path = spec;
  if (auto p = path.find("{res}"); p != std::string::npos) path.replace(p, 5, std::to_string(resolution));
  if (!fs::exists(path)) {
    std::string opts;
    for (const auto& n : names) opts += (opts.empty() ? "" : ", ") + n;
    throw InvalidArgument("model spec '" + spec + "' is neither a baseline (" + opts + ") nor a checkpoint file");
  }
  auto params = std::make_shared<const GeneratorParams>(load_checkpoint(path));
  if (params->config.scale * resolution != 112) {
    throw InvalidArgument("checkpoint " + path + " has scale " + std::to_string(params->config.scale) +
                          ", which does not map " + std::to_string(resolution) + " to 112");
  }
  return [params](const ImageArray& x) { return super_resolve(*params, x); };
}

EvalReport cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o) {
  check_device(g);
  const ModelSpec spec = ModelSpec::parse(o.model);
  const SrModel model = spec.resolve(o.resolution);
  const DatasetManifest manifest = load_data(o.data);
  ImageStore store(o.data);
  const EmbeddingExtractor extractor = load_extractor(evaluation_backend(o.extractor, g.toy));
  return evaluate_model(model, spec.label, manifest, store, o.resolution, o.pairs, g.seed, extractor, g.out);
}

AblateResult cmd_ablate(const GlobalOptions& g, const AblateOptions& o) {
  check_device(g);
  const DatasetManifest manifest = load_data(o.data);
  ImageStore store(o.data);
  const EmbeddingExtractor evaluator = load_extractor(evaluation_backend("facenet_pretrained", g.toy));
  std::set<std::string> only(o.only.begin(), o.only.end());

  AblateResult out;
  std::vector<ModelResult> results;
  for (ExperimentConfig config : ablation_matrix()) {
    if (!only.empty() && !only.count(config.name)) continue;
    if (o.epochs) config.epochs = *o.epochs;
    if (o.learning_rate) config.learning_rate = *o.learning_rate;
    if (o.batch_size) config.batch_size = *o.batch_size;
    if (o.triplets) config.triplets_per_epoch = *o.triplets;
    if (g.toy) config = toy_variant(config);

    RunRecord rec;
    rec.run_id = unique_run_id(g.out, "ablation-" + config.name, config.seed);
    rec.config = config;
    rec.started_at = utc_now();
    const fs::path dir = g.out / "runs" / rec.run_id;
    try {
      RunOptions ro;
      ro.data_root = o.data;
      ro.out_dir = dir;
      const ExperimentResult r = run_experiment(config, manifest, ro);
      rec.status = to_string(r.log.status);
      rec.artifacts["checkpoint"] = r.final_checkpoint.string();
      rec.artifacts["log"] = r.log_path.string();
      const auto& params = r.final_params;
      ModelResult mr{config.name, config.anchor_resolution, {}};
      try {
        mr.report = evaluate_model([&params](const ImageArray& x) { return super_resolve(params, x); }, config.name,
                                   manifest, store, config.anchor_resolution, o.pairs, g.seed, evaluator, dir);
      } catch (const DegenerateInput& e) {
        // A collapsed generator yields one distance for every pair: no separation.
        spdlog::warn("ablation {}: evaluation degenerate ({}); recording chance level", config.name, e.what());
        mr.report.d_prime = 0.0;
        mr.report.auc = 0.5;
      }
      results.push_back(mr);
    } catch (const Error& e) {
      spdlog::error("ablation {} failed: {}", config.name, e.what());
      rec.status = std::string("failed: ") + e.what();
    }
    rec.finished_at = utc_now();
    append_run_index(g.out, rec);
    out.runs.push_back(rec);
  }
  if (out.runs.empty()) throw InvalidArgument("--only selected no ablation configuration");
  if (!results.empty()) {
    out.table = comparison_report(results, {28});
    write_file(g.out / "ablation.csv", out.table.to_csv());
    std::string text = out.table.to_text();
    for (const auto& r : out.runs) text += r.run_id + ": " + r.status + "\n";
    write_file(g.out / "ablation.txt", text);
  }
  return out;
}

ComparisonTable cmd_compare(const GlobalOptions& g, const CompareOptions& o) {
  check_device(g);
  if (o.models.empty()) throw InvalidArgument("compare needs at least one model spec");
  const DatasetManifest manifest = load_data(o.data);
  ImageStore store(o.data);
  const EmbeddingExtractor extractor = load_extractor(evaluation_backend(o.extractor, g.toy));
  std::vector<ModelSpec> specs;
  for (const auto& m : o.models) specs.push_back(ModelSpec::parse(m));

  std::vector<ModelResult> results;
  std::vector<std::string> seen;
  for (const auto& s : specs) {
    for (int r : o.resolutions) {
      if (std::find(seen.begin(), seen.end(), s.label) == seen.end()) seen.push_back(s.label);
      try {
        const SrModel model = s.resolve(r);
        results.push_back({s.label, r, evaluate_model(model, s.label, manifest, store, r, o.pairs, g.seed, extractor, g.out)});
      } catch (const Error& e) {
        spdlog::warn("compare {} at {}: {}", s.label, r, e.what());
      }
    }
  }
  if (results.empty()) throw DataError("no model could be evaluated");
  ComparisonTable t = comparison_report(results, o.resolutions);
  // Models that failed everywhere still get a row of absent cells.
  for (const auto& label : seen) {
    if (std::none_of(t.rows.begin(), t.rows.end(), [&](const ComparisonRow& r) { return r.model == label; })) {
      t.rows.push_back({label, std::vector<std::optional<std::pair<double, double>>>(o.resolutions.size()),
                        std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), true});
    }
  }
  write_file(g.out / "comparison.csv", t.to_csv());
  write_file(g.out / "comparison.txt", t.to_text());
  return t;
}

void cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  SyntheticCorpusOptions so;
  so.identities = o.identities;
  so.images_per_identity = o.images;
  so.seed = g.seed;
  make_synthetic_corpus(g.out, so);
}

int run(int argc, char** argv) {
  CLI::App app{"Identity-preserving face super-resolution: data preparation, training and evaluation"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::string log_level = "info";
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--device", g.device, "Compute device")->capture_default_str();
  app.add_flag("--toy", g.toy, "Use the toy generator and toy extractors");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write a procedural face-like corpus");
  synth->add_option("--identities", so.identities)->capture_default_str();
  synth->add_option("--images", so.images, "Images per identity")->capture_default_str();

  PrepareOptions po;
  auto* prepare = app.add_subcommand("prepare", "Build resolution sets, manifest and triplet files");
  prepare->add_option("--corpus", po.corpus, "<corpus>/<identity>/<image>.png")->required()->check(CLI::ExistingDirectory);
  prepare->add_option("--resolutions", po.resolutions)->delimiter(',')->capture_default_str();
  prepare->add_option("--test-fraction", po.test_fraction)->capture_default_str();
  prepare->add_option("--triplets", po.triplets, "Triplets per resolution (0: one per anchor)");

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Train a generator from an experiment config");
  train->add_option("--config", to.config)->required()->check(CLI::ExistingFile);
  train->add_option("--data", to.data, "Prepared data directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--epochs", to.epochs);
  train->add_option("--lr", to.learning_rate);

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Score one model on the test split");
  evaluate->add_option("--model", eo.model, "Checkpoint path or baseline name")->required();
  evaluate->add_option("--data", eo.data)->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--resolution", eo.resolution)->capture_default_str();
  evaluate->add_option("--pairs", eo.pairs)->capture_default_str();
  evaluate->add_option("--extractor", eo.extractor)->capture_default_str();

  AblateOptions ao;
  std::string only;
  auto* ablate = app.add_subcommand("ablate", "Run the ablation configurations and tabulate them");
  ablate->add_option("--data", ao.data)->required()->check(CLI::ExistingDirectory);
  ablate->add_option("--only", only, "Comma-separated subset, e.g. base,2");
  ablate->add_option("--epochs", ao.epochs);
  ablate->add_option("--lr", ao.learning_rate);
  ablate->add_option("--batch-size", ao.batch_size);
  ablate->add_option("--triplets", ao.triplets, "Triplets per epoch");
  ablate->add_option("--pairs", ao.pairs)->capture_default_str();

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Tabulate d' and AUC for several models");
  compare->add_option("--models", co.models, "Specs: [label=]baseline|checkpoint ({res} expands)")->required();
  compare->add_option("--data", co.data)->required()->check(CLI::ExistingDirectory);
  compare->add_option("--resolutions", co.resolutions)->delimiter(',')->capture_default_str();
  compare->add_option("--pairs", co.pairs)->capture_default_str();
  compare->add_option("--extractor", co.extractor)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  g.seed_given = app.count("--seed") > 0;

  try {
    if (*synth) {
      cmd_synth(g, so);
      std::cout << "wrote " << so.identities * so.images << " images to " << g.out.string() << '\n';
    } else if (*prepare) {
      std::cout << cmd_prepare(g, po).text();
    } else if (*train) {
      const RunRecord r = cmd_train(g, to);
      std::cout << r.run_id << ": " << r.status << '\n';
    } else if (*evaluate) {
      const EvalReport r = cmd_evaluate(g, eo);
      std::cout << "d' " << r.d_prime << "  AUC " << r.auc << "  (" << r.n_genuine << " genuine, " << r.n_impostor
                << " impostor)\n";
    } else if (*ablate) {
      ao.only = split_list(only);
      const AblateResult r = cmd_ablate(g, ao);
      std::cout << r.table.to_text();
      for (const auto& run : r.runs) std::cout << run.run_id << ": " << run.status << '\n';
    } else if (*compare) {
      std::cout << cmd_compare(g, co).to_text();
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const LoadError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DegenerateInput& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace ftlgan::cli
