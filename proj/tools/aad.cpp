// Copyright 2026 The AAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// aad: command-line front end for the anomaly-detection pipeline.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aad/audio_io.hpp"
#include "aad/checkpoint.hpp"
#include "aad/error.hpp"
#include "aad/evaluation.hpp"
#include "aad/features.hpp"
#include "aad/models.hpp"
#include "aad/pipeline.hpp"
#include "aad/profile.hpp"
#include "aad/synthgen.hpp"
#include "aad/training.hpp"
#include "aad/verify.hpp"

#ifndef AAD_VERSION
#define AAD_VERSION "0.0.0"
#endif

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using aad::Error;
using aad::ErrorKind;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Globals {
  unsigned threads = 1;
  bool deterministic = false;
  bool quiet = false;

  unsigned effective_threads() const { return deterministic ? 1u : std::max(1u, threads); }
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

// One manifest per output directory, rewritten on every run.
class RunManifest {
 public:
  RunManifest(std::string command, const Globals& g) : started_(utc_now()) {
    j_["command"] = std::move(command);
    j_["tool_version"] = AAD_VERSION;
    j_["threads"] = g.effective_threads();
    j_["deterministic"] = g.deterministic;
    j_["seeds"] = json::array();
    j_["inputs"] = json::array();
    j_["outputs"] = json::array();
  }
  json& operator[](const char* key) { return j_[key]; }
  void config_digest(const std::string& d) { j_["config_digest"] = d; }
  void seed(std::uint64_t s) { j_["seeds"].push_back(s); }
  void input(const fs::path& p) { j_["inputs"].push_back(p.generic_string()); }
  void output(const fs::path& p) { j_["outputs"].push_back(p.generic_string()); }
  void write(const fs::path& dir) {
    j_["timestamps"] = {{"started", started_}, {"finished", utc_now()}};
    write_text(dir / "manifest.json", j_.dump(2) + "\n");
  }

 private:
  json j_;
  std::string started_;
};

fs::path resolve_data_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AAD_DATA_ROOT"); env && *env) return env;
  throw Error(ErrorKind::kUsage, "no data directory: pass --data or set AAD_DATA_ROOT");
}

std::string normalize_snr(const std::string& text) {
  std::string tag;
  if (aad::parse_snr_tag(text, &tag)) return tag;
  if (aad::parse_snr_tag(text + "dB", &tag)) return tag;
  throw Error(ErrorKind::kUsage, "cannot read SNR '" + text + "' (expected e.g. 6dB, 0dB, -6dB)");
}

aad::Profile profile_from(const std::string& path) {
  return path.empty() ? aad::paper_profile() : aad::load_profile(path);
}

struct CellKey {
  aad::MachineType machine;
  std::string model_id;
  std::string snr;
  auto operator<=>(const CellKey&) const = default;
};

std::set<CellKey> cells_of(const std::vector<aad::ClipEntry>& entries) {
  std::set<CellKey> out;
  for (const aad::ClipEntry& e : entries) out.insert({e.machine, e.model_id, e.snr});
  return out;
}

void log(const Globals& g, const std::string& line) {
  if (!g.quiet) std::cerr << line << '\n';
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out;
  bool overwrite = false;
};

int cmd_synth(const SynthArgs& a, const Globals& g) {
  const json cfg = aad::load_config_json(a.config);
  std::vector<aad::SynthSpec> specs;
  if (cfg.contains("specs")) {
    for (const json& s : cfg.at("specs")) specs.push_back(aad::SynthSpec::from_json(s));
  } else if (cfg.contains("spec")) {
    specs.push_back(aad::SynthSpec::from_json(cfg.at("spec")));
  } else {
    throw Error(ErrorKind::kConfiguration, a.config + ": expected a 'specs' array");
  }
  const aad::GeneratedTree tree = aad::gen_dataset(specs, a.out, a.overwrite);

  // The generator's manifest doubles as the run manifest.
  json m = json::parse(read_text(tree.manifest));
  RunManifest run("synth", g);
  run.config_digest(aad::nn::digest_hex(cfg.dump()));
  for (const aad::SynthSpec& s : specs) run.seed(s.seed);
  run.input(a.config);
  run.output(a.out);
  const fs::path tmp = fs::path(a.out) / ".run";
  run.write(tmp);
  m["run"] = json::parse(read_text(tmp / "manifest.json"));
  fs::remove_all(tmp);
  write_text(tree.manifest, m.dump(2) + "\n");
  std::cout << "wrote " << tree.files.size() << " clips under " << a.out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- features

struct FeaturesArgs {
  std::string data;
  std::string out;
  std::string machine = "all";
  std::string snr = "all";
  std::string id = "all";
  std::string valve = "auto";
  std::string config;
  std::uint64_t seed = 0;
};

int cmd_features(const FeaturesArgs& a, const Globals& g) {
  const fs::path data = resolve_data_root(a.data);
  const aad::Profile profile = profile_from(a.config);
  const bool valve_preprocess = a.valve == "off" ? false : profile.valve_preprocess || a.valve == "on";

  const aad::ClipIndex full = aad::scan_dataset(data);
  for (const std::string& w : full.warnings) log(g, "warning: " + w);
  std::optional<aad::MachineType> machine;
  if (a.machine != "all") machine = aad::parse_machine(a.machine);
  const std::string snr = a.snr == "all" ? "" : normalize_snr(a.snr);

  aad::ClipIndex index;
  for (const aad::ClipEntry& e : full.entries) {
    if (machine && e.machine != *machine) continue;
    if (!snr.empty() && e.snr != snr) continue;
    if (a.id != "all" && e.model_id != a.id) continue;
    index.entries.push_back(e);
  }
  if (index.entries.empty()) {
    throw Error(ErrorKind::kEmptyInput, "no clips match machine=" + a.machine + " snr=" + a.snr +
                                            " id=" + a.id + " under " + data.string());
  }

  // Every clip must be readable before any work starts.
  std::vector<std::string> missing;
  for (const aad::ClipEntry& e : index.entries) {
    try {
      const aad::WavInfo info = aad::probe_wav(e.path);
      (void)info;
    } catch (const std::exception& ex) {
      missing.push_back(e.path.string() + ": " + ex.what());
    }
  }
  if (!missing.empty()) {
    for (const std::string& m : missing) std::cerr << "missing: " << m << '\n';
    throw Error(ErrorKind::kIo, std::to_string(missing.size()) + " clip(s) missing or unreadable");
  }

  const fs::path out = a.out;
  aad::FeatureStore store(out, valve_preprocess, profile.features);
  store.prefetch(index.entries, g.effective_threads());
  store.save_index();
  write_text(out / "index.csv", aad::to_csv(index));

  // Normalization sidecar per cell, fit on the training split only.
  json sidecars = json::array();
  for (const CellKey& c : cells_of(index.entries)) {
    const aad::SplitSpec split = aad::make_split(index, c.machine, c.model_id, c.snr, a.seed);
    std::vector<aad::LogMelSpectrogram> train;
    for (const aad::ClipEntry& e : split.train) train.push_back(store.load_cached(e));
    const aad::NormStats stats = aad::fit_normalizer(train);
    const fs::path path = out / "norm" / c.snr / aad::to_string(c.machine) / c.model_id /
                          "norm_stats.json";
    const json side = {{"mean", stats.mean},
                       {"std", stats.std},
                       {"digest", aad::stats_digest(stats)},
                       {"split_seed", a.seed},
                       {"n_train", split.train.size()},
                       {"n_val", split.val.size()},
                       {"n_test", split.test.size()}};
    write_text(path, side.dump(2) + "\n");
    sidecars.push_back(fs::relative(path, out).generic_string());
  }

  RunManifest run("features", g);
  run.config_digest(profile.digest());
  run.seed(a.seed);
  run.input(data);
  run.output(out);
  run["profile"] = profile.to_json();
  run["valve_preprocess"] = valve_preprocess;
  run["n_clips"] = index.entries.size();
  run["cache"] = {{"hits", store.stats().hits}, {"misses", store.stats().misses}};
  run["norm_sidecars"] = sidecars;
  run.write(out);
  std::cout << index.entries.size() << " clips, " << store.stats().hits << " cache hits, "
            << store.stats().misses << " extracted\n";
  return kExitOk;
}

// Features directory written by cmd_features.
struct FeatureDir {
  fs::path root;
  json manifest;
  aad::ClipIndex index;
  aad::Profile profile;
  bool valve_preprocess = true;
};

FeatureDir open_feature_dir(const fs::path& root) {
  if (!fs::exists(root / "manifest.json") || !fs::exists(root / "index.csv")) {
    throw Error(ErrorKind::kUsage, root.string() + " is not a features directory (run `aad features`)");
  }
  FeatureDir d;
  d.root = root;
  d.manifest = json::parse(read_text(root / "manifest.json"));
  d.index = aad::index_from_csv(read_text(root / "index.csv"));
  d.profile = aad::Profile::from_json(d.manifest.at("profile"));
  d.valve_preprocess = d.manifest.at("valve_preprocess").get<bool>();
  return d;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string features;
  std::string model;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::string config;
  std::string variant;
  int max_epochs = 0;
  std::string machine;
  std::string snr;
  std::string id;
  std::string out;
};

CellKey pick_cell(const aad::ClipIndex& index, const std::string& machine, const std::string& snr,
                  const std::string& id) {
  std::vector<CellKey> matches;
  for (const CellKey& c : cells_of(index.entries)) {
    if (!machine.empty() && c.machine != aad::parse_machine(machine)) continue;
    if (!snr.empty() && c.snr != normalize_snr(snr)) continue;
    if (!id.empty() && c.model_id != id) continue;
    matches.push_back(c);
  }
  if (matches.size() != 1) {
    throw Error(ErrorKind::kUsage,
                std::to_string(matches.size()) +
                    " (machine, id, snr) cells match; narrow with --machine/--snr/--id");
  }
  return matches.front();
}

int cmd_train(const TrainArgs& a, const Globals& g) {
  const FeatureDir fd = open_feature_dir(a.features);
  const aad::Profile profile = profile_from(a.config);
  const aad::ModelKind kind = aad::parse_model_kind(a.model);
  aad::TrainConfig config = profile.train_for(kind);
  config.seed = a.seed;
  if (kind == aad::ModelKind::kDeepSvdd) config.subspace_dim = a.dim;
  if (!a.variant.empty()) config.variant = aad::parse_svdd_variant(a.variant);
  if (a.max_epochs > 0) config.max_epochs = a.max_epochs;
  config.validate();

  const CellKey cell = pick_cell(fd.index, a.machine, a.snr, a.id);
  aad::FeatureStore store(fd.root, fd.valve_preprocess, fd.profile.features);
  aad::CellOptions options;
  options.train = config;
  options.valve_preprocess = fd.valve_preprocess;
  options.features = fd.profile.features;
  options.loader = store.cached_loader();

  const aad::CellResult result =
      aad::run_cell(fd.index, cell.machine, cell.model_id, cell.snr, options,
                    [&](const aad::EpochRecord& r) {
                      char buf[128];
                      std::snprintf(buf, sizeof(buf), "epoch %3d  train %.6g  val %.6g%s",
                                    r.epoch, r.train_loss, r.val_loss, r.is_best ? "  *" : "");
                      log(g, buf);
                    });

  const fs::path out = a.out;
  fs::create_directories(out);
  aad::nn::save_checkpoint(out / "model.aadc", result.trained.checkpoint);
  // Load-time assertions (AE parameter count, SVDD bias-freedom) run here.
  const aad::nn::Checkpoint reloaded = aad::nn::load_checkpoint(out / "model.aadc");
  if (kind == aad::ModelKind::kDenseAe) {
    (void)aad::dense_ae_from_checkpoint(reloaded);
  } else {
    (void)aad::svdd_from_checkpoint(reloaded);
  }
  write_text(out / "train_log.csv", result.trained.log.to_csv());
  std::ostringstream scores;
  scores << "clip,label,score\n";
  for (const aad::ScoredClip& s : result.scores) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", s.score);
    scores << s.clip_id << ',' << aad::to_string(s.label) << ',' << buf << '\n';
  }
  write_text(out / "scores.csv", scores.str());

  RunManifest run("train", g);
  run.config_digest(config.digest());
  run.seed(config.seed);
  run.input(fd.root);
  run.output(out);
  run["train_config"] = config.to_json();
  run["cell"] = result.trained.checkpoint.metadata.at("cell");
  run["paper_dim"] = config.paper_dim();
  run["warnings"] = json::array();
  if (!config.paper_dim()) {
    run["warnings"].push_back("subspace dim " + std::to_string(config.subspace_dim) +
                              " is outside the evaluated set {2, 4, 8}");
  }
  run["best_epoch"] = result.trained.log.best_epoch;
  run["stop_reason"] = aad::to_string(result.trained.log.stop_reason);
  run["test_auc"] = result.record.auc;
  run.write(out);
  std::printf("%s %s %s %s: AUC %.4f (best epoch %d, %s)\n", result.record.method.c_str(),
              aad::to_string(cell.machine).c_str(), cell.model_id.c_str(), cell.snr.c_str(),
              result.record.auc, result.trained.log.best_epoch,
              aad::to_string(result.trained.log.stop_reason).c_str());
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoints;
  std::string features;
  std::string out;
};

std::vector<fs::path> find_checkpoints(const fs::path& root) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(root)) return {root};
  if (!fs::is_directory(root)) throw Error(ErrorKind::kUsage, root.string() + " does not exist");
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".aadc") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorKind::kEmptyInput, "no .aadc checkpoints under " + root.string());
  return out;
}

int cmd_eval(const EvalArgs& a, const Globals& g) {
  const FeatureDir fd = open_feature_dir(a.features);
  aad::FeatureStore store(fd.root, fd.valve_preprocess, fd.profile.features);
  std::vector<aad::EvalRecord> records;
  RunManifest run("eval", g);
  for (const fs::path& p : find_checkpoints(a.checkpoints)) {
    const aad::nn::Checkpoint cp = aad::nn::load_checkpoint(p);
    const aad::CellResult r =
        aad::evaluate_checkpoint(cp, fd.index, store.cached_loader(), fd.profile.features);
    log(g, p.string() + ": AUC " + std::to_string(r.record.auc));
    records.push_back(r.record);
    run.input(p);
    run.seed(r.record.seed);
  }
  const aad::EvalReport report = aad::aggregate(records);
  const fs::path out = a.out;
  write_text(out / "report.csv", report.to_csv());
  write_text(out / "report.md", report.to_markdown());
  run.input(fd.root);
  run.output(out);
  run.config_digest(aad::nn::digest_hex(report.to_csv()));
  run.write(out);
  std::cout << report.to_markdown();
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> checkpoints;
  int reps = 100;
  std::string out;
};

int cmd_bench(const BenchArgs& a, const Globals& g) {
  json results = json::array();
  std::printf("%-40s %-6s %14s %16s %8s\n", "checkpoint", "model", "ms/clip", "ms/unit", "units");
  for (const std::string& path : a.checkpoints) {
    const aad::nn::Checkpoint cp = aad::nn::load_checkpoint(path);
    const json& meta = cp.metadata;
    aad::MachineType machine = aad::MachineType::kPump;
    bool valve_preprocess = true;
    if (meta.contains("cell")) {
      machine = aad::parse_machine(meta["cell"].at("machine").get<std::string>());
      valve_preprocess = meta["cell"].at("valve_preprocess").get<bool>();
    }
    // A fixed synthetic 10 s clip keeps the workload identical across runs.
    const aad::AudioClip clip =
        aad::gen_clip(aad::default_spec(machine, 6, 0), 0, aad::Label::kNormal);
    const aad::LogMelSpectrogram spec = aad::extract_log_mel(clip, machine, valve_preprocess);
    const aad::NormStats stats{meta.value("norm_mean", 0.0), meta.value("norm_std", 1.0)};
    const aad::FeatureBatch batch =
        aad::make_feature_batch(aad::apply_normalizer(spec, stats), clip.source_path);
    const aad::LatencyReport r = aad::measure_latency(cp, batch, a.reps);
    const std::string kind = meta.value("model_kind", "?");
    std::printf("%-40s %-6s %14.4f %16.6f %8zu\n", path.c_str(), kind.c_str(), r.mean_ms_per_clip,
                r.mean_ms_per_unit, r.units_per_clip);
    results.push_back({{"checkpoint", path},
                       {"model_kind", kind},
                       {"mean_ms_per_clip", r.mean_ms_per_clip},
                       {"mean_ms_per_unit", r.mean_ms_per_unit},
                       {"units_per_clip", r.units_per_clip},
                       {"repetitions", r.repetitions}});
  }
  const std::string hw = aad::hardware_descriptor();
  std::printf("hardware: %s\n", hw.c_str());
  if (!a.out.empty()) {
    const fs::path out = a.out;
    write_text(out / "latency.json", json({{"hardware", hw}, {"results", results}}).dump(2) + "\n");
    RunManifest run("bench", g);
    for (const std::string& p : a.checkpoints) run.input(p);
    run.output(out);
    run.config_digest(aad::nn::digest_hex(std::to_string(a.reps)));
    run.write(out);
  }
  return kExitOk;
}

// --------------------------------------------------------------- verify

struct VerifyArgs {
  int seeds = 10;
  int auc_instances = 1000;
  bool inject_gradient_fault = false;
  std::string ae_layout;
  std::string svdd_layout;
};

int cmd_verify(const VerifyArgs& a, const Globals&) {
  aad::VerifyOptions o;
  o.grad_seeds = a.seeds;
  o.auc_instances = a.auc_instances;
  if (a.inject_gradient_fault) {
    // Test hook: perturb every analytic gradient by 1%.
    o.gradient_hook = [](aad::nn::NetworkParams<double>& p) {
      for (auto& [name, t] : p.tensors) {
        for (std::size_t i = 0; i < t.size(); ++i) t.grad()[i] *= 1.01;
      }
    };
  }
  if (!a.ae_layout.empty()) o.ae_layout = aad::nn::Layout::parse(read_text(a.ae_layout));
  if (!a.svdd_layout.empty()) o.svdd_dim2_layout = aad::nn::Layout::parse(read_text(a.svdd_layout));
  int failed = 0;
  for (const aad::CheckResult& r : aad::run_verify(o)) {
    std::printf("%s %-28s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.passed) ++failed;
  }
  std::printf("%d check(s) failed\n", failed);
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aad: machine-sound anomaly detection (dense AE and deep SVDD)"};
  app.set_version_flag("--version", AAD_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads for per-clip work")
      ->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", g.deterministic, "Force single-threaded execution");
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset tree");
  synth->add_option("--config", sa.config, "Synthesis config JSON")->required();
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_flag("--overwrite", sa.overwrite, "Replace an existing non-empty directory");

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "Extract and cache log-Mel features");
  features->add_option("--data", fa.data, "Dataset root (default: $AAD_DATA_ROOT)");
  features->add_option("--out", fa.out, "Feature directory")->required();
  features->add_option("--machine", fa.machine, "valve|pump|fan|slide_rail|all");
  features->add_option("--snr", fa.snr, "6dB|0dB|-6dB|all");
  features->add_option("--id", fa.id, "Model id (e.g. id_00) or all");
  features->add_option("--valve-preprocess", fa.valve, "on|off|auto (valve clips only)")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  features->add_option("--config", fa.config, "Profile JSON (default: paper)");
  features->add_option("--seed", fa.seed, "Split seed for the normalization sidecar");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one model on one (machine, id, snr) cell");
  train->add_option("--features", ta.features, "Feature directory")->required();
  train->add_option("--model", ta.model, "ae|svdd")->required()->check(CLI::IsMember({"ae", "svdd"}));
  train->add_option("--dim", ta.dim, "SVDD subspace dimension")->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "Split and initialization seed");
  train->add_option("--config", ta.config, "Profile JSON (default: paper)");
  train->add_option("--variant", ta.variant, "one_class|soft_boundary")
      ->check(CLI::IsMember({"one_class", "soft_boundary"}));
  train->add_option("--max-epochs", ta.max_epochs, "Override the epoch cap");
  train->add_option("--machine", ta.machine, "Cell selection");
  train->add_option("--snr", ta.snr, "Cell selection");
  train->add_option("--id", ta.id, "Cell selection");
  train->add_option("--out", ta.out, "Output directory")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score checkpoints and write an AUC report");
  eval->add_option("--checkpoints", ea.checkpoints, "Checkpoint file or directory")->required();
  eval->add_option("--features", ea.features, "Feature directory")->required();
  eval->add_option("--out", ea.out, "Report directory")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Measure per-clip inference latency");
  bench->add_option("--checkpoint", ba.checkpoints, "Checkpoint file(s)")->required();
  bench->add_option("--reps", ba.reps, "Repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--out", ba.out, "Optional output directory");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run gradient, AUC, shape and parameter checks");
  verify->add_option("--seeds", va.seeds, "Random seeds per gradient check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--auc-instances", va.auc_instances, "Random AUC instances")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--inject-gradient-fault", va.inject_gradient_fault)->group("");
  verify->add_option("--ae-layout", va.ae_layout)->group("");
  verify->add_option("--svdd-layout", va.svdd_layout)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(sa, g);
    if (*features) return cmd_features(fa, g);
    if (*train) return cmd_train(ta, g);
    if (*eval) return cmd_eval(ea, g);
    if (*bench) return cmd_bench(ba, g);
    if (*verify) return cmd_verify(va, g);
  } catch (const Error& e) {
    std::cerr << "aad: " << e.what() << '\n';
    return e.kind() == ErrorKind::kUsage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "aad: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
