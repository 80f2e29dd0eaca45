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

#include "aad/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <functional>
#include <memory>
#include <thread>
#include <tuple>

#include "aad/error.hpp"
#include "aad/models.hpp"

namespace aad {
namespace {

int snr_order(const std::string& snr) {
  // 6dB, 0dB, -6dB left to right.
  try {
    return -std::stoi(snr);
  } catch (...) {
    return 0;
  }
}

std::string method_label(const std::string& method, std::size_t dim) {
  if (method == "ae") return "Dense AE";
  if (method == "ae_valve_pre") return "Dense AE (preprocessed valve)";
  if (method == "svdd") return "One-class deep SVDD (dim " + std::to_string(dim) + ")";
  if (method == "svdd_soft") return "Soft-boundary deep SVDD (dim " + std::to_string(dim) + ")";
  return dim ? method + " (dim " + std::to_string(dim) + ")" : method;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kDimension, "auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the midrank sum of the anomalous class, in integers.
  std::uint64_t twice_rank_sum = 0;
  std::uint64_t n_anom = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const std::uint64_t twice_midrank = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == Label::kAnomalous) {
        twice_rank_sum += twice_midrank;
        ++n_anom;
      }
    }
    i = j + 1;
  }
  const std::uint64_t n_norm = n - n_anom;
  if (n_anom == 0 || n_norm == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "auc needs both normal and anomalous scores");
  }
  const std::uint64_t twice_u = twice_rank_sum - n_anom * (n_anom + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_anom * n_norm);
}

EvalReport aggregate(std::vector<EvalRecord> records) {
  EvalReport report;
  using CellKey = std::tuple<MachineType, std::string, std::string, std::size_t>;
  std::map<CellKey, std::vector<double>> cells;
  for (const EvalRecord& r : records) {
    if (!(r.auc >= 0.0 && r.auc <= 1.0)) {
      throw Error(ErrorKind::kConfiguration, "aggregate: AUC outside [0, 1]");
    }
    cells[{r.machine, r.snr, r.method, r.dim}].push_back(r.auc);
  }
  // Summing in sorted order makes the means independent of record order.
  using AllKey = std::tuple<std::string, std::string, std::size_t>;
  std::map<AllKey, std::vector<double>> machine_means;
  for (auto& [key, values] : cells) {
    std::sort(values.begin(), values.end());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    const auto& [machine, snr, method, dim] = key;
    report.cells.push_back({machine, snr, method, dim, mean, values.size()});
    machine_means[{snr, method, dim}].push_back(mean);
  }
  for (auto& [key, means] : machine_means) {
    const auto& [snr, method, dim] = key;
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                        static_cast<double>(means.size());
    report.all_machines.push_back({snr, method, dim, mean, means.size()});
  }
  std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return std::tie(a.method, a.dim, a.machine, a.snr, a.model_id, a.seed) <
           std::tie(b.method, b.dim, b.machine, b.snr, b.model_id, b.seed);
  });
  report.records = std::move(records);
  return report;
}

const CellMean* EvalReport::find_cell(MachineType machine, const std::string& snr,
                                      const std::string& method, std::size_t dim) const {
  for (const CellMean& c : cells) {
    if (c.machine == machine && c.snr == snr && c.method == method && c.dim == dim) return &c;
  }
  return nullptr;
}

const AllMachinesMean* EvalReport::find_all(const std::string& snr, const std::string& method,
                                            std::size_t dim) const {
  for (const AllMachinesMean& a : all_machines) {
    if (a.snr == snr && a.method == method && a.dim == dim) return &a;
  }
  return nullptr;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "machine,model_id,snr,seed,model_kind,dim,auc,n_test\n";
  char buf[64];
  for (const EvalRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.auc);
    out << to_string(r.machine) << ',' << r.model_id << ',' << r.snr << ',' << r.seed << ','
        << r.method << ',' << r.dim << ',' << buf << ',' << r.n_test << '\n';
  }
  return out.str();
}

std::vector<EvalRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "machine,model_id,snr,seed,model_kind,dim,auc,n_test") {
    throw Error(ErrorKind::kFormat, "report CSV: bad header");
  }
  std::vector<EvalRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) c.push_back(col);
    if (c.size() != 8) throw Error(ErrorKind::kFormat, "report CSV: bad row '" + line + "'");
    EvalRecord r;
    r.machine = parse_machine(c[0]);
    r.model_id = c[1];
    r.snr = c[2];
    r.seed = std::stoull(c[3]);
    r.method = c[4];
    r.dim = std::stoul(c[5]);
    r.auc = std::stod(c[6]);
    r.n_test = std::stoul(c[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string EvalReport::to_markdown() const {
  const MachineType machines[] = {MachineType::kValve, MachineType::kPump, MachineType::kFan,
                                  MachineType::kSlideRail};
  std::set<std::string> snr_set;
  std::vector<std::pair<std::string, std::size_t>> methods;
  for (const CellMean& c : cells) {
    snr_set.insert(c.snr);
    if (std::find(methods.begin(), methods.end(), std::make_pair(c.method, c.dim)) ==
        methods.end()) {
      methods.emplace_back(c.method, c.dim);
    }
  }
  std::vector<std::string> snrs(snr_set.begin(), snr_set.end());
  std::sort(snrs.begin(), snrs.end(),
            [](const std::string& a, const std::string& b) { return snr_order(a) < snr_order(b); });
  std::vector<MachineType> present;
  for (MachineType m : machines) {
    if (std::any_of(cells.begin(), cells.end(), [m](const CellMean& c) { return c.machine == m; })) {
      present.push_back(m);
    }
  }

  std::ostringstream out;
  out << "| Method |";
  for (MachineType m : present) {
    for (const std::string& s : snrs) out << ' ' << to_string(m) << ' ' << s << " |";
  }
  for (const std::string& s : snrs) out << " all machines " << s << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < (present.size() + 1) * snrs.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [method, dim] : methods) {
    out << "| " << method_label(method, dim) << " |";
    for (MachineType m : present) {
      for (const std::string& s : snrs) {
        const CellMean* c = find_cell(m, s, method, dim);
        out << ' ' << (c ? fmt3(c->mean_auc) : "-") << " |";
      }
    }
    for (const std::string& s : snrs) {
      const AllMachinesMean* a = find_all(s, method, dim);
      out << ' ' << (a ? fmt3(a->mean_auc) : "-") << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string hardware_descriptor() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  std::string model = "unknown CPU";
  while (std::getline(in, line)) {
    if (line.starts_with("model name")) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(colon + 2);
      break;
    }
  }
  return model + ", single thread, CPU only";
}

LatencyReport measure_latency(const nn::Checkpoint& checkpoint, const FeatureBatch& clip,
                              int repetitions) {
  if (repetitions < 1) throw Error(ErrorKind::kConfiguration, "repetitions must be >= 1");
  const ModelKind kind = checkpoint_kind(checkpoint);
  std::function<double()> score;
  std::size_t units = 0;
  if (kind == ModelKind::kDeepSvdd) {
    auto model = std::make_shared<DeepSvddModel>(svdd_from_checkpoint(checkpoint));
    units = clip.svdd_windows.n_windows;
    score = [model, &clip] {
      return svdd_clip_score(model->params, clip.svdd_windows, model->center);
    };
  } else {
    auto model = std::make_shared<DenseAeModel>(dense_ae_from_checkpoint(checkpoint));
    units = clip.ae_vectors.rows;
    score = [model, &clip] { return ae_clip_score(model->params, clip.ae_vectors); };
  }

  volatile double sink = score();  // warm-up, excluded
  using Clock = std::chrono::steady_clock;
  double total_ms = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    const auto start = Clock::now();
    sink = score();
    total_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  }
  (void)sink;

  LatencyReport report;
  report.repetitions = repetitions;
  report.units_per_clip = units;
  report.mean_ms_per_clip = total_ms / repetitions;
  report.mean_ms_per_unit = units ? report.mean_ms_per_clip / static_cast<double>(units) : 0.0;
  report.hardware = hardware_descriptor();
  return report;
}

}  // namespace aad
