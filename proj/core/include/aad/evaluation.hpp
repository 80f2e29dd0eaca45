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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aad/audio_io.hpp"
#include "aad/checkpoint.hpp"
#include "aad/features.hpp"

namespace aad {

// Mann-Whitney AUC via midranks: (#anomalous > normal + 0.5 #ties) / (n_a n_n).
// Throws kUndefinedMetric unless both labels occur.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct EvalRecord {
  MachineType machine = MachineType::kValve;
  std::string model_id;
  std::string snr;
  std::uint64_t seed = 0;
  std::string method;  // "ae", "ae_valve_pre", "svdd", ...
  std::size_t dim = 0;  // SVDD subspace dimension; 0 for the AE
  double auc = 0.0;
  std::size_t n_test = 0;
};

struct CellMean {
  MachineType machine = MachineType::kValve;
  std::string snr;
  std::string method;
  std::size_t dim = 0;
  double mean_auc = 0.0;
  std::size_t n_records = 0;
};

// Equal weight per machine: the mean of the machine means.
struct AllMachinesMean {
  std::string snr;
  std::string method;
  std::size_t dim = 0;
  double mean_auc = 0.0;
  std::size_t n_machines = 0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  std::vector<CellMean> cells;
  std::vector<AllMachinesMean> all_machines;

  // `machine,model_id,snr,seed,model_kind,dim,auc,n_test`.
  std::string to_csv() const;
  // Methods as rows; machine x SNR column groups plus an all-machines group.
  std::string to_markdown() const;

  const CellMean* find_cell(MachineType machine, const std::string& snr,
                            const std::string& method, std::size_t dim) const;
  const AllMachinesMean* find_all(const std::string& snr, const std::string& method,
                                  std::size_t dim) const;
};

EvalReport aggregate(std::vector<EvalRecord> records);
std::vector<EvalRecord> records_from_csv(const std::string& text);

struct LatencyReport {
  double mean_ms_per_clip = 0.0;
  double mean_ms_per_unit = 0.0;  // per AE vector or per SVDD window
  std::size_t units_per_clip = 0;
  int repetitions = 0;
  std::string hardware;
};

std::string hardware_descriptor();

// Times full clip scoring (forward pass plus error or distance) after one
// untimed warm-up call; mean over `repetitions` runs.
LatencyReport measure_latency(const nn::Checkpoint& checkpoint, const FeatureBatch& clip,
                              int repetitions = 100);

}  // namespace aad
