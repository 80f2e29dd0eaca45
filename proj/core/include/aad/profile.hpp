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

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "aad/features.hpp"
#include "aad/training.hpp"

namespace aad {

// Every JSON config carries this top-level key.
inline constexpr const char* kConfigVersionKey = "aad_config_version";
inline constexpr int kConfigVersion = 1;

struct Profile {
  std::string name = "paper";
  FeatureConfig features;
  bool valve_preprocess = true;
  TrainConfig svdd = TrainConfig::svdd_defaults();
  TrainConfig ae = TrainConfig::ae_defaults();

  const TrainConfig& train_for(ModelKind kind) const {
    return kind == ModelKind::kDenseAe ? ae : svdd;
  }

  nlohmann::json to_json() const;
  // Missing sections keep the shipped profile defaults.
  static Profile from_json(const nlohmann::json& j);
  std::string digest() const;
};

Profile paper_profile();

// Throws kUsage when the file does not exist, kConfiguration when the JSON is
// malformed or the schema version is missing or unsupported.
nlohmann::json load_config_json(const std::filesystem::path& path);
Profile load_profile(const std::filesystem::path& path);

}  // namespace aad
