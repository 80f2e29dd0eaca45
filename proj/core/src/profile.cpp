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

#include "aad/profile.hpp"

#include <fstream>

#include "aad/checkpoint.hpp"
#include "aad/error.hpp"

namespace aad {

nlohmann::json Profile::to_json() const {
  nlohmann::json j;
  j[kConfigVersionKey] = kConfigVersion;
  j["profile"] = name;
  j["features"] = {{"sample_rate", features.sample_rate}, {"frame_size", features.frame_size},
                   {"hop_size", features.hop_size},       {"n_mels", features.n_mels},
                   {"n_stack", features.n_stack},         {"window_frames", features.window_frames}};
  j["valve_preprocess"] = {{"enabled", valve_preprocess},
                           {"smoothing_seconds", features.valve.smoothing_seconds},
                           {"threshold_factor", features.valve.threshold_factor},
                           {"segment_seconds", features.valve.segment_seconds}};
  j["train"] = {{"svdd", svdd.to_json()}, {"ae", ae.to_json()}};
  return j;
}

Profile Profile::from_json(const nlohmann::json& j) {
  if (!j.contains(kConfigVersionKey)) {
    throw Error(ErrorKind::kConfiguration,
                std::string("config is missing the '") + kConfigVersionKey + "' key");
  }
  if (j.at(kConfigVersionKey) != kConfigVersion) {
    throw Error(ErrorKind::kConfiguration, "unsupported config version " +
                                               j.at(kConfigVersionKey).dump());
  }
  Profile p;
  try {
    p.name = j.value("profile", p.name);
    if (j.contains("features")) {
      const auto& f = j.at("features");
      FeatureConfig& c = p.features;
      c.sample_rate = f.value("sample_rate", c.sample_rate);
      c.frame_size = f.value("frame_size", c.frame_size);
      c.hop_size = f.value("hop_size", c.hop_size);
      c.n_mels = f.value("n_mels", c.n_mels);
      c.n_stack = f.value("n_stack", c.n_stack);
      c.window_frames = f.value("window_frames", c.window_frames);
    }
    if (j.contains("valve_preprocess")) {
      const auto& v = j.at("valve_preprocess");
      ValveConfig& c = p.features.valve;
      p.valve_preprocess = v.value("enabled", p.valve_preprocess);
      c.smoothing_seconds = v.value("smoothing_seconds", c.smoothing_seconds);
      c.threshold_factor = v.value("threshold_factor", c.threshold_factor);
      c.segment_seconds = v.value("segment_seconds", c.segment_seconds);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      if (t.contains("svdd")) p.svdd = TrainConfig::from_json(t.at("svdd"), p.svdd);
      if (t.contains("ae")) p.ae = TrainConfig::from_json(t.at("ae"), p.ae);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfiguration, std::string("config: ") + e.what());
  }
  if (p.svdd.model_kind != ModelKind::kDeepSvdd || p.ae.model_kind != ModelKind::kDenseAe) {
    throw Error(ErrorKind::kConfiguration, "config: train.svdd / train.ae name the wrong model");
  }
  p.svdd.validate();
  p.ae.validate();
  return p;
}

std::string Profile::digest() const { return nn::digest_hex(to_json().dump()); }

Profile paper_profile() { return Profile{}; }

nlohmann::json load_config_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kUsage, "config file not found: " + path.string());
  }
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfiguration, path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains(kConfigVersionKey)) {
    throw Error(ErrorKind::kConfiguration,
                path.string() + ": missing '" + kConfigVersionKey + "' key");
  }
  if (j.at(kConfigVersionKey) != kConfigVersion) {
    throw Error(ErrorKind::kConfiguration, path.string() + ": unsupported config version " +
                                               j.at(kConfigVersionKey).dump());
  }
  return j;
}

Profile load_profile(const std::filesystem::path& path) {
  return Profile::from_json(load_config_json(path));
}

}  // namespace aad
