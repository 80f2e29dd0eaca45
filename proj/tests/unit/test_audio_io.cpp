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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "aad/audio_io.hpp"
#include "aad/error.hpp"
#include "support/tempdir.hpp"

namespace {

namespace fs = std::filesystem;
using aad::ErrorKind;

void put16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

// Hand-built RIFF/WAVE, interleaved frames.
std::string wav_bytes(const std::vector<std::int16_t>& interleaved, int channels, int rate,
                      std::uint16_t format = 1, std::uint16_t bits = 16) {
  const std::uint32_t data_len = std::uint32_t(interleaved.size() * (bits / 8));
  std::string s = "RIFF";
  put32(s, 36 + data_len);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, format);
  put16(s, std::uint16_t(channels));
  put32(s, std::uint32_t(rate));
  put32(s, std::uint32_t(rate * channels * bits / 8));
  put16(s, std::uint16_t(channels * bits / 8));
  put16(s, bits);
  s += "data";
  put32(s, data_len);
  for (std::int16_t v : interleaved) put16(s, std::uint16_t(v));
  return s;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << bytes;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const aad::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no aad::Error thrown";
  return ErrorKind::kIo;
}

TEST(ReadWav, ScalesFourSamples) {
  test::TempDir dir;
  write_bytes(dir / "a.wav", wav_bytes({0, 32767, -32768, 16384}, 1, 16000));
  const aad::AudioClip clip = aad::read_wav(dir / "a.wav");
  ASSERT_EQ(clip.channels, 1);
  ASSERT_EQ(clip.n_samples, 4u);
  EXPECT_EQ(clip.samples[0], 0.0f);
  EXPECT_FLOAT_EQ(clip.samples[1], 32767.0f / 32768.0f);
  EXPECT_EQ(clip.samples[2], -1.0f);
  EXPECT_EQ(clip.samples[3], 0.5f);
}

TEST(ReadWav, DeinterleavesEightChannels) {
  test::TempDir dir;
  const int channels = 8;
  const std::size_t n = 160000;
  std::vector<std::int16_t> frames(n * channels);
  for (std::size_t t = 0; t < n; ++t)
    for (int c = 0; c < channels; ++c) frames[t * channels + c] = std::int16_t(c * 1000 + int(t % 7));
  write_bytes(dir / "m.wav", wav_bytes(frames, channels, 16000));
  const aad::AudioClip clip = aad::read_wav(dir / "m.wav");
  ASSERT_EQ(clip.channels, 8);
  ASSERT_EQ(clip.n_samples, n);
  for (int c = 0; c < channels; ++c) {
    const auto ch = clip.channel(c);
    EXPECT_EQ(ch[0], float(c * 1000) / 32768.0f);
    EXPECT_EQ(ch[n - 1], float(c * 1000 + int((n - 1) % 7)) / 32768.0f);
  }
  const aad::AudioClip first = aad::select_channel(clip, 0);
  EXPECT_EQ(first.channels, 1);
  EXPECT_EQ(first.n_samples, n);
  EXPECT_TRUE(std::equal(first.samples.begin(), first.samples.end(), clip.channel(0).begin()));
  EXPECT_EQ(kind_of([&] { aad::select_channel(clip, 8); }), ErrorKind::kBounds);
}

TEST(ReadWav, MonoSelectIsIdentity) {
  test::TempDir dir;
  write_bytes(dir / "a.wav", wav_bytes({1, -2, 3}, 1, 16000));
  const aad::AudioClip clip = aad::read_wav(dir / "a.wav");
  EXPECT_EQ(aad::select_channel(clip, 0).samples, clip.samples);
}

TEST(ReadWav, RejectsTruncatedHeader) {
  test::TempDir dir;
  write_bytes(dir / "t.wav", wav_bytes({1, 2}, 1, 16000).substr(0, 20));
  EXPECT_EQ(kind_of([&] { aad::read_wav(dir / "t.wav"); }), ErrorKind::kFormat);
}

TEST(ReadWav, RejectsFloatAndTwentyFourBit) {
  test::TempDir dir;
  write_bytes(dir / "f.wav", wav_bytes({0, 0, 0, 0}, 1, 16000, 3, 32));
  write_bytes(dir / "p.wav", wav_bytes({0, 0, 0}, 1, 16000, 1, 24));
  EXPECT_EQ(kind_of([&] { aad::read_wav(dir / "f.wav"); }), ErrorKind::kUnsupportedFormat);
  EXPECT_EQ(kind_of([&] { aad::read_wav(dir / "p.wav"); }), ErrorKind::kUnsupportedFormat);
}

TEST(WriteWav, RoundTripWithinOneLsb) {
  test::TempDir dir;
  std::vector<float> x(4000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = float(std::sin(0.01 * double(i * i)) * 0.9);
  aad::write_wav(dir / "r.wav", x, 16000);
  const aad::AudioClip clip = aad::read_wav(dir / "r.wav");
  ASSERT_EQ(clip.n_samples, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::fabs(clip.samples[i] - x[i]), 1.0f / 32768.0f);
  const aad::WavInfo info = aad::probe_wav(dir / "r.wav");
  EXPECT_EQ(info.channels, 1);
  EXPECT_EQ(info.sample_rate, 16000);
  EXPECT_EQ(info.n_samples, x.size());
}

void touch_wav(const fs::path& p) { write_bytes(p, wav_bytes({0, 0}, 1, 16000)); }

TEST(ScanDataset, CountsLabelsAndSnrTags) {
  test::TempDir dir;
  for (int i = 0; i < 10; ++i) touch_wav(dir / "0dB/valve/id_00/normal" / (std::to_string(i) + ".wav"));
  for (int i = 0; i < 4; ++i) touch_wav(dir / "0dB/valve/id_00/abnormal" / (std::to_string(i) + ".wav"));
  touch_wav(dir / "-6dB/fan/id_02/normal/0.wav");
  const aad::ClipIndex index = aad::scan_dataset(dir.path());
  ASSERT_EQ(index.entries.size(), 15u);
  int anomalous = 0;
  for (const aad::ClipEntry& e : index.entries) {
    anomalous += e.label == aad::Label::kAnomalous;
    EXPECT_EQ(e.snr, e.machine == aad::MachineType::kFan ? "-6dB" : "0dB");
  }
  EXPECT_EQ(anomalous, 4);
  EXPECT_TRUE(std::is_sorted(index.entries.begin(), index.entries.end(),
                             [](const auto& a, const auto& b) { return a.path < b.path; }));
  EXPECT_EQ(index.counts().at({aad::MachineType::kValve, "id_00", "0dB", aad::Label::kNormal}), 10u);
}

TEST(ScanDataset, SkipsUnknownMachineWithWarning) {
  test::TempDir dir;
  touch_wav(dir / "6dB/mixer/id_00/normal/0.wav");
  touch_wav(dir / "6dB/pump/id_00/normal/0.wav");
  const aad::ClipIndex index = aad::scan_dataset(dir.path());
  EXPECT_EQ(index.entries.size(), 1u);
  ASSERT_FALSE(index.warnings.empty());
  EXPECT_NE(index.warnings.front().find("mixer"), std::string::npos);
}

TEST(ScanDataset, EmptyTreeIsAnError) {
  test::TempDir dir;
  EXPECT_EQ(kind_of([&] { aad::scan_dataset(dir.path()); }), ErrorKind::kEmptyInput);
}

TEST(ScanDataset, PureFunctionOfTheTree) {
  test::TempDir dir;
  touch_wav(dir / "6dB/slider/id_04/abnormal/b.wav");
  touch_wav(dir / "6dB/slider/id_04/normal/a.wav");
  const aad::ClipIndex a = aad::scan_dataset(dir.path());
  const aad::ClipIndex b = aad::scan_dataset(dir.path());
  EXPECT_EQ(a.entries, b.entries);
  EXPECT_EQ(a.entries.front().machine, aad::MachineType::kSlideRail);
  EXPECT_EQ(aad::index_from_csv(aad::to_csv(a)).entries, a.entries);
}

TEST(SnrTag, PublicDatasetNames) {
  std::string tag;
  ASSERT_TRUE(aad::parse_snr_tag("-6_dB_valve", &tag));
  EXPECT_EQ(tag, "-6dB");
  ASSERT_TRUE(aad::parse_snr_tag("6dB", &tag));
  EXPECT_EQ(tag, "6dB");
  EXPECT_FALSE(aad::parse_snr_tag("fan", &tag));
}

}  // namespace
