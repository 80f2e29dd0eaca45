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

#include "aad/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "aad/error.hpp"

namespace aad {
namespace fs = std::filesystem;

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct ParsedHeader {
  WavInfo info;
  std::uint64_t data_offset = 0;
  std::uint64_t data_bytes = 0;
};

ParsedHeader parse_header(std::istream& in, const fs::path& path) {
  const std::string where = path.string();
  std::array<unsigned char, 12> riff{};
  if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size())) {
    throw Error(ErrorKind::kFormat, where + ": truncated RIFF header");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kFormat, where + ": not a RIFF/WAVE file");
  }

  ParsedHeader out;
  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t block_align = 0;
  for (;;) {
    std::array<unsigned char, 8> chunk{};
    if (!in.read(reinterpret_cast<char*>(chunk.data()), chunk.size())) {
      throw Error(ErrorKind::kFormat, where + ": missing data chunk");
    }
    const std::uint32_t size = read_u32(chunk.data() + 4);
    if (std::memcmp(chunk.data(), "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorKind::kFormat, where + ": fmt chunk too short");
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) {
        throw Error(ErrorKind::kFormat, where + ": truncated fmt chunk");
      }
      format = read_u16(fmt.data());
      out.info.channels = read_u16(fmt.data() + 2);
      out.info.sample_rate = static_cast<int>(read_u32(fmt.data() + 4));
      block_align = read_u16(fmt.data() + 12);
      out.info.bits_per_sample = read_u16(fmt.data() + 14);
      if (format == kFormatExtensible && size >= 26) format = read_u16(fmt.data() + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk.data(), "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorKind::kFormat, where + ": data chunk before fmt chunk");
      out.data_offset = static_cast<std::uint64_t>(in.tellg());
      out.data_bytes = size;
      break;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
    if (size & 1u && std::memcmp(chunk.data(), "fmt ", 4) == 0) in.seekg(1, std::ios::cur);
  }

  if (format != kFormatPcm) {
    throw Error(ErrorKind::kUnsupportedFormat,
                where + ": format code " + std::to_string(format) + " (only PCM=1 is supported)");
  }
  if (out.info.bits_per_sample != 16) {
    throw Error(ErrorKind::kUnsupportedFormat,
                where + ": format code 1 with " + std::to_string(out.info.bits_per_sample) +
                    "-bit samples (only 16-bit is supported)");
  }
  if (out.info.channels < 1 || out.info.sample_rate <= 0 ||
      block_align != 2 * out.info.channels) {
    throw Error(ErrorKind::kFormat, where + ": inconsistent fmt fields");
  }
  out.info.n_samples = out.data_bytes / block_align;
  if (out.info.n_samples == 0) throw Error(ErrorKind::kFormat, where + ": empty data chunk");
  return out;
}

}  // namespace

std::string to_string(MachineType machine) {
  switch (machine) {
    case MachineType::kValve: return "valve";
    case MachineType::kPump: return "pump";
    case MachineType::kFan: return "fan";
    case MachineType::kSlideRail: return "slide_rail";
  }
  return "unknown";
}

std::string to_string(Label label) {
  return label == Label::kNormal ? "normal" : "anomalous";
}

bool try_parse_machine(const std::string& name, MachineType* out) {
  if (name == "valve") {
    *out = MachineType::kValve;
  } else if (name == "pump") {
    *out = MachineType::kPump;
  } else if (name == "fan") {
    *out = MachineType::kFan;
  } else if (name == "slide_rail" || name == "slider") {
    *out = MachineType::kSlideRail;
  } else {
    return false;
  }
  return true;
}

MachineType parse_machine(const std::string& name) {
  MachineType m{};
  if (!try_parse_machine(name, &m)) {
    throw Error(ErrorKind::kConfiguration, "unknown machine type '" + name + "'");
  }
  return m;
}

std::span<const float> AudioClip::channel(int index) const {
  if (index < 0 || index >= channels) {
    throw Error(ErrorKind::kBounds, "channel " + std::to_string(index) + " of " +
                                        std::to_string(channels));
  }
  return {samples.data() + static_cast<std::size_t>(index) * n_samples, n_samples};
}

WavInfo probe_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  ParsedHeader h = parse_header(in, path);
  return h.info;
}

AudioClip read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const ParsedHeader h = parse_header(in, path);

  const auto channels = static_cast<std::size_t>(h.info.channels);
  const std::size_t n = h.info.n_samples;
  std::vector<unsigned char> raw(n * channels * 2);
  in.seekg(static_cast<std::streamoff>(h.data_offset));
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw Error(ErrorKind::kFormat, path.string() + ": data chunk shorter than declared");
  }

  AudioClip clip;
  clip.channels = h.info.channels;
  clip.sample_rate = h.info.sample_rate;
  clip.n_samples = n;
  clip.source_path = path.string();
  clip.samples.resize(n * channels);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const auto v = static_cast<std::int16_t>(read_u16(&raw[2 * (t * channels + c)]));
      clip.samples[c * n + t] = static_cast<float>(v) / 32768.0f;
    }
  }
  return clip;
}

void write_wav(const fs::path& path, std::span<const float> samples, int sample_rate) {
  if (samples.empty()) throw Error(ErrorKind::kEmptyInput, "write_wav: no samples");
  if (sample_rate <= 0) throw Error(ErrorKind::kConfiguration, "write_wav: sample rate");
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  put_u32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  put_u32(buf, 16);
  put_u16(buf, kFormatPcm);
  put_u16(buf, 1);
  put_u32(buf, static_cast<std::uint32_t>(sample_rate));
  put_u32(buf, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(buf, 2);
  put_u16(buf, 16);
  buf += "data";
  put_u32(buf, data_bytes);
  for (float s : samples) {
    const double q = std::lround(static_cast<double>(s) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    put_u16(buf, static_cast<std::uint16_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
}

AudioClip select_channel(const AudioClip& clip, int index) {
  const std::span<const float> row = clip.channel(index);
  AudioClip mono;
  mono.channels = 1;
  mono.sample_rate = clip.sample_rate;
  mono.n_samples = clip.n_samples;
  mono.source_path = clip.source_path;
  mono.samples.assign(row.begin(), row.end());
  return mono;
}

std::map<CellKey, std::size_t> ClipIndex::counts() const {
  std::map<CellKey, std::size_t> out;
  for (const ClipEntry& e : entries) ++out[{e.machine, e.model_id, e.snr, e.label}];
  return out;
}

std::vector<ClipEntry> ClipIndex::select(MachineType machine, const std::string& model_id,
                                         const std::string& snr) const {
  std::vector<ClipEntry> out;
  for (const ClipEntry& e : entries) {
    if (e.machine == machine && e.model_id == model_id && e.snr == snr) out.push_back(e);
  }
  return out;
}

bool parse_snr_tag(const std::string& name, std::string* tag) {
  static const std::regex re(R"(^(-?\d+)_?dB.*$)");
  std::smatch m;
  if (!std::regex_match(name, m, re)) return false;
  *tag = std::to_string(std::stoi(m[1].str())) + "dB";
  return true;
}

ClipIndex scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::kEmptyInput, root.string() + " is not a directory");
  }
  auto sorted_dirs = [](const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  ClipIndex index;
  for (const fs::path& snr_dir : sorted_dirs(root)) {
    std::string snr;
    if (!parse_snr_tag(snr_dir.filename().string(), &snr)) {
      index.warnings.push_back("skipped non-SNR directory " + snr_dir.string());
      continue;
    }
    for (const fs::path& machine_dir : sorted_dirs(snr_dir)) {
      MachineType machine{};
      if (!try_parse_machine(machine_dir.filename().string(), &machine)) {
        index.warnings.push_back("skipped unknown machine directory " + machine_dir.string());
        continue;
      }
      for (const fs::path& id_dir : sorted_dirs(machine_dir)) {
        for (const fs::path& label_dir : sorted_dirs(id_dir)) {
          const std::string name = label_dir.filename().string();
          Label label{};
          if (name == "normal") {
            label = Label::kNormal;
          } else if (name == "abnormal") {
            label = Label::kAnomalous;
          } else {
            index.warnings.push_back("skipped unknown label directory " + label_dir.string());
            continue;
          }
          std::vector<fs::path> files;
          for (const auto& f : fs::directory_iterator(label_dir)) {
            if (f.is_regular_file() && f.path().extension() == ".wav") files.push_back(f.path());
          }
          std::sort(files.begin(), files.end());
          for (const fs::path& f : files) {
            try {
              probe_wav(f);
            } catch (const Error& e) {
              index.warnings.push_back(std::string("skipped unreadable file: ") + e.what());
              continue;
            }
            index.entries.push_back({f, machine, id_dir.filename().string(), snr, label});
          }
        }
      }
    }
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.path < b.path; });
  if (index.entries.empty()) {
    throw Error(ErrorKind::kEmptyInput, "no clips found under " + root.string());
  }
  return index;
}

std::string to_csv(const ClipIndex& index) {
  std::ostringstream out;
  out << "path,machine,model_id,snr,label\n";
  for (const ClipEntry& e : index.entries) {
    out << e.path.string() << ',' << to_string(e.machine) << ',' << e.model_id << ',' << e.snr
        << ',' << to_string(e.label) << '\n';
  }
  return out.str();
}

ClipIndex index_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "path,machine,model_id,snr,label") {
    throw Error(ErrorKind::kFormat, "clip index CSV: bad header");
  }
  ClipIndex index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 5) throw Error(ErrorKind::kFormat, "clip index CSV: bad row '" + line + "'");
    ClipEntry e;
    e.path = cols[0];
    e.machine = parse_machine(cols[1]);
    e.model_id = cols[2];
    e.snr = cols[3];
    if (cols[4] == "normal") {
      e.label = Label::kNormal;
    } else if (cols[4] == "anomalous") {
      e.label = Label::kAnomalous;
    } else {
      throw Error(ErrorKind::kFormat, "clip index CSV: bad label '" + cols[4] + "'");
    }
    index.entries.push_back(std::move(e));
  }
  return index;
}

}  // namespace aad
