/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wavesense/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "byteio.hpp"
#include "wavesense/error.hpp"

namespace fs = std::filesystem;

namespace wavesense {

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw FormatError("unknown split '" + text + "' (expected train, val or test)");
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read manifest " + path.string());
  const fs::path base = path.parent_path();
  Manifest manifest;
  std::map<std::string, Split> seen;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4) {
      fail("expected path<TAB>label<TAB>split[<TAB>duration]");
    }
    ManifestEntry e;
    e.path = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
    const std::string& label = fields[1];
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (label.empty() || ec != std::errc() || ptr != label.data() + label.size()) {
      fail("bad label '" + label + "'");
    }
    e.label = value;
    try {
      e.split = parse_split(fields[2]);
    } catch (const FormatError& err) {
      fail(err.what());
    }
    if (fields.size() == 4) {
      try {
        e.duration = std::stod(fields[3]);
      } catch (const std::exception&) {
        fail("bad duration '" + fields[3] + "'");
      }
    }
    const std::string key = e.path.lexically_normal().string();
    if (auto it = seen.find(key); it != seen.end() && it->second != e.split) {
      fail("path " + fields[0] + " appears in both " + split_name(it->second) +
           " and " + split_name(e.split));
    }
    seen.emplace(key, e.split);
    if (!fs::exists(e.path)) manifest.missing.push_back(e.path);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest " + path.string());
  const fs::path base = path.parent_path();
  for (const auto& e : entries) {
    fs::path p = e.path;
    if (!base.empty()) {
      const fs::path rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out << p.generic_string() << '\t' << e.label << '\t' << split_name(e.split);
    if (e.duration > 0.0) out << '\t' << e.duration;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Raster datasets

const std::vector<LabeledRaster>& Dataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

std::vector<LabeledRaster>& Dataset::split(Split s) {
  return const_cast<std::vector<LabeledRaster>&>(std::as_const(*this).split(s));
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto& items = data.split(s);
    if (items.empty()) continue;
    const fs::path sub = dir / split_name(s);
    fs::create_directories(sub);
    for (std::size_t i = 0; i < items.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "%05zu.wsras", i);
      save_raster(sub / name, items[i].raster);
      entries.push_back({sub / name, items[i].label, s,
                         items[i].raster.bins() * static_cast<double>(items[i].raster.dt)});
    }
  }
  write_manifest(dir / kManifestName, entries);
}

Dataset load_dataset(const fs::path& dir) {
  const Manifest manifest = load_manifest(dir / kManifestName);
  if (!manifest.missing.empty()) {
    throw FormatError("dataset file missing: " + manifest.missing.front().string());
  }
  Dataset data;
  for (const auto& e : manifest.entries) {
    data.split(e.split).push_back({load_raster(e.path), e.label});
    data.n_classes = std::max(data.n_classes, e.label + 1);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Synthetic keyword data

void SyntheticSpec::validate() const {
  if (n_classes < 1 || channels < 1 || bins < 1) {
    throw ConfigError("synthetic spec needs classes, channels and bins >= 1");
  }
  if (!(density > 0.0 && density < 1.0)) throw ConfigError("density must lie in (0, 1)");
  if (!(noise_rate >= 0.0)) throw ConfigError("noise_rate must be >= 0");
  if (!(keep_probability > 0.0 && keep_probability <= 1.0)) {
    throw ConfigError("keep_probability must lie in (0, 1]");
  }
  if (samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
}

SyntheticSpec SyntheticSpec::from(const KeyValueConfig& kv) {
  SyntheticSpec s;
  auto count = [&](const char* key, std::size_t& field) {
    if (auto v = kv.get_int(key)) {
      if (*v < 0) throw ConfigError(std::string(key) + " must be non-negative");
      field = static_cast<std::size_t>(*v);
    }
  };
  count("n_classes", s.n_classes);
  count("channels", s.channels);
  count("bins", s.bins);
  count("jitter", s.jitter);
  count("samples_per_class", s.samples_per_class);
  if (auto v = kv.get_double("density")) s.density = *v;
  if (auto v = kv.get_double("noise_rate")) s.noise_rate = *v;
  if (auto v = kv.get_double("keep_probability")) s.keep_probability = *v;
  if (auto v = kv.get_double("min_template_difference")) s.min_template_difference = *v;
  if (auto v = kv.get_int("seed")) s.seed = static_cast<std::uint64_t>(*v);
  s.validate();
  return s;
}

double template_difference(const SpikeRaster& a, const SpikeRaster& b) {
  if (a.channels() != b.channels() || a.bins() != b.bins()) {
    throw InvalidInput("templates differ in shape");
  }
  std::size_t either = 0, differ = 0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const bool x = a.counts.data()[i] > 0;
    const bool y = b.counts.data()[i] > 0;
    either += (x || y);
    differ += (x != y);
  }
  return either == 0 ? 0.0 : static_cast<double>(differ) / either;
}

namespace {

std::vector<SpikeRaster> draw_templates(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::bernoulli_distribution active(spec.density);
  std::vector<SpikeRaster> templates;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw ConfigError("could not draw sufficiently distinct class templates");
      }
      SpikeRaster t(spec.channels, spec.bins);
      for (auto& cell : t.counts.data()) cell = active(rng) ? 1 : 0;
      if (t.total() == 0) continue;
      bool distinct = true;
      for (const auto& other : templates) {
        distinct = distinct && template_difference(t, other) >= spec.min_template_difference;
      }
      if (distinct) {
        templates.push_back(std::move(t));
        break;
      }
    }
  }
  return templates;
}

}  // namespace

SpikeRaster synth_sample(const SpikeRaster& tmpl, const SyntheticSpec& spec,
                         std::mt19937_64& rng) {
  std::bernoulli_distribution keep(spec.keep_probability);
  std::uniform_int_distribution<long> shift(-static_cast<long>(spec.jitter),
                                            static_cast<long>(spec.jitter));
  std::poisson_distribution<std::uint32_t> noise(spec.noise_rate > 0 ? spec.noise_rate : 1.0);
  SpikeRaster s(spec.channels, spec.bins);
  const long last = static_cast<long>(spec.bins) - 1;
  for (std::size_t c = 0; c < spec.channels; ++c) {
    for (std::size_t t = 0; t < spec.bins; ++t) {
      for (std::uint32_t k = 0; k < tmpl.at(c, t); ++k) {
        if (!keep(rng)) continue;
        const long moved = std::clamp(static_cast<long>(t) + shift(rng), 0L, last);
        ++s.at(c, static_cast<std::size_t>(moved));
      }
    }
  }
  if (spec.noise_rate > 0) {
    for (auto& cell : s.counts.data()) cell += noise(rng);
  }
  return s;
}

std::vector<SpikeRaster> synth_templates(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  return draw_templates(spec, rng);
}

Dataset synth_keyword_dataset(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto templates = draw_templates(spec, rng);
  const std::size_t n = spec.samples_per_class;
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * n));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.1 * n)));
  Dataset data;
  data.n_classes = spec.n_classes;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      LabeledRaster item{synth_sample(templates[c], spec, rng), c};
      const Split s = i < n_train ? Split::kTrain
                    : i < n_train + n_val ? Split::kVal
                                          : Split::kTest;
      data.split(s).push_back(std::move(item));
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kPcm = 1;

}  // namespace

Waveform read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string bytes = byteio::slurp(in);
  byteio::Reader r(bytes.data(), bytes.size());
  auto fail = [&](const std::string& why) -> Waveform {
    throw FormatError(path.string() + ": " + why);
  };
  try {
    if (r.bytes(4) != "RIFF") return fail("not a RIFF file");
    r.get<std::uint32_t>();
    if (r.bytes(4) != "WAVE") return fail("not a WAVE file");
    bool have_fmt = false;
    std::uint16_t channels = 0, bits = 0;
    std::uint32_t rate = 0;
    while (r.remaining() >= 8) {
      const std::string id = r.bytes(4);
      const auto size = r.get<std::uint32_t>();
      if (size > r.remaining()) return fail("chunk '" + id + "' overruns the file");
      if (id == "fmt ") {
        if (size < 16) return fail("short fmt chunk");
        const auto format = r.get<std::uint16_t>();
        channels = r.get<std::uint16_t>();
        rate = r.get<std::uint32_t>();
        r.get<std::uint32_t>();  // byte rate
        r.get<std::uint16_t>();  // block align
        bits = r.get<std::uint16_t>();
        r.bytes(size - 16);
        if (format != kPcm) {
          return fail("unsupported codec " + std::to_string(format) + " (PCM required)");
        }
        if (channels != 1) {
          return fail("mono required, file has " + std::to_string(channels) + " channels");
        }
        if (bits != 16) return fail("16-bit samples required, got " + std::to_string(bits));
        if (rate != static_cast<std::uint32_t>(kSampleRate)) {
          return fail("16000 Hz required, got " + std::to_string(rate) + " Hz");
        }
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) return fail("data chunk before fmt chunk");
        Waveform w;
        w.sample_rate = rate;
        w.samples.resize(size / 2);
        for (auto& s : w.samples) s = r.get<std::int16_t>() / 32768.0;
        return w;
      } else {
        r.bytes(size);
      }
      if (size % 2 == 1 && r.remaining() > 0) r.bytes(1);
    }
  } catch (const FormatError& e) {
    if (std::string(e.what()).rfind(path.string(), 0) == 0) throw;
    return fail(e.what());
  }
  return fail("no data chunk");
}

void write_wav(const fs::path& path, const Waveform& w) {
  std::string buf = "RIFF";
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  byteio::put(buf, static_cast<std::uint32_t>(36 + data_bytes));
  buf += "WAVEfmt ";
  byteio::put(buf, std::uint32_t{16});
  byteio::put(buf, kPcm);
  byteio::put(buf, std::uint16_t{1});
  const auto rate = static_cast<std::uint32_t>(w.sample_rate);
  byteio::put(buf, rate);
  byteio::put(buf, rate * 2);
  byteio::put(buf, std::uint16_t{2});
  byteio::put(buf, std::uint16_t{16});
  buf += "data";
  byteio::put(buf, data_bytes);
  for (double s : w.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    byteio::put(buf, static_cast<std::int16_t>(scaled));
  }
  std::ofstream out(path, std::ios::binary);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("cannot write " + path.string());
}

NoisePool NoisePool::scan(const fs::path& dir) {
  NoisePool pool;
  if (!fs::is_directory(dir)) throw FormatError("noise directory not found: " + dir.string());
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      pool.files_.push_back(entry.path());
    }
  }
  std::sort(pool.files_.begin(), pool.files_.end());
  return pool;
}

Waveform NoisePool::pick(std::mt19937_64& rng) const {
  if (files_.empty()) throw MixingError("noise pool is empty");
  std::uniform_int_distribution<std::size_t> which(0, files_.size() - 1);
  return read_wav(files_[which(rng)]);
}

}  // namespace wavesense
