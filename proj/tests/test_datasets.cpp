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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "wavesense/datasets.hpp"
#include "wavesense/error.hpp"

namespace fs = std::filesystem;

namespace wavesense {
namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ws_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

void put16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-assembled RIFF/WAVE file.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::vector<std::int16_t>& samples) {
  std::string data;
  for (auto s : samples) put16(data, static_cast<std::uint16_t>(s));
  std::string b = "RIFF";
  put32(b, static_cast<std::uint32_t>(36 + data.size()));
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  b += "data";
  put32(b, static_cast<std::uint32_t>(data.size()));
  return b + data;
}

void write_bytes(const fs::path& p, const std::string& b) {
  std::ofstream(p, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(Manifest, EmptyFile) {
  TempDir d;
  write_text(d.path() / "m.tsv", "");
  const Manifest m = load_manifest(d.path() / "m.tsv");
  EXPECT_TRUE(m.entries.empty());
  EXPECT_TRUE(m.missing.empty());
}

TEST(Manifest, ThreeLines) {
  TempDir d;
  for (const char* f : {"a.wav", "b.wav", "c.wav"}) write_text(d.path() / f, "x");
  write_text(d.path() / "m.tsv",
             "# comment\na.wav\t0\ttrain\nb.wav\t1\tval\t1.5\nc.wav\t2\ttest\n");
  const Manifest m = load_manifest(d.path() / "m.tsv");
  ASSERT_EQ(m.entries.size(), 3u);
  EXPECT_EQ(m.entries[0].split, Split::kTrain);
  EXPECT_EQ(m.entries[1].split, Split::kVal);
  EXPECT_EQ(m.entries[2].split, Split::kTest);
  EXPECT_EQ(m.entries[1].label, 1u);
  EXPECT_DOUBLE_EQ(m.entries[1].duration, 1.5);
  EXPECT_EQ(m.entries[0].path, d.path() / "a.wav");
}

TEST(Manifest, BadLabelNamesLine) {
  TempDir d;
  write_text(d.path() / "m.tsv", "a.wav\t0\ttrain\nb.wav\tx\ttrain\n");
  const std::string msg = error_of([&] { load_manifest(d.path() / "m.tsv"); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'x'"), std::string::npos) << msg;
  EXPECT_THROW(load_manifest(d.path() / "m.tsv"), FormatError);
}

TEST(Manifest, UnknownSplitAndDisjointness) {
  TempDir d;
  write_text(d.path() / "m.tsv", "a.wav\t0\tdev\n");
  EXPECT_THROW(load_manifest(d.path() / "m.tsv"), FormatError);
  write_text(d.path() / "m2.tsv", "a.wav\t0\ttrain\na.wav\t0\ttest\n");
  EXPECT_THROW(load_manifest(d.path() / "m2.tsv"), FormatError);
}

TEST(Manifest, MissingFilesListed) {
  TempDir d;
  write_text(d.path() / "here.wav", "x");
  write_text(d.path() / "m.tsv", "here.wav\t0\ttrain\ngone.wav\t1\ttrain\n");
  const Manifest m = load_manifest(d.path() / "m.tsv");
  ASSERT_EQ(m.missing.size(), 1u);
  EXPECT_EQ(m.missing[0].filename(), "gone.wav");
}

TEST(Manifest, WriteReadRoundTrip) {
  TempDir d;
  fs::create_directories(d.path() / "sub");
  write_text(d.path() / "sub" / "a.wav", "x");
  std::vector<ManifestEntry> entries{{d.path() / "sub" / "a.wav", 3, Split::kVal, 2.0}};
  write_manifest(d.path() / "m.tsv", entries);
  std::ifstream in(d.path() / "m.tsv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("sub/a.wav\t3\tval", 0), 0u) << line;
  const Manifest m = load_manifest(d.path() / "m.tsv");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].path, entries[0].path);
  EXPECT_EQ(m.entries[0].label, 3u);
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_classes = 3;
  s.channels = 16;
  s.bins = 40;
  s.samples_per_class = 20;
  s.seed = 9;
  return s;
}

TEST(Synthetic, SplitsAndBalance) {
  const Dataset d = synth_keyword_dataset(small_spec());
  EXPECT_EQ(d.n_classes, 3u);
  EXPECT_EQ(d.train.size(), 48u);
  EXPECT_EQ(d.val.size(), 6u);
  EXPECT_EQ(d.test.size(), 6u);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    std::map<std::size_t, int> per;
    for (const auto& x : d.split(s)) {
      ++per[x.label];
      EXPECT_EQ(x.raster.channels(), 16u);
      EXPECT_EQ(x.raster.bins(), 40u);
    }
    int lo = 1 << 30, hi = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      lo = std::min(lo, per[k]);
      hi = std::max(hi, per[k]);
    }
    EXPECT_LE(hi - lo, 1);
  }
}

TEST(Synthetic, SeedDeterminism) {
  const Dataset a = synth_keyword_dataset(small_spec());
  const Dataset b = synth_keyword_dataset(small_spec());
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].raster, b.train[i].raster);
    EXPECT_EQ(a.train[i].label, b.train[i].label);
  }
  SyntheticSpec other = small_spec();
  other.seed = 10;
  EXPECT_NE(synth_keyword_dataset(other).train[0].raster, a.train[0].raster);
}

TEST(Synthetic, CleanSamplesMatchTheirTemplate) {
  SyntheticSpec s = small_spec();
  s.jitter = 0;
  s.noise_rate = 0.0;
  const auto templates = synth_templates(s);
  const Dataset d = synth_keyword_dataset(s);
  std::size_t correct = 0, total = 0;
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (const auto& x : d.split(sp)) {
      // Thinning only removes spikes from the template.
      for (std::size_t i = 0; i < x.raster.counts.size(); ++i) {
        ASSERT_LE(x.raster.counts.data()[i], templates[x.label].counts.data()[i]);
      }
      // Nearest template by count overlap minus spikes outside the template.
      double best = -1e300;
      std::size_t pick = 0;
      for (std::size_t k = 0; k < templates.size(); ++k) {
        double score = 0;
        for (std::size_t i = 0; i < x.raster.counts.size(); ++i) {
          const double a = x.raster.counts.data()[i], t = templates[k].counts.data()[i];
          score += std::min(a, t) - (t == 0 ? a : 0.0);
        }
        if (score > best) {
          best = score;
          pick = k;
        }
      }
      correct += pick == x.label;
      ++total;
    }
  }
  EXPECT_EQ(correct, total);
}

TEST(Synthetic, DefaultTemplatesAreSeparated) {
  SyntheticSpec s;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    s.seed = seed;
    const auto t = synth_templates(s);
    ASSERT_EQ(t.size(), s.n_classes);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_GT(t[i].total(), 0u);
      for (std::size_t j = i + 1; j < t.size(); ++j) {
        // Independent count of the symmetric difference over the union.
        std::size_t uni = 0, diff = 0;
        for (std::size_t c = 0; c < t[i].counts.size(); ++c) {
          const bool a = t[i].counts.data()[c] > 0, b = t[j].counts.data()[c] > 0;
          uni += a || b;
          diff += a != b;
        }
        const double frac = static_cast<double>(diff) / static_cast<double>(uni);
        EXPECT_DOUBLE_EQ(template_difference(t[i], t[j]), frac);
        EXPECT_GE(frac, 0.3);
      }
    }
  }
}

TEST(Synthetic, SpecValidation) {
  SyntheticSpec s;
  s.density = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.density = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.n_classes = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.keep_probability = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.noise_rate = -0.1;
  EXPECT_THROW(s.validate(), ConfigError);
  // Unreachable separation makes template drawing give up.
  s = {};
  s.channels = 1;
  s.bins = 1;
  s.density = 0.5;
  s.min_template_difference = 0.99;
  EXPECT_THROW(synth_templates(s), ConfigError);
}

TEST(Synthetic, SpecFromKeyValues) {
  const auto s = SyntheticSpec::from(KeyValueConfig::parse("n_classes = 5\ndensity = 0.3\nseed = 4\n"));
  EXPECT_EQ(s.n_classes, 5u);
  EXPECT_DOUBLE_EQ(s.density, 0.3);
  EXPECT_EQ(s.seed, 4u);
  EXPECT_EQ(s.channels, 64u);
}

TEST(DatasetIo, SaveLoadRoundTrip) {
  TempDir d;
  const Dataset data = synth_keyword_dataset(small_spec());
  save_dataset(d.path() / "ds", data);
  EXPECT_TRUE(fs::exists(d.path() / "ds" / kManifestName));
  const Dataset back = load_dataset(d.path() / "ds");
  EXPECT_EQ(back.n_classes, data.n_classes);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    ASSERT_EQ(back.split(s).size(), data.split(s).size());
    for (std::size_t i = 0; i < data.split(s).size(); ++i) {
      EXPECT_EQ(back.split(s)[i].raster, data.split(s)[i].raster);
      EXPECT_EQ(back.split(s)[i].label, data.split(s)[i].label);
    }
  }
}

TEST(Wav, SilenceAndScaling) {
  TempDir d;
  write_bytes(d.path() / "s.wav", wav_bytes(1, 1, 16000, 16, std::vector<std::int16_t>(16000, 0)));
  const Waveform w = read_wav(d.path() / "s.wav");
  ASSERT_EQ(w.samples.size(), 16000u);
  for (double v : w.samples) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(w.sample_rate, 16000.0);

  write_bytes(d.path() / "x.wav", wav_bytes(1, 1, 16000, 16, {-32768, 16384, 32767}));
  const Waveform x = read_wav(d.path() / "x.wav");
  EXPECT_DOUBLE_EQ(x.samples[0], -1.0);
  EXPECT_DOUBLE_EQ(x.samples[1], 0.5);
  EXPECT_DOUBLE_EQ(x.samples[2], 32767.0 / 32768.0);
}

TEST(Wav, RejectsOtherFormats) {
  TempDir d;
  write_bytes(d.path() / "st.wav", wav_bytes(1, 2, 16000, 16, {0, 0, 0, 0}));
  EXPECT_NE(error_of([&] { read_wav(d.path() / "st.wav"); }).find("mono required"),
            std::string::npos);
  write_bytes(d.path() / "r.wav", wav_bytes(1, 1, 44100, 16, {0, 0}));
  EXPECT_NE(error_of([&] { read_wav(d.path() / "r.wav"); }).find("16000"), std::string::npos);
  write_bytes(d.path() / "f.wav", wav_bytes(3, 1, 16000, 16, {0, 0}));
  EXPECT_NE(error_of([&] { read_wav(d.path() / "f.wav"); }).find("codec"), std::string::npos);
  write_bytes(d.path() / "b.wav", wav_bytes(1, 1, 16000, 8, {0}));
  EXPECT_NE(error_of([&] { read_wav(d.path() / "b.wav"); }).find("16-bit"), std::string::npos);
  write_bytes(d.path() / "junk.wav", "not a wav file at all");
  EXPECT_THROW(read_wav(d.path() / "junk.wav"), FormatError);
}

TEST(Wav, WriteReadRoundTrip) {
  TempDir d;
  Waveform w{{0.0, 0.25, -0.5, 0.999}};
  write_wav(d.path() / "w.wav", w);
  const Waveform back = read_wav(d.path() / "w.wav");
  ASSERT_EQ(back.samples.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32768);
}

TEST(NoisePool, ScanAndPick) {
  TempDir d;
  fs::create_directories(d.path() / "a" / "b");
  write_wav(d.path() / "n1.wav", Waveform{{0.1, 0.1}});
  write_wav(d.path() / "a" / "b" / "n2.wav", Waveform{{0.2, 0.2, 0.2}});
  write_text(d.path() / "readme.txt", "ignored");
  const NoisePool pool = NoisePool::scan(d.path());
  EXPECT_EQ(pool.size(), 2u);
  std::mt19937_64 rng(1);
  std::set<std::size_t> lengths;
  for (int i = 0; i < 50; ++i) lengths.insert(pool.pick(rng).samples.size());
  EXPECT_EQ(lengths, (std::set<std::size_t>{2, 3}));
  EXPECT_TRUE(NoisePool::scan(d.path() / "a" / "b").size() == 1);
}

}  // namespace
}  // namespace wavesense
