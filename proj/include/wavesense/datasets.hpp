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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wavesense/config.hpp"
#include "wavesense/frontend.hpp"
#include "wavesense/raster.hpp"

namespace wavesense {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& text);  // throws FormatError

// One manifest line: `path <TAB> label <TAB> split [<TAB> duration]`.
struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest directory
  std::size_t label = 0;
  Split split = Split::kTrain;
  double duration = 0.0;  // seconds; 0 when unknown
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::filesystem::path> missing;  // listed but not on disk
};

// Parses a manifest. Errors name the offending line; a path listed under
// two different splits is rejected.
Manifest load_manifest(const std::filesystem::path& path);
// Writes paths relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);

struct LabeledRaster {
  SpikeRaster raster;
  std::size_t label = 0;
};

struct Dataset {
  std::size_t n_classes = 0;
  std::vector<LabeledRaster> train, val, test;

  const std::vector<LabeledRaster>& split(Split s) const;
  std::vector<LabeledRaster>& split(Split s);
};

// Conventional file name of a raster dataset's manifest inside its directory.
inline constexpr const char* kManifestName = "manifest.tsv";

// Writes <dir>/<split>/NNNNN.wsras plus <dir>/manifest.tsv.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
// Loads every raster listed in <dir>/manifest.tsv.
Dataset load_dataset(const std::filesystem::path& dir);

struct SyntheticSpec {
  std::size_t n_classes = 4;
  std::size_t channels = 64;
  std::size_t bins = 100;
  double density = 0.2;            // fraction of template cells that spike
  std::size_t jitter = 1;          // max shift of a template spike, in bins
  double noise_rate = 0.02;        // background spikes per cell (Poisson)
  double keep_probability = 0.9;   // thinning of template spikes
  std::size_t samples_per_class = 100;
  double min_template_difference = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
  static SyntheticSpec from(const KeyValueConfig& kv);
};

// Per-class spike templates of a synthetic dataset; cells hold counts.
std::vector<SpikeRaster> synth_templates(const SyntheticSpec& spec);

// One jittered, thinned copy of `tmpl` over Poisson background.
SpikeRaster synth_sample(const SpikeRaster& tmpl, const SyntheticSpec& spec,
                         std::mt19937_64& rng);

// Jittered, thinned copies of class templates over Poisson background,
// split 80/10/10 per class. Fully determined by spec.seed.
Dataset synth_keyword_dataset(const SyntheticSpec& spec);

// Fraction of active cells in which two templates differ:
// |A xor B| / |A or B| over cells with non-zero count.
double template_difference(const SpikeRaster& a, const SpikeRaster& b);

// 16-bit PCM mono 16 kHz WAV only.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w);

// WAV files used as additive background noise.
class NoisePool {
 public:
  static NoisePool scan(const std::filesystem::path& dir);

  std::size_t size() const { return files_.size(); }
  bool empty() const { return files_.empty(); }
  // Uniformly chosen clip.
  Waveform pick(std::mt19937_64& rng) const;

 private:
  std::vector<std::filesystem::path> files_;
};

}  // namespace wavesense
