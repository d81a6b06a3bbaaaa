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

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "wavesense/signal.hpp"
#include "wavesense/tensor.hpp"

namespace wavesense {

// [channels x bins] matrix of spike counts; several spikes per bin allowed.
struct SpikeRaster {
  Tensor2<std::uint32_t> counts;
  float dt = static_cast<float>(kDefaultBinSeconds);  // seconds, as stored

  SpikeRaster() = default;
  SpikeRaster(std::size_t channels, std::size_t bins,
              float bin_seconds = static_cast<float>(kDefaultBinSeconds))
      : counts(channels, bins, 0), dt(bin_seconds) {}

  std::size_t channels() const { return counts.rows(); }
  std::size_t bins() const { return counts.cols(); }
  std::uint32_t& at(std::size_t channel, std::size_t bin) {
    return counts(channel, bin);
  }
  std::uint32_t at(std::size_t channel, std::size_t bin) const {
    return counts(channel, bin);
  }
  std::uint64_t total() const;

  bool operator==(const SpikeRaster&) const = default;
};

// "WSRAS1" container: magic, u32 channels, u32 bins, f32 dt seconds, then
// channels x bins u16 counts row-major. Little-endian throughout.
void write_raster(std::ostream& out, const SpikeRaster& raster);
SpikeRaster read_raster(std::istream& in);
void save_raster(const std::filesystem::path& path, const SpikeRaster& raster);
SpikeRaster load_raster(const std::filesystem::path& path);

}  // namespace wavesense
