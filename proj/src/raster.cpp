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

#include "wavesense/raster.hpp"

#include <fstream>
#include <limits>
#include <numeric>

#include "byteio.hpp"
#include "wavesense/error.hpp"

namespace wavesense {
namespace {

constexpr char kMagic[] = "WSRAS1";
constexpr std::size_t kMagicSize = 6;

}  // namespace

std::uint64_t SpikeRaster::total() const {
  return std::accumulate(counts.data().begin(), counts.data().end(),
                         std::uint64_t{0});
}

void write_raster(std::ostream& out, const SpikeRaster& raster) {
  if (raster.channels() > std::numeric_limits<std::uint32_t>::max() ||
      raster.bins() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInput("raster dimensions exceed the u32 range");
  }
  std::string buf(kMagic, kMagicSize);
  byteio::put(buf, static_cast<std::uint32_t>(raster.channels()));
  byteio::put(buf, static_cast<std::uint32_t>(raster.bins()));
  byteio::put(buf, raster.dt);
  buf.reserve(buf.size() + 2 * raster.counts.size());
  for (std::uint32_t c : raster.counts.data()) {
    if (c > std::numeric_limits<std::uint16_t>::max()) {
      throw InvalidInput("spike count exceeds the u16 range of the format");
    }
    byteio::put(buf, static_cast<std::uint16_t>(c));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed to write raster");
}

SpikeRaster read_raster(std::istream& in) {
  const std::string bytes = byteio::slurp(in);
  byteio::Reader reader(bytes.data(), bytes.size());
  if (reader.remaining() < kMagicSize ||
      reader.bytes(kMagicSize) != std::string(kMagic, kMagicSize)) {
    throw FormatError("not a WSRAS1 raster");
  }
  const auto channels = reader.get<std::uint32_t>();
  const auto bins = reader.get<std::uint32_t>();
  const auto dt = reader.get<float>();
  if (!(dt > 0.0f)) throw FormatError("raster bin width must be positive");
  const std::uint64_t cells = std::uint64_t{channels} * bins;
  if (reader.remaining() != 2 * cells) {
    throw FormatError("raster payload size does not match its header");
  }
  SpikeRaster raster(channels, bins, dt);
  for (auto& c : raster.counts.data()) c = reader.get<std::uint16_t>();
  return raster;
}

void save_raster(const std::filesystem::path& path, const SpikeRaster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_raster(out, raster);
}

SpikeRaster load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open raster " + path.string());
  try {
    return read_raster(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace wavesense
