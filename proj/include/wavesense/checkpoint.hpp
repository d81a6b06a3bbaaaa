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

// "WSCKPT1" container:
//   magic, u32 version, u64 config hash,
//   records of (u32 name length, name, u32 rank, u32 dims[rank], f32 data),
//   u32 CRC-32 of everything before it. Little-endian throughout.
//
// Record names: "param/<name>", "adam.m/<name>", "adam.v/<name>",
// "meta/config" and "meta/train_config" (text, one byte per f32),
// "meta/state" (adam step, epoch, step in epoch, seed as u16 chunks).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "wavesense/network.hpp"
#include "wavesense/trainer.hpp"

namespace wavesense {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  WaveSenseConfig config;
  std::optional<TrainConfig> train;
  ParameterSet<float> params;
  Adam<float> optimizer;  // moments and step count; empty when absent
  TrainingState state;

  // Network carrying the stored parameters.
  Network<float> network() const;
  // Trainer positioned where the checkpoint left off.
  Trainer trainer() const;
};

Checkpoint make_checkpoint(const Network<float>& net);
Checkpoint make_checkpoint(const Trainer& trainer);

std::string encode_checkpoint(const Checkpoint& ckpt);
// Throws ChecksumError on a corrupt or truncated buffer, IncompatibleCheckpoint
// on a version mismatch, FormatError on a malformed one.
Checkpoint decode_checkpoint(const std::string& bytes);

// Writes atomically (temporary file, then rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// As above; throws IncompatibleCheckpoint unless the stored hash matches.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash);

std::uint32_t crc32(const std::string& bytes);

}  // namespace wavesense
