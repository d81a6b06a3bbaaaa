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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wavesense {

// Plain-text key/value settings. One `key = value` (or `key: value`, or
// `key value`) per line; `#` starts a comment; lists use `[a, b, c]`.
// Typed getters record which keys were read so leftovers can be reported.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  // `key=value` override; replaces an existing entry.
  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& assignment);

  bool contains(const std::string& key) const;
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_list(const std::string& key) const;

  // Keys present in the file that no getter has asked for.
  std::vector<std::string> unconsumed() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> consumed_;
};

// Throws ConfigError naming every key in `config` that was never read.
void reject_unknown_keys(const KeyValueConfig& config);

std::string format_list(const std::vector<std::size_t>& values);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace wavesense
