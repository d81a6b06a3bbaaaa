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
#include <limits>
#include <vector>

#include "wavesense/datasets.hpp"
#include "wavesense/network.hpp"

namespace wavesense {

inline constexpr double kDefaultLockoutSeconds = 1.0;
inline constexpr double kDefaultMatchWindowSeconds = 0.75;

struct Detection {
  std::size_t cls = 0;
  double time = 0.0;   // seconds, start of the crossing bin
  double value = 0.0;  // trace value at the crossing
  bool operator==(const Detection&) const = default;
};

struct StreamLabel {
  std::size_t cls = 0;
  double start = 0.0;  // seconds
  double end = 0.0;
  bool operator==(const StreamLabel&) const = default;
};

// Argmax of per-class peak values; ties go to the lowest class index.
std::size_t classify_trace(const OutputTrace& trace);
std::size_t classify_clip(const Network<float>& net, const SpikeRaster& raster);

// Readout trace of a raster evaluated bin by bin with carried state.
OutputTrace stream_trace(const Network<float>& net, const SpikeRaster& stream);

// Upward crossings of `threshold` (the bin before the first counts as below),
// dropping any crossing that follows an accepted detection of the same
// class by less than `lockout` seconds.
std::vector<Detection> detect_on_trace(const OutputTrace& trace, double threshold,
                                       double lockout = kDefaultLockoutSeconds);
std::vector<Detection> stream_detect(const Network<float>& net, const SpikeRaster& stream,
                                     double threshold,
                                     double lockout = kDefaultLockoutSeconds);

struct DetectionMetrics {
  double frr = 0.0;
  double faph = 0.0;
  std::size_t keywords = 0;
  std::size_t hits = 0;
  std::size_t false_alarms = 0;
};

// A keyword is hit by a same-class detection inside
// [start - match_window, end + match_window]; a detection inside no such
// window of its class is a false alarm.
DetectionMetrics compute_frr_faph(const std::vector<Detection>& detections,
                                  const std::vector<StreamLabel>& labels,
                                  double stream_hours,
                                  double match_window = kDefaultMatchWindowSeconds);

struct SweepPoint {
  double threshold = 0.0;
  DetectionMetrics metrics;
};

struct SweepResult {
  double threshold = 0.0;
  DetectionMetrics metrics;
  bool met_target = false;  // false: metrics are those of the strictest threshold
  std::vector<SweepPoint> table;  // descending thresholds
};

// Evenly spaced descending grid spanning the trace's range.
std::vector<double> threshold_grid(const OutputTrace& trace, std::size_t points = 101);

// Lowest FRR among thresholds whose FAPH <= target_faph; among equal FRRs
// the higher threshold wins.
SweepResult threshold_sweep(const OutputTrace& trace, const std::vector<StreamLabel>& labels,
                            double target_faph, const std::vector<double>& grid,
                            double lockout = kDefaultLockoutSeconds,
                            double match_window = kDefaultMatchWindowSeconds);
SweepResult threshold_sweep(const Network<float>& net, const SpikeRaster& stream,
                            const std::vector<StreamLabel>& labels, double target_faph = 0.5,
                            double lockout = kDefaultLockoutSeconds,
                            double match_window = kDefaultMatchWindowSeconds);

// Tab-separated `class start end` lines; `#` comments allowed.
std::vector<StreamLabel> read_stream_labels(const std::filesystem::path& path);
void write_stream_labels(const std::filesystem::path& path,
                         const std::vector<StreamLabel>& labels);

struct SyntheticStream {
  SpikeRaster raster;
  std::vector<StreamLabel> labels;
};

// Keyword samples drawn from the generator's class templates, separated by
// `gap_bins` of background noise.
SyntheticStream synth_stream(const SyntheticSpec& spec, std::size_t keywords,
                             std::size_t gap_bins, std::uint64_t seed);

struct ClassAccuracy {
  std::size_t cls = 0, total = 0, correct = 0;
};
struct AccuracyReport {
  std::size_t total = 0, correct = 0;
  std::vector<ClassAccuracy> per_class;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};
AccuracyReport evaluate_accuracy(const Network<float>& net,
                                 const std::vector<LabeledRaster>& data,
                                 std::size_t threads = 1);

}  // namespace wavesense
