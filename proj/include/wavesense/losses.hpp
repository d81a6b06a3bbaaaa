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
#include <span>
#include <vector>

#include "wavesense/network.hpp"
#include "wavesense/raster.hpp"

namespace wavesense {

// Weight of the activity term in the total loss.
inline constexpr double kDefaultActivityWeight = 0.01;

struct PeakResult {
  std::vector<double> logits;           // max over bins, per class
  std::vector<std::size_t> peak_times;  // first bin attaining the max
};

PeakResult peak_logits(const OutputTrace& trace);

// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, std::size_t label);

// Sum over layers, neurons and bins of N * H(N - 1) with H(0) = 0: a bin
// with a single spike is free, a bin with N >= 2 spikes contributes N.
std::uint64_t activity_excess(std::span<const SpikeRaster> rasters);

// (n_excess / (bins * n_neurons))^2.
double activity_loss(std::uint64_t n_excess, std::size_t bins, std::size_t n_neurons);

double total_loss(const OutputTrace& trace, std::size_t label,
                  std::span<const SpikeRaster> rasters,
                  double alpha = kDefaultActivityWeight);

}  // namespace wavesense
