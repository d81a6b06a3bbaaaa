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

#include "wavesense/losses.hpp"

#include <cmath>
#include <string>

#include "wavesense/error.hpp"
#include "wavesense/signal.hpp"

namespace wavesense {

PeakResult peak_logits(const OutputTrace& trace) {
  if (trace.classes() == 0 || trace.bins() == 0) {
    throw InvalidInput("peak_logits of an empty trace");
  }
  PeakResult out;
  for (std::size_t c = 0; c < trace.classes(); ++c) {
    const auto row = trace.values.row(c);
    std::size_t best = 0;
    for (std::size_t t = 1; t < row.size(); ++t) {
      if (row[t] > row[best]) best = t;
    }
    out.logits.push_back(row[best]);
    out.peak_times.push_back(best);
  }
  return out;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw InvalidInput("label " + std::to_string(label) + " out of range for " +
                       std::to_string(logits.size()) + " classes");
  }
  for (double z : logits) {
    if (!std::isfinite(z)) throw InvalidInput("cross_entropy logits must be finite");
  }
  // log-sum-exp form keeps confident predictions exact near zero loss.
  double top = logits[0];
  for (double z : logits) top = std::max(top, z);
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  return top + std::log(total) - logits[label];
}

std::uint64_t activity_excess(std::span<const SpikeRaster> rasters) {
  std::uint64_t excess = 0;
  for (const auto& r : rasters) {
    for (std::uint32_t n : r.counts.data()) {
      if (n >= 2) excess += n;
    }
  }
  return excess;
}

double activity_loss(std::uint64_t n_excess, std::size_t bins,
                     std::size_t n_neurons) {
  if (bins == 0 || n_neurons == 0) {
    throw InvalidParameter("activity_loss needs bins > 0 and neurons > 0");
  }
  const double ratio =
      static_cast<double>(n_excess) / (static_cast<double>(bins) * n_neurons);
  return ratio * ratio;
}

double total_loss(const OutputTrace& trace, std::size_t label,
                  std::span<const SpikeRaster> rasters, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidParameter("alpha must be >= 0");
  const PeakResult peaks = peak_logits(trace);
  const double ce = cross_entropy(peaks.logits, label);
  if (alpha == 0.0 || rasters.empty()) return ce;
  std::size_t neurons = 0;
  for (const auto& r : rasters) {
    if (r.bins() != trace.bins()) throw InvalidInput("raster length differs from trace");
    neurons += r.channels();
  }
  return ce + alpha * activity_loss(activity_excess(rasters), trace.bins(), neurons);
}

}  // namespace wavesense
