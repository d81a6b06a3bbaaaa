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

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wavesense/raster.hpp"
#include "wavesense/tensor.hpp"

namespace wavesense {

// Time constants are in bins. theta may be +infinity to disable spiking.
struct NeuronParams {
  double tau_s = 2.0;
  double tau_v = 2.0;
  double theta = 1.0;

  void validate() const;
};

template <typename Real>
struct LayerState {
  std::vector<Real> i_s;  // synaptic current
  std::vector<Real> v;    // membrane potential

  LayerState() = default;
  explicit LayerState(std::size_t width) : i_s(width, Real{0}), v(width, Real{0}) {}
  std::size_t width() const { return v.size(); }
};

// Multi-spike rule: floor(v / theta) spikes when v >= theta, else none. The
// count is corrected so that v - N * theta lands in [0, theta) despite
// rounding in the division.
template <typename Real>
std::uint32_t spike_count(Real v, Real theta) {
  if (!(v >= theta)) return 0;
  Real n = std::floor(v / theta);
  if (v - n * theta < Real{0}) n -= Real{1};
  if (v - n * theta >= theta) n += Real{1};
  return static_cast<std::uint32_t>(n);
}

// One bin of the stateful LIF neuron: synaptic decay and injection, then
// membrane decay and integration, then spiking with subtractive reset.
template <typename Real>
std::pair<LayerState<Real>, std::vector<std::uint32_t>> lif_step(
    LayerState<Real> state, const NeuronParams& params,
    std::span<const Real> weighted_input);

// Runs lif_step over every bin of `input` with weighted_input = W * counts,
// accumulating in double.
// When `membrane` is non-null it receives the pre-spike potential as
// [neurons x bins].
template <typename Real>
SpikeRaster simulate_layer_stateful(const Tensor2<Real>& weights,
                                    const NeuronParams& params,
                                    const SpikeRaster& input,
                                    Tensor2<Real>* membrane = nullptr);

// Spike-response formulation: membrane = PSP-filtered weighted input plus the
// refractory kernel -theta * exp(-t / tau_v) applied to the neuron's own
// output. Both kernels are evaluated as exponential recursions, bin by bin.
template <typename Real>
SpikeRaster simulate_layer_srm(const Tensor2<Real>& weights,
                               const NeuronParams& params,
                               const SpikeRaster& input,
                               Tensor2<Real>* membrane = nullptr);

}  // namespace wavesense
