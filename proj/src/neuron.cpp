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

#include "wavesense/neuron.hpp"

#include <string>

#include "wavesense/error.hpp"
#include "wavesense/signal.hpp"

namespace wavesense {
namespace {

template <typename Real>
void check_finite(std::span<const Real> values) {
  for (Real x : values) {
    if (std::isnan(x)) throw SimulationDiverged("NaN in neuron state");
  }
}

void check_shapes(std::size_t weight_cols, const SpikeRaster& input) {
  if (weight_cols != input.channels()) {
    throw InvalidInput("weight matrix expects " + std::to_string(weight_cols) +
                       " inputs, raster has " +
                       std::to_string(input.channels()) + " channels");
  }
}

template <typename Real>
void gather_bin(const SpikeRaster& input, std::size_t t,
                std::vector<Real>& counts) {
  for (std::size_t c = 0; c < input.channels(); ++c) {
    counts[c] = static_cast<Real>(input.at(c, t));
  }
}

// In-place LIF update shared by lif_step and the layer simulation.
template <typename Real>
void lif_update(LayerState<Real>& state, Real syn_decay, Real mem_decay,
                Real theta, std::span<const Real> drive,
                std::span<std::uint32_t> spikes, std::span<Real> pre_spike) {
  for (std::size_t n = 0; n < state.width(); ++n) {
    state.i_s[n] = syn_decay * state.i_s[n] + drive[n];
    state.v[n] = mem_decay * state.v[n] + state.i_s[n];
    if (!pre_spike.empty()) pre_spike[n] = state.v[n];
    const std::uint32_t count = spike_count(state.v[n], theta);
    spikes[n] = count;
    if (count > 0) state.v[n] -= static_cast<Real>(count) * theta;
  }
}

// Layer simulations carry their state in double whatever the weight type.
template <typename Real>
Tensor2<double> widen(const Tensor2<Real>& w) {
  Tensor2<double> out(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.size(); ++i) out.data()[i] = static_cast<double>(w.data()[i]);
  return out;
}

}  // namespace

void NeuronParams::validate() const {
  if (!(tau_s > 0.0)) throw InvalidParameter("tau_s must be positive");
  if (!(tau_v > 0.0)) throw InvalidParameter("tau_v must be positive");
  if (!(theta > 0.0)) throw InvalidParameter("threshold must be positive");
}

template <typename Real>
std::pair<LayerState<Real>, std::vector<std::uint32_t>> lif_step(
    LayerState<Real> state, const NeuronParams& params,
    std::span<const Real> weighted_input) {
  params.validate();
  if (weighted_input.size() != state.width() ||
      state.i_s.size() != state.v.size()) {
    throw InvalidInput("weighted input does not match the layer width");
  }
  check_finite<Real>(state.v);
  check_finite<Real>(state.i_s);
  std::vector<std::uint32_t> spikes(state.width(), 0);
  lif_update<Real>(state, static_cast<Real>(decay_factor(params.tau_s)),
                   static_cast<Real>(decay_factor(params.tau_v)),
                   static_cast<Real>(params.theta), weighted_input, spikes, {});
  return {std::move(state), std::move(spikes)};
}

template <typename Real>
SpikeRaster simulate_layer_stateful(const Tensor2<Real>& weights,
                                    const NeuronParams& params,
                                    const SpikeRaster& input,
                                    Tensor2<Real>* membrane) {
  params.validate();
  check_shapes(weights.cols(), input);
  const std::size_t width = weights.rows();
  const Tensor2<double> w = widen(weights);
  const double syn_decay = decay_factor(params.tau_s);
  const double mem_decay = decay_factor(params.tau_v);

  SpikeRaster out(width, input.bins(), input.dt);
  if (membrane) *membrane = Tensor2<Real>(width, input.bins());
  LayerState<double> state(width);
  std::vector<double> counts(input.channels()), drive(width), pre(width);
  std::vector<std::uint32_t> spikes(width);
  for (std::size_t t = 0; t < input.bins(); ++t) {
    gather_bin(input, t, counts);
    detail::matvec<double, double>(w, counts, drive);
    lif_update<double>(state, syn_decay, mem_decay, params.theta, drive, spikes, pre);
    check_finite<double>(state.v);
    for (std::size_t n = 0; n < width; ++n) {
      out.at(n, t) = spikes[n];
      if (membrane) (*membrane)(n, t) = static_cast<Real>(pre[n]);
    }
  }
  return out;
}

template <typename Real>
SpikeRaster simulate_layer_srm(const Tensor2<Real>& weights,
                               const NeuronParams& params,
                               const SpikeRaster& input,
                               Tensor2<Real>* membrane) {
  params.validate();
  check_shapes(weights.cols(), input);
  const std::size_t width = weights.rows();
  const Tensor2<double> w = widen(weights);
  const double syn_decay = decay_factor(params.tau_s);
  const double mem_decay = decay_factor(params.tau_v);
  const double theta = params.theta;

  SpikeRaster out(width, input.bins(), input.dt);
  if (membrane) *membrane = Tensor2<Real>(width, input.bins());
  // psp = (eps_s * eps_v) * (W s) as two chained recursions; refractory holds
  // (nu * s) up to the previous bin.
  std::vector<double> syn(width, 0.0), psp(width, 0.0), refractory(width, 0.0);
  std::vector<double> counts(input.channels()), drive(width);
  for (std::size_t t = 0; t < input.bins(); ++t) {
    gather_bin(input, t, counts);
    detail::matvec<double, double>(w, counts, drive);
    for (std::size_t n = 0; n < width; ++n) {
      syn[n] = syn_decay * syn[n] + drive[n];
      psp[n] = mem_decay * psp[n] + syn[n];
      refractory[n] = mem_decay * refractory[n];
      const double v = psp[n] + refractory[n];
      if (std::isnan(v)) throw SimulationDiverged("NaN in membrane potential");
      if (membrane) (*membrane)(n, t) = static_cast<Real>(v);
      const std::uint32_t count = spike_count(v, theta);
      out.at(n, t) = count;
      if (count > 0) refractory[n] -= static_cast<double>(count) * theta;
    }
  }
  return out;
}

#define WAVESENSE_INSTANTIATE(Real)                                          \
  template std::pair<LayerState<Real>, std::vector<std::uint32_t>>           \
  lif_step<Real>(LayerState<Real>, const NeuronParams&,                      \
                 std::span<const Real>);                                     \
  template SpikeRaster simulate_layer_stateful<Real>(                        \
      const Tensor2<Real>&, const NeuronParams&, const SpikeRaster&,         \
      Tensor2<Real>*);                                                       \
  template SpikeRaster simulate_layer_srm<Real>(                             \
      const Tensor2<Real>&, const NeuronParams&, const SpikeRaster&,         \
      Tensor2<Real>*);

WAVESENSE_INSTANTIATE(float)
WAVESENSE_INSTANTIATE(double)
#undef WAVESENSE_INSTANTIATE

}  // namespace wavesense
