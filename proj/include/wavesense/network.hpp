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

// WaveSense: stacked residual blocks of spiking layers in which a slow
// synaptic time constant stands in for each dilated temporal convolution.
//
//   input --W_in--> [L0] --> block 0 --> block 1 --> ... (residual stream)
//   block i:  L1 <- tau_s-filter(W_fast R) + d_i-filter(W_slow R)
//             L2 <- W_res L1     (R_next = R + L2, spike-count merge)
//             L3 <- W_skip L1    (summed over blocks into the skip bus)
//   hidden <- W_hid * skip bus;  readout y = tau_lp-filter(W_out hidden)

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavesense/autodiff.hpp"
#include "wavesense/config.hpp"
#include "wavesense/raster.hpp"
#include "wavesense/tensor.hpp"

namespace wavesense {

struct WaveSenseConfig {
  std::size_t n_classes = 2;
  std::size_t n_channels_in = 64;
  std::size_t n_channels_res = 16;
  std::size_t n_channels_skip = 32;
  std::size_t n_hidden = 32;
  std::vector<std::size_t> dilations{2, 4, 8, 16, 2, 4, 8, 16};
  std::size_t kernel_size = 2;
  double threshold = 1.0;
  double learning_window = 0.3;
  bool bias = true;
  double tau_v = 2.0;
  double tau_s = 2.0;
  double weight_scaling = 0.5;
  std::optional<double> tau_lp;  // readout; defaults to max(dilations)

  void validate() const;
  double readout_tau() const;
  // One `key = value` line per field in a fixed order.
  std::string to_text() const;
  std::uint64_t hash() const;

  // Reads the recognised keys; unknown keys are left unconsumed.
  static WaveSenseConfig from(const KeyValueConfig& kv);
  bool operator==(const WaveSenseConfig&) const = default;
};

// Presets for the aloha, heysnips and speech-commands tasks.
WaveSenseConfig aloha_config();
WaveSenseConfig heysnips_config();
WaveSenseConfig speech_commands_config();

// 2.5 * sum of the slow synaptic time constants, in bins.
double temporal_memory(const WaveSenseConfig& config);

struct LayerFootprint {
  std::size_t dilation = 0;
  std::size_t wavenet_buffer = 0;   // (k - 1) * d + 1
  std::size_t wavesense_state = 0;  // k + 1
};
std::vector<LayerFootprint> state_footprint(const WaveSenseConfig& config);

struct OutputTrace {
  Tensor2<double> values;  // [classes x bins]
  float dt = 0.01f;

  std::size_t classes() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

struct SpikeStats {
  std::vector<std::string> layers;
  std::vector<std::size_t> widths;
  std::vector<std::uint64_t> spikes;  // total per layer
  std::vector<std::uint64_t> excess;  // sum of counts >= 2 per layer
  std::size_t bins = 0;

  std::size_t neurons() const;
  std::uint64_t total_spikes() const;
  std::uint64_t total_excess() const;
  double excess_per_neuron_bin() const;
};

struct ForwardResult {
  OutputTrace trace;
  SpikeStats stats;
  std::vector<SpikeRaster> rasters;  // per spiking layer, when requested
};

// Handles into the tape for one recorded forward pass.
struct RecordedForward {
  NodeId trace = 0;                 // [bins x classes]
  std::vector<NodeId> spike_layers; // in Network::layer_names() order
};

template <typename Real>
class Network {
 public:
  explicit Network(WaveSenseConfig config);

  // Parameters drawn by init_weights(config, seed).
  static Network build(const WaveSenseConfig& config, std::uint64_t seed);

  const WaveSenseConfig& config() const { return config_; }
  ParameterSet<Real>& parameters() { return params_; }
  const ParameterSet<Real>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.scalar_count(); }

  std::vector<std::string> layer_names() const;
  std::vector<std::size_t> layer_widths() const;
  std::size_t neuron_count() const;

  RecordedForward record(Tape<Real>& tape, const SpikeRaster& input,
                         SpikeMode mode = SpikeMode::kSpiking) const;
  ForwardResult forward(const SpikeRaster& input, bool keep_rasters = false) const;

  template <typename Other>
  Network<Other> cast() const {
    Network<Other> out(config_);
    for (ParamId p = 0; p < params_.size(); ++p) {
      const auto& src = params_.value(p).data();
      auto& dst = out.parameters().value(p).data();
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<Other>(src[i]);
    }
    return out;
  }

  // Parameter ids, in registration order.
  struct BlockIds {
    ParamId fast, slow, l1_bias, res, res_bias, skip, skip_bias;
  };
  struct Ids {
    ParamId in_weight, in_bias;
    std::vector<BlockIds> blocks;
    ParamId hidden_weight, hidden_bias;
    ParamId readout_weight;
  };
  const Ids& ids() const { return ids_; }

 private:
  WaveSenseConfig config_;
  ParameterSet<Real> params_;
  Ids ids_{};
};

// Bin-by-bin evaluation with carried state; produces bit-identical readout
// values to Network::forward on the same input.
template <typename Real>
class NetworkStream {
 public:
  explicit NetworkStream(const Network<Real>& network);

  void reset();
  // Advances one bin; returns the readout for that bin (one per class).
  std::span<const Real> step(std::span<const std::uint32_t> input_counts);
  std::size_t bins_seen() const { return bins_; }

 private:
  struct Layer {
    std::vector<Real> current, slow_current, membrane, refractory, spikes;
  };
  void spiking(Layer& layer, std::span<const Real> current, ParamId bias);

  const Network<Real>* net_;
  Real syn_decay_, mem_decay_, theta_, readout_decay_;
  std::vector<Real> slow_decay_;
  Layer input_;
  std::vector<Layer> l1_, l2_, l3_;
  Layer hidden_;
  std::vector<Real> residual_, skip_, readout_, drive_, drive2_, sum_, in_;
  std::size_t bins_ = 0;
};

// Time-major Real copy of a raster, [bins x channels].
template <typename Real>
Tensor2<Real> to_sequence(const SpikeRaster& raster);

// Gradient check in the subthreshold configuration with a quadratic readout
// loss. The network is differentiable there, so analytic and numeric
// gradients must agree.
struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  double loss = 0.0;
  bool replay_identical = false;
};
GradientCheckReport gradient_check(const Network<double>& network,
                                   const SpikeRaster& sample, double eps,
                                   double fraction, std::uint64_t seed,
                                   std::size_t min_checked = 0);

}  // namespace wavesense
