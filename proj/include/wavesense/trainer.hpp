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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavesense/autodiff.hpp"
#include "wavesense/config.hpp"
#include "wavesense/datasets.hpp"
#include "wavesense/losses.hpp"
#include "wavesense/network.hpp"

namespace wavesense {

// Weights ~ N(0, (weight_scaling / sqrt(fan_in))^2), biases zero.
template <typename Real>
ParameterSet<Real> init_weights(const WaveSenseConfig& config, std::uint64_t seed);

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 30;
  double alpha = kDefaultActivityWeight;
  std::uint64_t seed = 0;
  double grad_clip = 10.0;  // global norm; 0 disables clipping
  std::string checkpoint_dir;
  std::size_t threads = 1;
  bool deterministic = true;  // reduce per-sample gradients in sample order

  void validate() const;
  std::string to_text() const;
  static TrainConfig from(const KeyValueConfig& kv);
  bool operator==(const TrainConfig&) const = default;
};

template <typename Real>
class Adam {
 public:
  Adam() = default;
  Adam(const ParameterSet<Real>& params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step(ParameterSet<Real>& params, const GradientMap<Real>& grads);

  std::uint64_t steps() const { return t_; }
  std::vector<Tensor2<Real>>& first_moment() { return m_; }
  std::vector<Tensor2<Real>>& second_moment() { return v_; }
  const std::vector<Tensor2<Real>>& first_moment() const { return m_; }
  const std::vector<Tensor2<Real>>& second_moment() const { return v_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<Tensor2<Real>> m_, v_;
};

// Loss and gradient of one sample under the training objective.
struct SampleResult {
  GradientMap<float> grads;
  double loss = 0.0;
  double cross_entropy = 0.0;
  std::size_t predicted = 0;
  bool correct = false;
  std::vector<std::uint64_t> layer_spikes;
  std::uint64_t excess = 0;
};
SampleResult sample_gradient(const Network<float>& net, const LabeledRaster& sample,
                             double alpha);

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  double excess_per_neuron_bin = 0.0;
  std::vector<std::string> layers;
  std::vector<double> spike_rate;  // spikes per neuron per bin, per layer
  std::size_t samples = 0;
};

// Where an interrupted run resumes: the shuffle of epoch `epoch` is a pure
// function of (seed, epoch), so the position inside it is enough.
struct TrainingState {
  std::uint64_t epoch = 0;
  std::uint64_t step_in_epoch = 0;
  std::uint64_t seed = 0;
};

class Trainer {
 public:
  Trainer(Network<float> network, TrainConfig config);

  const Network<float>& network() const { return net_; }
  Network<float>& network() { return net_; }
  const TrainConfig& config() const { return config_; }
  Adam<float>& optimizer() { return adam_; }
  const Adam<float>& optimizer() const { return adam_; }
  const TrainingState& state() const { return state_; }
  void restore(const Adam<float>& adam, const TrainingState& state);

  // Sample order of an epoch; a pure function of (seed, epoch, size).
  std::vector<std::size_t> epoch_order(std::uint64_t epoch, std::size_t size) const;

  struct Batch {
    GradientMap<float> grads;  // mean over samples, clipped
    double loss = 0.0;         // mean over samples
    double grad_norm = 0.0;    // before clipping
    std::size_t correct = 0;
    std::vector<std::uint64_t> layer_spikes;
    std::uint64_t excess = 0;
    std::size_t samples = 0, bins = 0;
  };
  // Gradient of one minibatch; parameters are not touched.
  Batch batch_gradient(const std::vector<LabeledRaster>& data,
                       const std::vector<std::size_t>& indices) const;
  // Indices of the next minibatch in the current epoch (empty at its end).
  std::vector<std::size_t> next_batch(std::size_t train_size) const;

  // Runs up to `max_steps` optimizer steps, stopping at the end of the
  // current epoch. Returns the number of steps taken. A non-finite loss or
  // gradient throws SimulationDiverged with the parameters left untouched.
  std::size_t run_steps(const std::vector<LabeledRaster>& train, std::size_t max_steps);

  // Finishes the current epoch; metrics are running means over its batches.
  EpochMetrics train_epoch(const std::vector<LabeledRaster>& train);

  EpochMetrics evaluate(const std::vector<LabeledRaster>& data,
                        const std::string& split) const;

 private:
  Network<float> net_;
  TrainConfig config_;
  Adam<float> adam_;
  TrainingState state_;
  struct Running {
    double loss = 0.0;
    std::size_t correct = 0, samples = 0, bins = 0;
    std::uint64_t excess = 0;
    std::vector<std::uint64_t> spikes;
  } running_;
};

// One line per record: {"epoch":..,"split":..,"loss":..,...}.
std::string metrics_json(const EpochMetrics& m);

// Calls body(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

// --threads, else WAVESENSE_THREADS, else 1.
std::size_t resolve_threads(std::optional<std::size_t> flag);

}  // namespace wavesense
