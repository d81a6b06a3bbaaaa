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

// Reverse-mode differentiation over time-unrolled spiking layers.
//
// Values on the tape are whole sequences stored time-major as
// [bins x width]; scalars are 1 x 1. Each primitive records what its
// backward rule needs, and backward() walks the record in reverse.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wavesense/tensor.hpp"

namespace wavesense {

using NodeId = std::size_t;
using ParamId = std::size_t;

// Named trainable tensors. Biases are stored as [1 x width].
template <typename Real>
class ParameterSet {
 public:
  ParamId add(std::string name, std::size_t rows, std::size_t cols);

  std::size_t size() const { return values_.size(); }
  const std::string& name(ParamId id) const { return names_[id]; }
  Tensor2<Real>& value(ParamId id) { return values_[id]; }
  const Tensor2<Real>& value(ParamId id) const { return values_[id]; }
  std::optional<ParamId> find(const std::string& name) const;
  std::size_t scalar_count() const;

  // Same names and shapes with all entries zero.
  std::vector<Tensor2<Real>> zeros_like() const;

  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor2<Real>> values_;
};

// Per-parameter gradient tensors, index-aligned with a ParameterSet.
template <typename Real>
struct GradientMap {
  std::vector<Tensor2<Real>> tensors;

  void accumulate(const GradientMap& other);
  void scale(Real factor);
  double global_norm() const;
  bool operator==(const GradientMap&) const = default;
};

struct SurrogateParams {
  double theta = 1.0;
  double window = 0.3;  // learning window, as a fraction of theta
};

// Periodic exponential exp(-d(v) / (theta * window)); d is the distance to
// the nearest positive multiple of theta above theta / 2, and theta - v
// below it. Peaks at 1 on every multiple of theta.
double surrogate_gradient(double v_pre, const SurrogateParams& sp);

enum class SpikeMode {
  kSpiking,
  // Spiking disabled (theta = infinity): the node passes the membrane
  // potential through, making the network exactly differentiable.
  kSubthreshold,
};

template <typename Real>
struct SpikeNodeConfig {
  Real theta = 1;
  Real membrane_decay = 0;  // decay of the refractory term, exp(-1/tau_v)
  double window = 0.3;
  SpikeMode mode = SpikeMode::kSpiking;
};

template <typename Real>
class Tape {
 public:
  explicit Tape(const ParameterSet<Real>& params) : params_(&params) {}

  NodeId constant(Tensor2<Real> value);
  // y_t = W x_t for every bin t.
  NodeId matmul(ParamId weight, NodeId x);
  NodeId add_bias(NodeId x, ParamId bias);
  NodeId add(NodeId a, NodeId b);
  // y_t = decay * y_{t-1} + x_t.
  NodeId exp_filter(NodeId x, Real decay);
  // Multi-spike threshold unit on a membrane drive. The drive excludes the
  // reset; the node adds the refractory term -theta * N filtered with the
  // membrane decay. Backward treats the reset as detached and uses the
  // surrogate gradient as dN/dv.
  NodeId spike(NodeId drive, const SpikeNodeConfig<Real>& config);

  // -log softmax(peak values)[label] with the peak over bins per class.
  NodeId peak_cross_entropy(NodeId trace, std::size_t label);
  // (N_excess / (bins * neurons))^2 over the given spike nodes, where a bin
  // contributes its count when the count is at least 2.
  NodeId activity_penalty(std::vector<NodeId> spike_nodes);
  // 0.5 * mean(x^2).
  NodeId mean_square(NodeId x);
  NodeId weighted_sum(std::vector<std::pair<NodeId, Real>> terms);

  std::size_t size() const { return nodes_.size(); }
  const Tensor2<Real>& value(NodeId id) const { return node(id).value; }
  Real scalar(NodeId id) const;
  // Pre-spike membrane potential saved by a spike node, [bins x width].
  const Tensor2<Real>& pre_spike(NodeId id) const;
  // Peak bins chosen by a peak_cross_entropy node, one per class.
  const std::vector<std::size_t>& peak_times(NodeId id) const;

  GradientMap<Real> backward(NodeId loss) const;

 private:
  enum class Op {
    kConstant,
    kMatMul,
    kAddBias,
    kAdd,
    kExpFilter,
    kSpike,
    kPeakCrossEntropy,
    kActivityPenalty,
    kMeanSquare,
    kWeightedSum,
  };

  struct Node {
    Op op = Op::kConstant;
    std::vector<NodeId> inputs;
    ParamId param = 0;
    Real decay = 0;
    SpikeNodeConfig<Real> spike;
    std::size_t label = 0;
    std::vector<Real> coeffs;
    bool requires_grad = false;
    Tensor2<Real> value;
    Tensor2<Real> saved;              // pre-spike membrane / probabilities
    std::vector<std::size_t> peaks;   // peak bin per class
    Real aux = 0;                     // activity ratio
  };

  const Node& node(NodeId id) const;
  NodeId push(Node n);

  const ParameterSet<Real>* params_;
  std::vector<Node> nodes_;
};

// Compares analytic gradients against central differences on a random
// fraction of scalar parameters. `loss` must re-evaluate the forward pass
// with the current parameter values.
struct FiniteDiffReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_parameter = 0;
};

FiniteDiffReport finite_diff_check(ParameterSet<double>& params,
                                   const GradientMap<double>& analytic,
                                   const std::function<double()>& loss,
                                   double eps, double fraction,
                                   std::mt19937_64& rng,
                                   std::size_t min_checked = 0);

}  // namespace wavesense
