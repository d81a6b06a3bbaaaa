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
#include <span>
#include <vector>

namespace wavesense {

// Network bin width in seconds.
inline constexpr double kDefaultBinSeconds = 0.01;

struct TimeSeries {
  std::vector<double> values;
  double dt = kDefaultBinSeconds;

  std::size_t size() const { return values.size(); }
};

enum class KernelKind { kSynaptic, kMembrane, kPsp, kRefractory };

// Causal kernel sampled once per bin; taps[0] is the t = 0 sample.
struct Kernel {
  std::vector<double> taps;
  KernelKind kind = KernelKind::kPsp;
};

// Per-bin decay exp(-1/tau) of an exponential with time constant `tau` bins.
double decay_factor(double tau);

// y[t] = decay * y[t-1] + x[t] with y[-1] = 0.
TimeSeries exp_filter(const TimeSeries& x, double tau);

// Truncation length that leaves less than 1e-6 of the kernel mass behind.
std::size_t default_kernel_length(double tau_s, double tau_v);

Kernel synaptic_kernel(double tau_s, std::size_t length);
Kernel membrane_kernel(double tau_v, std::size_t length);

// Discrete convolution of the synaptic and membrane kernels; for
// tau_s == tau_v the taps are (t + 1) * decay^t.
Kernel psp_kernel(double tau_s, double tau_v, std::size_t length);

// nu(t) = -theta * exp(-t / tau_v).
Kernel refractory_kernel(double tau_v, double theta, std::size_t length);

// y[t] = sum_{u <= min(t, |k| - 1)} k[u] * x[t - u]; output length = input.
TimeSeries causal_convolve(const TimeSeries& x, const Kernel& k);

// Numerically stable softmax; throws InvalidInput on non-finite logits.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace wavesense
