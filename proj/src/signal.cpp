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

#include "wavesense/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavesense/error.hpp"

namespace wavesense {
namespace {

void require_tau(double tau, const char* what) {
  if (!(tau > 0.0)) {
    throw InvalidParameter(std::string(what) +
                           " must be positive, got " + std::to_string(tau));
  }
}

void require_length(std::size_t length) {
  if (length == 0) throw InvalidParameter("kernel length must be >= 1");
}

Kernel exponential_kernel(double tau, double scale, std::size_t length,
                          KernelKind kind) {
  const double a = decay_factor(tau);
  Kernel k{std::vector<double>(length), kind};
  double tap = scale;
  for (auto& t : k.taps) {
    t = tap;
    tap *= a;
  }
  return k;
}

}  // namespace

double decay_factor(double tau) {
  require_tau(tau, "time constant");
  return std::exp(-1.0 / tau);
}

TimeSeries exp_filter(const TimeSeries& x, double tau) {
  const double a = decay_factor(tau);
  TimeSeries y{std::vector<double>(x.size()), x.dt};
  double state = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    state = a * state + x.values[t];
    y.values[t] = state;
  }
  return y;
}

std::size_t default_kernel_length(double tau_s, double tau_v) {
  require_tau(tau_s, "tau_s");
  require_tau(tau_v, "tau_v");
  return static_cast<std::size_t>(std::ceil(40.0 * std::max(tau_s, tau_v)));
}

Kernel synaptic_kernel(double tau_s, std::size_t length) {
  require_length(length);
  return exponential_kernel(tau_s, 1.0, length, KernelKind::kSynaptic);
}

Kernel membrane_kernel(double tau_v, std::size_t length) {
  require_length(length);
  return exponential_kernel(tau_v, 1.0, length, KernelKind::kMembrane);
}

Kernel refractory_kernel(double tau_v, double theta, std::size_t length) {
  require_length(length);
  if (!(theta > 0.0)) throw InvalidParameter("threshold must be positive");
  return exponential_kernel(tau_v, -theta, length, KernelKind::kRefractory);
}

Kernel psp_kernel(double tau_s, double tau_v, std::size_t length) {
  const Kernel syn = synaptic_kernel(tau_s, length);
  const Kernel mem = membrane_kernel(tau_v, length);
  Kernel k{std::vector<double>(length, 0.0), KernelKind::kPsp};
  for (std::size_t t = 0; t < length; ++t) {
    double acc = 0.0;
    for (std::size_t u = 0; u <= t; ++u) acc += syn.taps[u] * mem.taps[t - u];
    k.taps[t] = acc;
  }
  return k;
}

TimeSeries causal_convolve(const TimeSeries& x, const Kernel& k) {
  if (k.taps.empty()) throw InvalidParameter("kernel must not be empty");
  TimeSeries y{std::vector<double>(x.size(), 0.0), x.dt};
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t span = std::min(t, k.taps.size() - 1);
    double acc = 0.0;
    for (std::size_t u = 0; u <= span; ++u) acc += k.taps[u] * x.values[t - u];
    y.values[t] = acc;
  }
  return y;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidInput("softmax of an empty vector");
  for (double z : logits) {
    if (!std::isfinite(z)) throw InvalidInput("softmax logits must be finite");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace wavesense
