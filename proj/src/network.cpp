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

#include "wavesense/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "wavesense/error.hpp"
#include "wavesense/neuron.hpp"
#include "wavesense/signal.hpp"
#include "wavesense/trainer.hpp"

namespace wavesense {

// ---------------------------------------------------------------------------
// Configuration

void WaveSenseConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(n_classes, "n_classes");
  positive(n_channels_in, "n_channels_in");
  positive(n_channels_res, "n_channels_res");
  positive(n_channels_skip, "n_channels_skip");
  positive(n_hidden, "n_hidden");
  if (kernel_size != 2) throw ConfigError("kernel_size must be 2");
  if (dilations.empty()) throw ConfigError("dilations must not be empty");
  for (std::size_t d : dilations) {
    if (d < 1) throw ConfigError("every dilation must be >= 1");
  }
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!(learning_window > 0.0)) throw ConfigError("learning_window must be positive");
  if (!(tau_v > 0.0) || !(tau_s > 0.0)) {
    throw ConfigError("tau_v and tau_s must be positive");
  }
  if (!(weight_scaling >= 0.0)) throw ConfigError("weight_scaling must be >= 0");
  if (tau_lp && !(*tau_lp > 0.0)) throw ConfigError("tau_lp must be positive");
}

double WaveSenseConfig::readout_tau() const {
  if (tau_lp) return *tau_lp;
  return static_cast<double>(*std::max_element(dilations.begin(), dilations.end()));
}

std::string WaveSenseConfig::to_text() const {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string s;
  s += "n_classes = " + std::to_string(n_classes) + "\n";
  s += "n_channels_in = " + std::to_string(n_channels_in) + "\n";
  s += "n_channels_res = " + std::to_string(n_channels_res) + "\n";
  s += "n_channels_skip = " + std::to_string(n_channels_skip) + "\n";
  s += "n_hidden = " + std::to_string(n_hidden) + "\n";
  s += "dilations = " + format_list(dilations) + "\n";
  s += "threshold = " + num(threshold) + "\n";
  s += "learning_window = " + num(learning_window) + "\n";
  s += "kernel_size = " + std::to_string(kernel_size) + "\n";
  s += std::string("bias = ") + (bias ? "true" : "false") + "\n";
  s += "tau_v = " + num(tau_v) + "\n";
  s += "tau_s = " + num(tau_s) + "\n";
  s += "weight_scaling = " + num(weight_scaling) + "\n";
  s += "tau_lp = " + num(readout_tau()) + "\n";
  return s;
}

std::uint64_t WaveSenseConfig::hash() const { return fnv1a64(to_text()); }

WaveSenseConfig WaveSenseConfig::from(const KeyValueConfig& kv) {
  WaveSenseConfig c;
  auto count = [&](const char* key, std::size_t& field) {
    if (auto v = kv.get_int(key)) {
      if (*v < 0) throw ConfigError(std::string(key) + " must be non-negative");
      field = static_cast<std::size_t>(*v);
    }
  };
  count("n_classes", c.n_classes);
  count("n_channels_in", c.n_channels_in);
  count("n_channels_res", c.n_channels_res);
  count("n_channels_skip", c.n_channels_skip);
  count("n_hidden", c.n_hidden);
  count("kernel_size", c.kernel_size);
  if (auto v = kv.get_list("dilations")) {
    c.dilations.clear();
    for (double d : *v) {
      if (d < 1 || d != std::floor(d)) {
        throw ConfigError("dilations must be positive integers");
      }
      c.dilations.push_back(static_cast<std::size_t>(d));
    }
  }
  if (auto v = kv.get_double("threshold")) c.threshold = *v;
  if (auto v = kv.get_double("learning_window")) c.learning_window = *v;
  if (auto v = kv.get_bool("bias")) c.bias = *v;
  if (auto v = kv.get_double("tau_v")) c.tau_v = *v;
  if (auto v = kv.get_double("tau_s")) c.tau_s = *v;
  if (auto v = kv.get_double("weight_scaling")) c.weight_scaling = *v;
  if (auto v = kv.get_double("tau_lp")) c.tau_lp = *v;
  c.validate();
  return c;
}

WaveSenseConfig aloha_config() {
  WaveSenseConfig c;
  c.n_classes = 2;
  c.dilations = {2, 4, 8, 2, 4, 8, 2, 4, 8, 2, 4, 8};
  return c;
}

WaveSenseConfig heysnips_config() {
  WaveSenseConfig c;
  c.n_classes = 2;
  c.dilations = {2, 4, 8, 16, 2, 4, 8, 16};
  return c;
}

WaveSenseConfig speech_commands_config() {
  WaveSenseConfig c;
  c.n_classes = 35;
  c.n_channels_res = 32;
  c.n_channels_skip = 64;
  c.n_hidden = 128;
  c.dilations = {2, 4, 8, 16, 2, 4, 8, 16, 2, 4, 8, 16};
  return c;
}

double temporal_memory(const WaveSenseConfig& config) {
  config.validate();
  const double sum = std::accumulate(config.dilations.begin(),
                                     config.dilations.end(), 0.0);
  return 2.5 * sum;
}

std::vector<LayerFootprint> state_footprint(const WaveSenseConfig& config) {
  config.validate();
  const std::size_t k = config.kernel_size;
  std::vector<LayerFootprint> out;
  for (std::size_t d : config.dilations) {
    out.push_back({d, (k - 1) * d + 1, k + 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spike statistics

std::size_t SpikeStats::neurons() const {
  return std::accumulate(widths.begin(), widths.end(), std::size_t{0});
}

std::uint64_t SpikeStats::total_spikes() const {
  return std::accumulate(spikes.begin(), spikes.end(), std::uint64_t{0});
}

std::uint64_t SpikeStats::total_excess() const {
  return std::accumulate(excess.begin(), excess.end(), std::uint64_t{0});
}

double SpikeStats::excess_per_neuron_bin() const {
  const double cells = static_cast<double>(neurons()) * bins;
  return cells > 0 ? static_cast<double>(total_excess()) / cells : 0.0;
}

// ---------------------------------------------------------------------------
// Network

template <typename Real>
Tensor2<Real> to_sequence(const SpikeRaster& raster) {
  Tensor2<Real> seq(raster.bins(), raster.channels());
  for (std::size_t c = 0; c < raster.channels(); ++c) {
    for (std::size_t t = 0; t < raster.bins(); ++t) {
      seq(t, c) = static_cast<Real>(raster.at(c, t));
    }
  }
  return seq;
}

template <typename Real>
Network<Real>::Network(WaveSenseConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  const bool b = c.bias;
  auto bias = [&](const std::string& name, std::size_t width) -> ParamId {
    return b ? params_.add(name, 1, width) : ParamId{0};
  };
  ids_.in_weight = params_.add("input.weight", c.n_channels_res, c.n_channels_in);
  ids_.in_bias = bias("input.bias", c.n_channels_res);
  for (std::size_t i = 0; i < c.dilations.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    BlockIds blk{};
    blk.fast = params_.add(p + "fast.weight", c.n_channels_res, c.n_channels_res);
    blk.slow = params_.add(p + "slow.weight", c.n_channels_res, c.n_channels_res);
    blk.l1_bias = bias(p + "l1.bias", c.n_channels_res);
    blk.res = params_.add(p + "res.weight", c.n_channels_res, c.n_channels_res);
    blk.res_bias = bias(p + "res.bias", c.n_channels_res);
    blk.skip = params_.add(p + "skip.weight", c.n_channels_skip, c.n_channels_res);
    blk.skip_bias = bias(p + "skip.bias", c.n_channels_skip);
    ids_.blocks.push_back(blk);
  }
  ids_.hidden_weight = params_.add("hidden.weight", c.n_hidden, c.n_channels_skip);
  ids_.hidden_bias = bias("hidden.bias", c.n_hidden);
  ids_.readout_weight = params_.add("readout.weight", c.n_classes, c.n_hidden);
}

template <typename Real>
Network<Real> Network<Real>::build(const WaveSenseConfig& config,
                                   std::uint64_t seed) {
  Network net(config);
  net.params_ = init_weights<Real>(config, seed);
  return net;
}

template <typename Real>
std::vector<std::string> Network<Real>::layer_names() const {
  std::vector<std::string> names{"input"};
  for (std::size_t i = 0; i < config_.dilations.size(); ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    names.push_back(p + "l1");
    names.push_back(p + "res");
    names.push_back(p + "skip");
  }
  names.push_back("hidden");
  return names;
}

template <typename Real>
std::vector<std::size_t> Network<Real>::layer_widths() const {
  std::vector<std::size_t> widths{config_.n_channels_res};
  for (std::size_t i = 0; i < config_.dilations.size(); ++i) {
    widths.push_back(config_.n_channels_res);
    widths.push_back(config_.n_channels_res);
    widths.push_back(config_.n_channels_skip);
  }
  widths.push_back(config_.n_hidden);
  return widths;
}

template <typename Real>
std::size_t Network<Real>::neuron_count() const {
  const auto w = layer_widths();
  return std::accumulate(w.begin(), w.end(), std::size_t{0});
}

template <typename Real>
RecordedForward Network<Real>::record(Tape<Real>& tape, const SpikeRaster& input,
                                      SpikeMode mode) const {
  if (input.channels() != config_.n_channels_in) {
    throw InvalidInput("network expects " + std::to_string(config_.n_channels_in) +
                       " input channels, raster has " +
                       std::to_string(input.channels()));
  }
  const auto& c = config_;
  const Real syn = static_cast<Real>(decay_factor(c.tau_s));
  const SpikeNodeConfig<Real> neuron{static_cast<Real>(c.threshold),
                                     static_cast<Real>(decay_factor(c.tau_v)),
                                     c.learning_window, mode};
  RecordedForward rec;
  auto spiking = [&](NodeId current, ParamId bias) {
    const NodeId drive = c.bias ? tape.add_bias(current, bias) : current;
    const NodeId membrane = tape.exp_filter(drive, neuron.membrane_decay);
    const NodeId s = tape.spike(membrane, neuron);
    rec.spike_layers.push_back(s);
    return s;
  };
  auto synapse = [&](ParamId w, NodeId x, Real decay) {
    return tape.exp_filter(tape.matmul(w, x), decay);
  };

  const NodeId x = tape.constant(to_sequence<Real>(input));
  NodeId residual = spiking(synapse(ids_.in_weight, x, syn), ids_.in_bias);
  NodeId skip_bus = 0;
  for (std::size_t i = 0; i < c.dilations.size(); ++i) {
    const BlockIds& b = ids_.blocks[i];
    const Real slow = static_cast<Real>(decay_factor(static_cast<double>(c.dilations[i])));
    const NodeId l1 = spiking(
        tape.add(synapse(b.fast, residual, syn), synapse(b.slow, residual, slow)),
        b.l1_bias);
    const NodeId l2 = spiking(synapse(b.res, l1, syn), b.res_bias);
    const NodeId l3 = spiking(synapse(b.skip, l1, syn), b.skip_bias);
    residual = tape.add(residual, l2);
    skip_bus = i == 0 ? l3 : tape.add(skip_bus, l3);
  }
  const NodeId hidden = spiking(synapse(ids_.hidden_weight, skip_bus, syn),
                                ids_.hidden_bias);
  rec.trace = synapse(ids_.readout_weight, hidden,
                      static_cast<Real>(decay_factor(c.readout_tau())));
  return rec;
}

template <typename Real>
ForwardResult Network<Real>::forward(const SpikeRaster& input,
                                     bool keep_rasters) const {
  Tape<Real> tape(params_);
  const RecordedForward rec = record(tape, input);
  ForwardResult out;
  const auto& y = tape.value(rec.trace);
  out.trace.dt = input.dt;
  out.trace.values = Tensor2<double>(y.cols(), y.rows());
  for (std::size_t t = 0; t < y.rows(); ++t) {
    for (std::size_t k = 0; k < y.cols(); ++k) out.trace.values(k, t) = y(t, k);
  }
  out.stats.layers = layer_names();
  out.stats.widths = layer_widths();
  out.stats.bins = input.bins();
  for (NodeId id : rec.spike_layers) {
    const auto& s = tape.value(id);
    std::uint64_t total = 0, excess = 0;
    for (Real v : s.data()) {
      const auto n = static_cast<std::uint64_t>(v);
      total += n;
      if (n >= 2) excess += n;
    }
    out.stats.spikes.push_back(total);
    out.stats.excess.push_back(excess);
    if (keep_rasters) {
      SpikeRaster r(s.cols(), s.rows(), input.dt);
      for (std::size_t t = 0; t < s.rows(); ++t) {
        for (std::size_t n = 0; n < s.cols(); ++n) {
          r.at(n, t) = static_cast<std::uint32_t>(s(t, n));
        }
      }
      out.rasters.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Streaming

template <typename Real>
NetworkStream<Real>::NetworkStream(const Network<Real>& network) : net_(&network) {
  const auto& c = network.config();
  syn_decay_ = static_cast<Real>(decay_factor(c.tau_s));
  mem_decay_ = static_cast<Real>(decay_factor(c.tau_v));
  theta_ = static_cast<Real>(c.threshold);
  readout_decay_ = static_cast<Real>(decay_factor(c.readout_tau()));
  for (std::size_t d : c.dilations) {
    slow_decay_.push_back(static_cast<Real>(decay_factor(static_cast<double>(d))));
  }
  reset();
}

template <typename Real>
void NetworkStream<Real>::reset() {
  const auto& c = net_->config();
  auto make = [](std::size_t width) {
    Layer l;
    l.current.assign(width, Real{0});
    l.slow_current.assign(width, Real{0});
    l.membrane.assign(width, Real{0});
    l.refractory.assign(width, Real{0});
    l.spikes.assign(width, Real{0});
    return l;
  };
  input_ = make(c.n_channels_res);
  l1_.assign(c.dilations.size(), make(c.n_channels_res));
  l2_.assign(c.dilations.size(), make(c.n_channels_res));
  l3_.assign(c.dilations.size(), make(c.n_channels_skip));
  hidden_ = make(c.n_hidden);
  residual_.assign(c.n_channels_res, Real{0});
  skip_.assign(c.n_channels_skip, Real{0});
  readout_.assign(c.n_classes, Real{0});
  in_.assign(c.n_channels_in, Real{0});
  bins_ = 0;
}

// Mirrors add_bias -> exp_filter(membrane) -> spike on the tape.
template <typename Real>
void NetworkStream<Real>::spiking(Layer& layer, std::span<const Real> current,
                                  ParamId bias) {
  const auto& c = net_->config();
  const auto& params = net_->parameters();
  for (std::size_t n = 0; n < layer.membrane.size(); ++n) {
    const Real drive = c.bias ? current[n] + params.value(bias)(0, n) : current[n];
    layer.membrane[n] = mem_decay_ * layer.membrane[n] + drive;
    layer.refractory[n] = mem_decay_ * layer.refractory[n];
    const Real v = layer.membrane[n] + layer.refractory[n];
    const std::uint32_t count = spike_count(v, theta_);
    layer.spikes[n] = static_cast<Real>(count);
    if (count > 0) layer.refractory[n] -= static_cast<Real>(count) * theta_;
  }
}

template <typename Real>
std::span<const Real> NetworkStream<Real>::step(
    std::span<const std::uint32_t> input_counts) {
  const auto& c = net_->config();
  const auto& p = net_->parameters();
  const auto& ids = net_->ids();
  if (input_counts.size() != c.n_channels_in) {
    throw InvalidInput("stream step expects " + std::to_string(c.n_channels_in) +
                       " input channels");
  }
  for (std::size_t i = 0; i < in_.size(); ++i) in_[i] = static_cast<Real>(input_counts[i]);

  // Synaptic filter: current = decay * current + W x.
  auto synapse = [&](ParamId w, std::span<const Real> x, std::vector<Real>& current,
                     Real decay) {
    drive_.resize(p.value(w).rows());
    detail::matvec<Real, Real>(p.value(w), x, drive_);
    for (std::size_t n = 0; n < current.size(); ++n) {
      current[n] = decay * current[n] + drive_[n];
    }
  };

  synapse(ids.in_weight, in_, input_.current, syn_decay_);
  spiking(input_, input_.current, ids.in_bias);
  residual_ = input_.spikes;

  for (std::size_t i = 0; i < c.dilations.size(); ++i) {
    const auto& b = ids.blocks[i];
    Layer& l1 = l1_[i];
    synapse(b.fast, residual_, l1.current, syn_decay_);
    synapse(b.slow, residual_, l1.slow_current, slow_decay_[i]);
    sum_.resize(l1.current.size());
    for (std::size_t n = 0; n < sum_.size(); ++n) {
      sum_[n] = l1.current[n] + l1.slow_current[n];
    }
    spiking(l1, sum_, b.l1_bias);
    synapse(b.res, l1.spikes, l2_[i].current, syn_decay_);
    spiking(l2_[i], l2_[i].current, b.res_bias);
    synapse(b.skip, l1.spikes, l3_[i].current, syn_decay_);
    spiking(l3_[i], l3_[i].current, b.skip_bias);
    for (std::size_t n = 0; n < residual_.size(); ++n) residual_[n] += l2_[i].spikes[n];
    if (i == 0) {
      skip_ = l3_[i].spikes;
    } else {
      for (std::size_t n = 0; n < skip_.size(); ++n) skip_[n] += l3_[i].spikes[n];
    }
  }
  synapse(ids.hidden_weight, skip_, hidden_.current, syn_decay_);
  spiking(hidden_, hidden_.current, ids.hidden_bias);
  synapse(ids.readout_weight, hidden_.spikes, readout_, readout_decay_);
  ++bins_;
  return readout_;
}

// ---------------------------------------------------------------------------
// Gradient check

GradientCheckReport gradient_check(const Network<double>& network,
                                   const SpikeRaster& sample, double eps,
                                   double fraction, std::uint64_t seed,
                                   std::size_t min_checked) {
  Network<double> net = network;
  auto loss_of = [&]() {
    Tape<double> tape(net.parameters());
    const auto rec = net.record(tape, sample, SpikeMode::kSubthreshold);
    return tape.scalar(tape.mean_square(rec.trace));
  };
  Tape<double> tape(net.parameters());
  const auto rec = net.record(tape, sample, SpikeMode::kSubthreshold);
  const NodeId loss = tape.mean_square(rec.trace);
  const GradientMap<double> grads = tape.backward(loss);

  GradientCheckReport report;
  report.loss = tape.scalar(loss);
  report.replay_identical = loss_of() == report.loss;
  std::mt19937_64 rng(seed);
  const FiniteDiffReport fd = finite_diff_check(net.parameters(), grads, loss_of,
                                                eps, fraction, rng, min_checked);
  report.max_relative_error = fd.max_relative_error;
  report.checked = fd.checked;
  return report;
}

template Tensor2<float> to_sequence<float>(const SpikeRaster&);
template Tensor2<double> to_sequence<double>(const SpikeRaster&);
template class Network<float>;
template class Network<double>;
template class NetworkStream<float>;
template class NetworkStream<double>;

}  // namespace wavesense
