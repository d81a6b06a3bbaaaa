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

#include "wavesense/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wavesense/error.hpp"

namespace wavesense {

template <typename Real>
ParameterSet<Real> init_weights(const WaveSenseConfig& config, std::uint64_t seed) {
  ParameterSet<Real> params = Network<Real>(config).parameters();
  std::mt19937_64 rng(seed);
  for (ParamId p = 0; p < params.size(); ++p) {
    auto& w = params.value(p);
    const std::string& name = params.name(p);
    const bool is_weight = name.size() >= 7 && name.compare(name.size() - 7, 7, ".weight") == 0;
    if (!is_weight) continue;  // biases stay zero
    const double std = config.weight_scaling / std::sqrt(static_cast<double>(w.cols()));
    if (std == 0.0) continue;
    std::normal_distribution<double> normal(0.0, std);
    for (Real& x : w.data()) x = static_cast<Real>(normal(rng));
  }
  return params;
}

template ParameterSet<float> init_weights<float>(const WaveSenseConfig&, std::uint64_t);
template ParameterSet<double> init_weights<double>(const WaveSenseConfig&, std::uint64_t);

// ---------------------------------------------------------------------------
// TrainConfig

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "lr = " << lr << "\n"
      << "beta1 = " << beta1 << "\n"
      << "beta2 = " << beta2 << "\n"
      << "eps = " << eps << "\n"
      << "batch_size = " << batch_size << "\n"
      << "epochs = " << epochs << "\n"
      << "alpha = " << alpha << "\n"
      << "seed = " << seed << "\n"
      << "grad_clip = " << grad_clip << "\n"
      << "checkpoint_dir = " << checkpoint_dir << "\n"
      << "threads = " << threads << "\n"
      << "deterministic = " << (deterministic ? "true" : "false") << "\n";
  return out.str();
}

TrainConfig TrainConfig::from(const KeyValueConfig& kv) {
  TrainConfig c;
  auto count = [&](const char* key, std::size_t& field) {
    if (auto v = kv.get_int(key)) {
      if (*v < 0) throw ConfigError(std::string(key) + " must be non-negative");
      field = static_cast<std::size_t>(*v);
    }
  };
  if (auto v = kv.get_double("lr")) c.lr = *v;
  if (auto v = kv.get_double("beta1")) c.beta1 = *v;
  if (auto v = kv.get_double("beta2")) c.beta2 = *v;
  if (auto v = kv.get_double("eps")) c.eps = *v;
  count("batch_size", c.batch_size);
  count("epochs", c.epochs);
  if (auto v = kv.get_double("alpha")) c.alpha = *v;
  if (auto v = kv.get_int("seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kv.get_double("grad_clip")) c.grad_clip = *v;
  if (auto v = kv.get_string("checkpoint_dir")) c.checkpoint_dir = *v;
  count("threads", c.threads);
  if (auto v = kv.get_bool("deterministic")) c.deterministic = *v;
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Adam

template <typename Real>
Adam<Real>::Adam(const ParameterSet<Real>& params, double lr, double beta1,
                 double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(params.zeros_like()), v_(params.zeros_like()) {}

template <typename Real>
void Adam<Real>::step(ParameterSet<Real>& params, const GradientMap<Real>& grads) {
  if (grads.tensors.size() != params.size() || m_.size() != params.size()) {
    throw UsageError("optimizer and gradient layouts differ");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<Real>(beta1_), b2 = static_cast<Real>(beta2_);
  for (ParamId p = 0; p < params.size(); ++p) {
    auto& w = params.value(p).data();
    auto& m = m_[p].data();
    auto& v = v_[p].data();
    const auto& g = grads.tensors[p].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (Real{1} - b1) * g[i];
      v[i] = b2 * v[i] + (Real{1} - b2) * g[i] * g[i];
      const double m_hat = static_cast<double>(m[i]) / c1;
      const double v_hat = static_cast<double>(v[i]) / c2;
      w[i] = static_cast<Real>(w[i] - lr_ * m_hat / (std::sqrt(v_hat) + eps_));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

// ---------------------------------------------------------------------------
// Per-sample objective

SampleResult sample_gradient(const Network<float>& net, const LabeledRaster& sample,
                             double alpha) {
  if (sample.label >= net.config().n_classes) {
    throw InvalidInput("label " + std::to_string(sample.label) + " out of range");
  }
  Tape<float> tape(net.parameters());
  const RecordedForward rec = net.record(tape, sample.raster);
  const NodeId ce = tape.peak_cross_entropy(rec.trace, sample.label);
  NodeId loss = ce;
  if (alpha > 0.0) {
    const NodeId act = tape.activity_penalty(rec.spike_layers);
    loss = tape.weighted_sum({{ce, 1.0f}, {act, static_cast<float>(alpha)}});
  }
  SampleResult out;
  out.grads = tape.backward(loss);
  out.loss = tape.scalar(loss);
  out.cross_entropy = tape.scalar(ce);

  const auto& y = tape.value(rec.trace);  // [bins x classes]
  float best = 0.0f;
  for (std::size_t k = 0; k < y.cols(); ++k) {
    float peak = y(0, k);
    for (std::size_t t = 1; t < y.rows(); ++t) peak = std::max(peak, y(t, k));
    if (k == 0 || peak > best) {
      best = peak;
      out.predicted = k;
    }
  }
  out.correct = out.predicted == sample.label;
  for (NodeId id : rec.spike_layers) {
    std::uint64_t total = 0;
    for (float v : tape.value(id).data()) {
      const auto n = static_cast<std::uint64_t>(v);
      total += n;
      if (n >= 2) out.excess += n;
    }
    out.layer_spikes.push_back(total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threads

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) {
    if (*flag == 0) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("WAVESENSE_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw ConfigError(std::string("WAVESENSE_THREADS must be a positive integer, got '") +
                        env + "'");
    }
    return static_cast<std::size_t>(v);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(Network<float> network, TrainConfig config)
    : net_(std::move(network)), config_(std::move(config)) {
  config_.validate();
  adam_ = Adam<float>(net_.parameters(), config_.lr, config_.beta1, config_.beta2,
                      config_.eps);
  state_.seed = config_.seed;
}

void Trainer::restore(const Adam<float>& adam, const TrainingState& state) {
  if (adam.first_moment().size() != net_.parameters().size()) {
    throw IncompatibleCheckpoint("optimizer state does not match the network");
  }
  // Hyperparameters come from this trainer's config; moments and step from `adam`.
  Adam<float> fresh(net_.parameters(), config_.lr, config_.beta1, config_.beta2,
                    config_.eps);
  fresh.first_moment() = adam.first_moment();
  fresh.second_moment() = adam.second_moment();
  fresh.set_steps(adam.steps());
  adam_ = std::move(fresh);
  state_ = state;
  running_ = {};
}

std::vector<std::size_t> Trainer::epoch_order(std::uint64_t epoch, std::size_t size) const {
  std::vector<std::size_t> order(size);
  for (std::size_t i = 0; i < size; ++i) order[i] = i;
  std::seed_seq seq{static_cast<std::uint32_t>(state_.seed),
                    static_cast<std::uint32_t>(state_.seed >> 32),
                    static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  // Fisher-Yates with explicit draws; std::shuffle is not portable across
  // standard libraries.
  for (std::size_t i = size; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<std::size_t> Trainer::next_batch(std::size_t train_size) const {
  const auto order = epoch_order(state_.epoch, train_size);
  const std::size_t begin = state_.step_in_epoch * config_.batch_size;
  if (begin >= train_size) return {};
  const std::size_t end = std::min(train_size, begin + config_.batch_size);
  return {order.begin() + static_cast<std::ptrdiff_t>(begin),
          order.begin() + static_cast<std::ptrdiff_t>(end)};
}

Trainer::Batch Trainer::batch_gradient(const std::vector<LabeledRaster>& data,
                                       const std::vector<std::size_t>& indices) const {
  if (indices.empty()) throw UsageError("empty minibatch");
  const std::size_t n = indices.size();
  Batch batch;
  batch.samples = n;
  std::vector<SampleResult> results;
  std::mutex merge_mutex;
  const bool ordered = config_.deterministic || config_.threads == 1;
  if (ordered) results.resize(n);

  parallel_for(n, config_.threads, [&](std::size_t i) {
    SampleResult r = sample_gradient(net_, data[indices[i]], config_.alpha);
    if (ordered) {
      results[i] = std::move(r);
      return;
    }
    std::lock_guard lock(merge_mutex);
    results.push_back(std::move(r));
  });

  // Reduce in sample order (or completion order when unordered).
  for (std::size_t i = 0; i < results.size(); ++i) {
    SampleResult& r = results[i];
    if (i == 0) {
      batch.grads = std::move(r.grads);
      batch.layer_spikes.assign(r.layer_spikes.size(), 0);
    } else {
      batch.grads.accumulate(r.grads);
    }
    batch.loss += r.loss;
    batch.correct += r.correct ? 1 : 0;
    batch.excess += r.excess;
    for (std::size_t l = 0; l < r.layer_spikes.size(); ++l) {
      batch.layer_spikes[l] += r.layer_spikes[l];
    }
    batch.bins += data[indices[i]].raster.bins();
  }
  batch.loss /= static_cast<double>(n);
  batch.grads.scale(1.0f / static_cast<float>(n));
  batch.grad_norm = batch.grads.global_norm();
  if (config_.grad_clip > 0.0 && batch.grad_norm > config_.grad_clip) {
    batch.grads.scale(static_cast<float>(config_.grad_clip / batch.grad_norm));
  }
  return batch;
}

std::size_t Trainer::run_steps(const std::vector<LabeledRaster>& train,
                               std::size_t max_steps) {
  if (train.empty()) throw InvalidInput("training split is empty");
  std::size_t taken = 0;
  while (taken < max_steps) {
    const auto indices = next_batch(train.size());
    if (indices.empty()) break;
    Batch b = batch_gradient(train, indices);
    if (!std::isfinite(b.loss) || !std::isfinite(b.grad_norm)) {
      throw SimulationDiverged("non-finite loss or gradient at epoch " +
                               std::to_string(state_.epoch) + ", step " +
                               std::to_string(state_.step_in_epoch));
    }
    adam_.step(net_.parameters(), b.grads);
    ++state_.step_in_epoch;
    ++taken;

    running_.loss += b.loss * static_cast<double>(b.samples);
    running_.correct += b.correct;
    running_.samples += b.samples;
    running_.bins += b.bins;
    running_.excess += b.excess;
    if (running_.spikes.empty()) running_.spikes.assign(b.layer_spikes.size(), 0);
    for (std::size_t l = 0; l < b.layer_spikes.size(); ++l) {
      running_.spikes[l] += b.layer_spikes[l];
    }
  }
  return taken;
}

namespace {

void fill_rates(EpochMetrics& m, const Network<float>& net,
                const std::vector<std::uint64_t>& spikes, std::uint64_t excess,
                std::size_t bins) {
  m.layers = net.layer_names();
  const auto widths = net.layer_widths();
  m.spike_rate.assign(widths.size(), 0.0);
  if (bins == 0) return;
  for (std::size_t l = 0; l < widths.size() && l < spikes.size(); ++l) {
    m.spike_rate[l] = static_cast<double>(spikes[l]) / (static_cast<double>(bins) * widths[l]);
  }
  m.excess_per_neuron_bin =
      static_cast<double>(excess) / (static_cast<double>(bins) * net.neuron_count());
}

}  // namespace

EpochMetrics Trainer::train_epoch(const std::vector<LabeledRaster>& train) {
  run_steps(train, static_cast<std::size_t>(-1));
  EpochMetrics m;
  m.epoch = state_.epoch;
  m.split = "train";
  m.samples = running_.samples;
  if (running_.samples > 0) {
    m.loss = running_.loss / static_cast<double>(running_.samples);
    m.accuracy = static_cast<double>(running_.correct) / static_cast<double>(running_.samples);
  }
  fill_rates(m, net_, running_.spikes, running_.excess, running_.bins);
  ++state_.epoch;
  state_.step_in_epoch = 0;
  running_ = {};
  return m;
}

EpochMetrics Trainer::evaluate(const std::vector<LabeledRaster>& data,
                               const std::string& split) const {
  EpochMetrics m;
  m.epoch = state_.epoch;
  m.split = split;
  m.samples = data.size();
  if (data.empty()) return m;
  std::vector<double> losses(data.size());
  std::vector<std::size_t> correct(data.size());
  std::vector<std::vector<std::uint64_t>> spikes(data.size());
  std::vector<std::uint64_t> excess(data.size());
  parallel_for(data.size(), config_.threads, [&](std::size_t i) {
    const ForwardResult f = net_.forward(data[i].raster, config_.alpha > 0.0);
    const PeakResult peaks = peak_logits(f.trace);
    std::size_t pred = 0;
    for (std::size_t k = 1; k < peaks.logits.size(); ++k) {
      if (peaks.logits[k] > peaks.logits[pred]) pred = k;
    }
    losses[i] = total_loss(f.trace, data[i].label, f.rasters, config_.alpha);
    correct[i] = pred == data[i].label;
    spikes[i] = f.stats.spikes;
    excess[i] = f.stats.total_excess();
  });
  std::vector<std::uint64_t> layer_spikes(spikes.front().size(), 0);
  std::uint64_t total_excess = 0;
  std::size_t bins = 0, hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    m.loss += losses[i];
    hits += correct[i];
    for (std::size_t l = 0; l < layer_spikes.size(); ++l) layer_spikes[l] += spikes[i][l];
    total_excess += excess[i];
    bins += data[i].raster.bins();
  }
  m.loss /= static_cast<double>(data.size());
  m.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  fill_rates(m, net_, layer_spikes, total_excess, bins);
  return m;
}

std::string metrics_json(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["split"] = m.split;
  j["loss"] = m.loss;
  j["accuracy"] = m.accuracy;
  j["samples"] = m.samples;
  j["excess_per_neuron_bin"] = m.excess_per_neuron_bin;
  nlohmann::ordered_json rates = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < m.layers.size() && l < m.spike_rate.size(); ++l) {
    rates[m.layers[l]] = m.spike_rate[l];
  }
  j["spike_rate"] = rates;
  return j.dump();
}

}  // namespace wavesense
