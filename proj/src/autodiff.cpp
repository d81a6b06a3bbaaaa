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

#include "wavesense/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wavesense/error.hpp"
#include "wavesense/neuron.hpp"

namespace wavesense {

// ---------------------------------------------------------------------------
// ParameterSet / GradientMap

template <typename Real>
ParamId ParameterSet<Real>::add(std::string name, std::size_t rows,
                                std::size_t cols) {
  if (find(name)) throw UsageError("duplicate parameter name " + name);
  names_.push_back(std::move(name));
  values_.emplace_back(rows, cols, Real{0});
  return values_.size() - 1;
}

template <typename Real>
std::optional<ParamId> ParameterSet<Real>::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

template <typename Real>
std::size_t ParameterSet<Real>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

template <typename Real>
std::vector<Tensor2<Real>> ParameterSet<Real>::zeros_like() const {
  std::vector<Tensor2<Real>> out;
  out.reserve(values_.size());
  for (const auto& v : values_) out.emplace_back(v.rows(), v.cols(), Real{0});
  return out;
}

template <typename Real>
void GradientMap<Real>::accumulate(const GradientMap& other) {
  if (other.tensors.size() != tensors.size()) {
    throw UsageError("gradient maps have different layouts");
  }
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    auto& dst = tensors[p].data();
    const auto& src = other.tensors[p].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

template <typename Real>
void GradientMap<Real>::scale(Real factor) {
  for (auto& t : tensors) {
    for (auto& x : t.data()) x *= factor;
  }
}

template <typename Real>
double GradientMap<Real>::global_norm() const {
  double sq = 0.0;
  for (const auto& t : tensors) {
    for (Real x : t.data()) sq += static_cast<double>(x) * x;
  }
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------
// Surrogate gradient

double surrogate_gradient(double v_pre, const SurrogateParams& sp) {
  const double theta = sp.theta;
  double distance;
  if (v_pre <= 0.5 * theta) {
    distance = theta - v_pre;
  } else {
    const double nearest = std::max(1.0, std::round(v_pre / theta));
    distance = std::abs(v_pre - nearest * theta);
  }
  return std::exp(-distance / (theta * sp.window));
}

// ---------------------------------------------------------------------------
// Tape: recording

template <typename Real>
const typename Tape<Real>::Node& Tape<Real>::node(NodeId id) const {
  if (id >= nodes_.size()) throw UsageError("node id not recorded on tape");
  return nodes_[id];
}

template <typename Real>
NodeId Tape<Real>::push(Node n) {
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename Real>
NodeId Tape<Real>::constant(Tensor2<Real> value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::matmul(ParamId weight, NodeId x) {
  const auto& w = params_->value(weight);
  const auto& in = node(x).value;
  if (w.cols() != in.cols()) {
    throw InvalidInput("matmul: weight " + params_->name(weight) +
                       " expects width " + std::to_string(w.cols()) +
                       ", got " + std::to_string(in.cols()));
  }
  Node n;
  n.op = Op::kMatMul;
  n.inputs = {x};
  n.param = weight;
  n.requires_grad = true;
  n.value = Tensor2<Real>(in.rows(), w.rows());
  for (std::size_t t = 0; t < in.rows(); ++t) {
    detail::matvec<Real, Real>(w, in.row(t), n.value.row(t));
  }
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::add_bias(NodeId x, ParamId bias) {
  const auto& b = params_->value(bias);
  const auto& in = node(x).value;
  if (b.rows() != 1 || b.cols() != in.cols()) {
    throw InvalidInput("add_bias: shape mismatch for " + params_->name(bias));
  }
  Node n;
  n.op = Op::kAddBias;
  n.inputs = {x};
  n.param = bias;
  n.requires_grad = true;
  n.value = in;
  for (std::size_t t = 0; t < in.rows(); ++t) {
    auto row = n.value.row(t);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b(0, c);
  }
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::add(NodeId a, NodeId b) {
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw InvalidInput("add: shape mismatch");
  }
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a, b};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.value = va;
  auto& out = n.value.data();
  const auto& rhs = vb.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::exp_filter(NodeId x, Real decay) {
  const auto& in = node(x).value;
  Node n;
  n.op = Op::kExpFilter;
  n.inputs = {x};
  n.decay = decay;
  n.requires_grad = node(x).requires_grad;
  n.value = Tensor2<Real>(in.rows(), in.cols());
  for (std::size_t t = 0; t < in.rows(); ++t) {
    const auto src = in.row(t);
    auto dst = n.value.row(t);
    if (t == 0) {
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = decay * Real{0} + src[c];
    } else {
      const auto prev = n.value.row(t - 1);
      for (std::size_t c = 0; c < dst.size(); ++c) {
        dst[c] = decay * prev[c] + src[c];
      }
    }
  }
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::spike(NodeId drive, const SpikeNodeConfig<Real>& config) {
  const auto& in = node(drive).value;
  Node n;
  n.op = Op::kSpike;
  n.inputs = {drive};
  n.spike = config;
  n.requires_grad = node(drive).requires_grad;
  if (config.mode == SpikeMode::kSubthreshold) {
    n.value = in;
    return push(std::move(n));
  }
  n.value = Tensor2<Real>(in.rows(), in.cols());
  n.saved = Tensor2<Real>(in.rows(), in.cols());
  std::vector<Real> refractory(in.cols(), Real{0});
  for (std::size_t t = 0; t < in.rows(); ++t) {
    const auto u = in.row(t);
    auto out = n.value.row(t);
    auto pre = n.saved.row(t);
    for (std::size_t c = 0; c < u.size(); ++c) {
      refractory[c] = config.membrane_decay * refractory[c];
      const Real v = u[c] + refractory[c];
      if (std::isnan(v)) throw SimulationDiverged("NaN membrane potential");
      pre[c] = v;
      const std::uint32_t count = spike_count(v, config.theta);
      out[c] = static_cast<Real>(count);
      if (count > 0) refractory[c] -= static_cast<Real>(count) * config.theta;
    }
  }
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::peak_cross_entropy(NodeId trace, std::size_t label) {
  const auto& y = node(trace).value;
  if (y.rows() == 0 || y.cols() == 0) throw InvalidInput("empty output trace");
  if (label >= y.cols()) throw InvalidInput("label out of range");
  Node n;
  n.op = Op::kPeakCrossEntropy;
  n.inputs = {trace};
  n.label = label;
  n.requires_grad = node(trace).requires_grad;
  n.peaks.assign(y.cols(), 0);
  std::vector<double> logits(y.cols());
  for (std::size_t c = 0; c < y.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < y.rows(); ++t) {
      if (y(t, c) > y(best, c)) best = t;
    }
    n.peaks[c] = best;
    logits[c] = static_cast<double>(y(best, c));
    if (!std::isfinite(logits[c])) throw SimulationDiverged("non-finite logit");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  const double log_norm = top + std::log(total);
  n.saved = Tensor2<Real>(1, y.cols());
  for (std::size_t c = 0; c < y.cols(); ++c) {
    n.saved(0, c) = static_cast<Real>(std::exp(logits[c] - log_norm));
  }
  n.value = Tensor2<Real>(1, 1, static_cast<Real>(log_norm - logits[label]));
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::activity_penalty(std::vector<NodeId> spike_nodes) {
  if (spike_nodes.empty()) throw InvalidInput("activity penalty needs layers");
  double excess = 0.0;
  std::size_t neurons = 0;
  const std::size_t bins = node(spike_nodes.front()).value.rows();
  bool requires_grad = false;
  for (NodeId id : spike_nodes) {
    const Node& s = node(id);
    if (s.op != Op::kSpike) throw UsageError("activity penalty on non-spike node");
    if (s.value.rows() != bins) throw InvalidInput("layers differ in length");
    neurons += s.value.cols();
    requires_grad = requires_grad || s.requires_grad;
    for (Real count : s.value.data()) {
      if (count >= Real{2}) excess += static_cast<double>(count);
    }
  }
  if (bins == 0 || neurons == 0) throw InvalidInput("empty activity");
  const double ratio = excess / (static_cast<double>(bins) * neurons);
  Node n;
  n.op = Op::kActivityPenalty;
  n.inputs = std::move(spike_nodes);
  n.requires_grad = requires_grad;
  n.aux = static_cast<Real>(ratio);
  n.value = Tensor2<Real>(1, 1, static_cast<Real>(ratio * ratio));
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::mean_square(NodeId x) {
  const auto& in = node(x).value;
  if (in.empty()) throw InvalidInput("mean_square of an empty value");
  double sq = 0.0;
  for (Real v : in.data()) sq += static_cast<double>(v) * v;
  Node n;
  n.op = Op::kMeanSquare;
  n.inputs = {x};
  n.requires_grad = node(x).requires_grad;
  n.value = Tensor2<Real>(1, 1, static_cast<Real>(0.5 * sq / in.size()));
  return push(std::move(n));
}

template <typename Real>
NodeId Tape<Real>::weighted_sum(std::vector<std::pair<NodeId, Real>> terms) {
  Node n;
  n.op = Op::kWeightedSum;
  Real total{0};
  for (const auto& [id, w] : terms) {
    const Node& t = node(id);
    if (t.value.size() != 1) throw InvalidInput("weighted_sum of non-scalar");
    total += w * t.value(0, 0);
    n.inputs.push_back(id);
    n.coeffs.push_back(w);
    n.requires_grad = n.requires_grad || t.requires_grad;
  }
  n.value = Tensor2<Real>(1, 1, total);
  return push(std::move(n));
}

template <typename Real>
Real Tape<Real>::scalar(NodeId id) const {
  const Node& n = node(id);
  if (n.value.size() != 1) throw UsageError("node is not a scalar");
  return n.value(0, 0);
}

template <typename Real>
const Tensor2<Real>& Tape<Real>::pre_spike(NodeId id) const {
  const Node& n = node(id);
  if (n.op != Op::kSpike) throw UsageError("not a spike node");
  return n.spike.mode == SpikeMode::kSubthreshold ? n.value : n.saved;
}

template <typename Real>
const std::vector<std::size_t>& Tape<Real>::peak_times(NodeId id) const {
  const Node& n = node(id);
  if (n.op != Op::kPeakCrossEntropy) throw UsageError("not a peak loss node");
  return n.peaks;
}

// ---------------------------------------------------------------------------
// Tape: backward

template <typename Real>
GradientMap<Real> Tape<Real>::backward(NodeId loss) const {
  if (nodes_.empty()) throw UsageError("backward() on an empty tape");
  if (node(loss).value.size() != 1) throw UsageError("loss must be a scalar");

  GradientMap<Real> grads{params_->zeros_like()};
  std::vector<Tensor2<Real>> adj(loss + 1);
  auto adjoint = [&](NodeId id) -> Tensor2<Real>& {
    auto& a = adj[id];
    if (a.empty()) a = Tensor2<Real>(nodes_[id].value.rows(), nodes_[id].value.cols());
    return a;
  };
  adjoint(loss)(0, 0) = Real{1};

  for (NodeId id = loss + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (adj[id].empty() || !n.requires_grad) continue;
    const Tensor2<Real>& g = adj[id];

    switch (n.op) {
      case Op::kConstant:
        break;

      case Op::kMatMul: {
        const auto& x = nodes_[n.inputs[0]].value;
        const auto& w = params_->value(n.param);
        auto& dw = grads.tensors[n.param];
        const bool need_dx = nodes_[n.inputs[0]].requires_grad;
        Tensor2<Real>* dx = need_dx ? &adjoint(n.inputs[0]) : nullptr;
        for (std::size_t t = 0; t < x.rows(); ++t) {
          const auto gy = g.row(t);
          const auto xt = x.row(t);
          for (std::size_t o = 0; o < w.rows(); ++o) {
            const Real go = gy[o];
            if (go == Real{0}) continue;
            auto dwo = dw.row(o);
            for (std::size_t i = 0; i < xt.size(); ++i) {
              if (xt[i] != Real{0}) dwo[i] += go * xt[i];
            }
            if (dx) {
              auto dxt = dx->row(t);
              const auto wo = w.row(o);
              for (std::size_t i = 0; i < wo.size(); ++i) dxt[i] += wo[i] * go;
            }
          }
        }
        break;
      }

      case Op::kAddBias: {
        auto& db = grads.tensors[n.param];
        for (std::size_t t = 0; t < g.rows(); ++t) {
          const auto gt = g.row(t);
          for (std::size_t c = 0; c < gt.size(); ++c) db(0, c) += gt[c];
        }
        if (nodes_[n.inputs[0]].requires_grad) {
          auto& dx = adjoint(n.inputs[0]).data();
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g.data()[i];
        }
        break;
      }

      case Op::kAdd:
        for (NodeId in : n.inputs) {
          if (!nodes_[in].requires_grad) continue;
          auto& dx = adjoint(in).data();
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g.data()[i];
        }
        break;

      case Op::kExpFilter: {
        if (!nodes_[n.inputs[0]].requires_grad) break;
        auto& dx = adjoint(n.inputs[0]);
        std::vector<Real> carry(g.cols(), Real{0});
        for (std::size_t t = g.rows(); t-- > 0;) {
          const auto gt = g.row(t);
          auto dxt = dx.row(t);
          for (std::size_t c = 0; c < carry.size(); ++c) {
            carry[c] = n.decay * carry[c] + gt[c];
            dxt[c] += carry[c];
          }
        }
        break;
      }

      case Op::kSpike: {
        auto& dx = adjoint(n.inputs[0]).data();
        if (n.spike.mode == SpikeMode::kSubthreshold) {
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g.data()[i];
          break;
        }
        const SurrogateParams sp{static_cast<double>(n.spike.theta),
                                 n.spike.window};
        const auto& pre = n.saved.data();
        for (std::size_t i = 0; i < dx.size(); ++i) {
          const Real gi = g.data()[i];
          if (gi == Real{0}) continue;
          dx[i] += gi * static_cast<Real>(surrogate_gradient(pre[i], sp));
        }
        break;
      }

      case Op::kPeakCrossEntropy: {
        auto& dy = adjoint(n.inputs[0]);
        const Real upstream = g(0, 0);
        for (std::size_t c = 0; c < n.peaks.size(); ++c) {
          const Real target = c == n.label ? Real{1} : Real{0};
          dy(n.peaks[c], c) += upstream * (n.saved(0, c) - target);
        }
        break;
      }

      case Op::kActivityPenalty: {
        std::size_t neurons = 0;
        for (NodeId in : n.inputs) neurons += nodes_[in].value.cols();
        const double cells =
            static_cast<double>(nodes_[n.inputs.front()].value.rows()) * neurons;
        // d/dN of N * H(N - 1) with the Heaviside held fixed.
        const Real slope =
            g(0, 0) * static_cast<Real>(2.0 * static_cast<double>(n.aux) / cells);
        for (NodeId in : n.inputs) {
          if (!nodes_[in].requires_grad) continue;
          const auto& counts = nodes_[in].value.data();
          auto& dx = adjoint(in).data();
          for (std::size_t i = 0; i < dx.size(); ++i) {
            if (counts[i] >= Real{2}) dx[i] += slope;
          }
        }
        break;
      }

      case Op::kMeanSquare: {
        const auto& x = nodes_[n.inputs[0]].value.data();
        auto& dx = adjoint(n.inputs[0]).data();
        const Real scale = g(0, 0) / static_cast<Real>(x.size());
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += scale * x[i];
        break;
      }

      case Op::kWeightedSum:
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          if (!nodes_[n.inputs[k]].requires_grad) continue;
          adjoint(n.inputs[k])(0, 0) += n.coeffs[k] * g(0, 0);
        }
        break;
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Finite differences

FiniteDiffReport finite_diff_check(ParameterSet<double>& params,
                                   const GradientMap<double>& analytic,
                                   const std::function<double()>& loss,
                                   double eps, double fraction,
                                   std::mt19937_64& rng,
                                   std::size_t min_checked) {
  if (!(eps >= 1e-6 && eps <= 1e-2)) {
    throw InvalidParameter("finite-difference step must lie in [1e-6, 1e-2]");
  }
  std::vector<std::pair<ParamId, std::size_t>> all;
  for (ParamId p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params.value(p).size(); ++i) all.emplace_back(p, i);
  }
  std::shuffle(all.begin(), all.end(), rng);
  std::size_t take = static_cast<std::size_t>(std::ceil(fraction * all.size()));
  take = std::min(all.size(), std::max(take, min_checked));

  FiniteDiffReport report;
  for (std::size_t k = 0; k < take; ++k) {
    const auto [p, i] = all[k];
    double& w = params.value(p).data()[i];
    const double saved = w;
    w = saved + eps;
    const double up = loss();
    w = saved - eps;
    const double down = loss();
    w = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double exact = analytic.tensors[p].data()[i];
    const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
    const double rel = std::abs(numeric - exact) / denom;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = k;
    }
    ++report.checked;
  }
  return report;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template struct GradientMap<float>;
template struct GradientMap<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace wavesense
