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

#include "wavesense/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "wavesense/error.hpp"
#include "wavesense/losses.hpp"
#include "wavesense/trainer.hpp"

namespace fs = std::filesystem;

namespace wavesense {

std::size_t classify_trace(const OutputTrace& trace) {
  const PeakResult peaks = peak_logits(trace);
  std::size_t best = 0;
  for (std::size_t k = 1; k < peaks.logits.size(); ++k) {
    if (peaks.logits[k] > peaks.logits[best]) best = k;
  }
  return best;
}

std::size_t classify_clip(const Network<float>& net, const SpikeRaster& raster) {
  return classify_trace(net.forward(raster).trace);
}

OutputTrace stream_trace(const Network<float>& net, const SpikeRaster& stream) {
  if (stream.channels() != net.config().n_channels_in) {
    throw InvalidInput("stream has " + std::to_string(stream.channels()) +
                       " channels, network expects " +
                       std::to_string(net.config().n_channels_in));
  }
  NetworkStream<float> runner(net);
  OutputTrace trace;
  trace.dt = stream.dt;
  trace.values = Tensor2<double>(net.config().n_classes, stream.bins());
  std::vector<std::uint32_t> column(stream.channels());
  for (std::size_t t = 0; t < stream.bins(); ++t) {
    for (std::size_t c = 0; c < stream.channels(); ++c) column[c] = stream.at(c, t);
    const auto y = runner.step(column);
    for (std::size_t k = 0; k < y.size(); ++k) trace.values(k, t) = y[k];
  }
  return trace;
}

std::vector<Detection> detect_on_trace(const OutputTrace& trace, double threshold,
                                       double lockout) {
  if (std::isnan(threshold)) throw InvalidParameter("threshold must not be NaN");
  if (!(lockout >= 0.0)) throw InvalidParameter("lockout must be >= 0");
  std::vector<Detection> out;
  const double dt = trace.dt;
  for (std::size_t k = 0; k < trace.classes(); ++k) {
    const auto row = trace.values.row(k);
    bool above = false;
    std::optional<double> last;
    for (std::size_t t = 0; t < row.size(); ++t) {
      const bool now = row[t] >= threshold;
      if (now && !above) {
        const double time = static_cast<double>(t) * dt;
        if (!last || time - *last >= lockout) {
          out.push_back({k, time, row[t]});
          last = time;
        }
      }
      above = now;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.time < b.time;
  });
  return out;
}

std::vector<Detection> stream_detect(const Network<float>& net, const SpikeRaster& stream,
                                     double threshold, double lockout) {
  return detect_on_trace(stream_trace(net, stream), threshold, lockout);
}

DetectionMetrics compute_frr_faph(const std::vector<Detection>& detections,
                                  const std::vector<StreamLabel>& labels,
                                  double stream_hours, double match_window) {
  if (!(stream_hours > 0.0)) throw InvalidParameter("stream_hours must be positive");
  if (!(match_window >= 0.0)) throw InvalidParameter("match_window must be >= 0");
  auto inside = [&](const Detection& d, const StreamLabel& l) {
    return d.cls == l.cls && d.time >= l.start - match_window &&
           d.time <= l.end + match_window;
  };
  DetectionMetrics m;
  m.keywords = labels.size();
  for (const auto& l : labels) {
    if (!(l.start < l.end)) throw InvalidInput("stream label needs start < end");
    m.hits += std::any_of(detections.begin(), detections.end(),
                          [&](const Detection& d) { return inside(d, l); });
  }
  for (const auto& d : detections) {
    m.false_alarms += std::none_of(labels.begin(), labels.end(),
                                   [&](const StreamLabel& l) { return inside(d, l); });
  }
  m.frr = m.keywords ? static_cast<double>(m.keywords - m.hits) / m.keywords : 0.0;
  m.faph = static_cast<double>(m.false_alarms) / stream_hours;
  return m;
}

std::vector<double> threshold_grid(const OutputTrace& trace, std::size_t points) {
  if (trace.values.empty()) throw InvalidInput("empty trace");
  if (points < 2) throw InvalidParameter("threshold grid needs at least 2 points");
  const auto [lo_it, hi_it] =
      std::minmax_element(trace.values.data().begin(), trace.values.data().end());
  const double lo = *lo_it, hi = *hi_it;
  // Top point sits just above the maximum so the strictest threshold detects nothing.
  const double top = hi + std::max(1e-6, 1e-6 * std::abs(hi));
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = top - (top - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

SweepResult threshold_sweep(const OutputTrace& trace, const std::vector<StreamLabel>& labels,
                            double target_faph, const std::vector<double>& grid,
                            double lockout, double match_window) {
  if (grid.empty()) throw InvalidParameter("empty threshold grid");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double hours = trace.bins() * static_cast<double>(trace.dt) / 3600.0;
  SweepResult result;
  bool found = false;
  for (double thr : sorted) {
    const auto dets = detect_on_trace(trace, thr, lockout);
    const DetectionMetrics m = compute_frr_faph(dets, labels, hours, match_window);
    result.table.push_back({thr, m});
    if (m.faph <= target_faph && (!found || m.frr < result.metrics.frr)) {
      found = true;
      result.threshold = thr;
      result.metrics = m;
    }
  }
  result.met_target = found;
  if (!found) {
    result.threshold = result.table.front().threshold;
    result.metrics = result.table.front().metrics;
  }
  return result;
}

SweepResult threshold_sweep(const Network<float>& net, const SpikeRaster& stream,
                            const std::vector<StreamLabel>& labels, double target_faph,
                            double lockout, double match_window) {
  const OutputTrace trace = stream_trace(net, stream);
  return threshold_sweep(trace, labels, target_faph, threshold_grid(trace), lockout,
                         match_window);
}

std::vector<StreamLabel> read_stream_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read labels " + path.string());
  std::vector<StreamLabel> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    long long cls = -1;
    StreamLabel l;
    std::string extra;
    if (!(fields >> cls >> l.start >> l.end) || cls < 0 || (fields >> extra)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected class<TAB>start<TAB>end");
    }
    if (!(l.start < l.end)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": start >= end");
    }
    l.cls = static_cast<std::size_t>(cls);
    out.push_back(l);
  }
  return out;
}

void write_stream_labels(const fs::path& path, const std::vector<StreamLabel>& labels) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write labels " + path.string());
  out.precision(10);
  for (const auto& l : labels) out << l.cls << '\t' << l.start << '\t' << l.end << '\n';
}

SyntheticStream synth_stream(const SyntheticSpec& spec, std::size_t keywords,
                             std::size_t gap_bins, std::uint64_t seed) {
  const auto templates = synth_templates(spec);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, spec.n_classes - 1);
  const std::size_t total = gap_bins + keywords * (spec.bins + gap_bins);
  SyntheticStream s;
  s.raster = SpikeRaster(spec.channels, total);
  const double dt = s.raster.dt;
  std::size_t offset = gap_bins;
  for (std::size_t i = 0; i < keywords; ++i) {
    const std::size_t cls = pick(rng);
    const SpikeRaster kw = synth_sample(templates[cls], spec, rng);
    for (std::size_t c = 0; c < spec.channels; ++c) {
      for (std::size_t t = 0; t < spec.bins; ++t) s.raster.at(c, offset + t) = kw.at(c, t);
    }
    s.labels.push_back({cls, offset * dt, (offset + spec.bins) * dt});
    offset += spec.bins + gap_bins;
  }
  // Background in the gaps; keyword segments already carry their own.
  if (spec.noise_rate > 0) {
    std::poisson_distribution<std::uint32_t> noise(spec.noise_rate);
    std::size_t t = 0;
    for (const auto& l : s.labels) {
      const auto begin = static_cast<std::size_t>(std::llround(l.start / dt));
      for (; t < begin; ++t) {
        for (std::size_t c = 0; c < spec.channels; ++c) s.raster.at(c, t) += noise(rng);
      }
      t = static_cast<std::size_t>(std::llround(l.end / dt));
    }
    for (; t < total; ++t) {
      for (std::size_t c = 0; c < spec.channels; ++c) s.raster.at(c, t) += noise(rng);
    }
  }
  return s;
}

AccuracyReport evaluate_accuracy(const Network<float>& net,
                                 const std::vector<LabeledRaster>& data,
                                 std::size_t threads) {
  std::vector<std::size_t> predicted(data.size());
  parallel_for(data.size(), threads,
               [&](std::size_t i) { predicted[i] = classify_clip(net, data[i].raster); });
  AccuracyReport report;
  report.per_class.resize(net.config().n_classes);
  for (std::size_t k = 0; k < report.per_class.size(); ++k) report.per_class[k].cls = k;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t label = data[i].label;
    if (label >= report.per_class.size()) {
      throw InvalidInput("label " + std::to_string(label) + " exceeds the network's classes");
    }
    const bool ok = predicted[i] == label;
    ++report.total;
    report.correct += ok;
    ++report.per_class[label].total;
    report.per_class[label].correct += ok;
  }
  return report;
}

}  // namespace wavesense
