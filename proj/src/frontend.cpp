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

#include "wavesense/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "wavesense/error.hpp"

namespace wavesense {

bool Biquad::stable() const {
  // Both poles of z^2 + a1 z + a2 inside the unit circle (Jury criterion).
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

double Biquad::magnitude(double freq_hz, double sample_rate) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

std::uint64_t SpikeEvents::total() const {
  std::uint64_t n = 0;
  for (const auto& c : channels) n += c.size();
  return n;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

BiquadBank design_filterbank(std::size_t n, double f_lo, double f_hi, double fs) {
  if (n == 0) throw DesignError("filterbank needs at least one band");
  if (!(f_lo > 0.0) || !(f_lo < f_hi)) throw DesignError("need 0 < f_lo < f_hi");
  const double nyquist = fs / 2.0;
  if (f_hi > nyquist) {
    throw DesignError("f_hi " + std::to_string(f_hi) + " Hz is above Nyquist");
  }
  const double edge_limit = 0.99 * nyquist;
  const double m_lo = hz_to_mel(f_lo);
  const double step = (hz_to_mel(f_hi) - m_lo) / static_cast<double>(n);
  const double k = 2.0 * fs;
  auto prewarp = [&](double f) { return k * std::tan(std::numbers::pi * f / fs); };

  BiquadBank bank;
  bank.sample_rate = fs;
  for (std::size_t i = 0; i < n; ++i) {
    Biquad s;
    s.low_hz = mel_to_hz(m_lo + step * static_cast<double>(i));
    s.high_hz = std::min(mel_to_hz(m_lo + step * static_cast<double>(i + 1)), edge_limit);
    s.center_hz = mel_to_hz(m_lo + step * (static_cast<double>(i) + 0.5));
    if (s.center_hz >= edge_limit || s.high_hz <= s.center_hz || s.low_hz >= s.center_hz) {
      throw DesignError("band " + std::to_string(i) + " does not fit below Nyquist");
    }
    // First-order Butterworth low-pass prototype mapped to a band-pass:
    // H(s) = B s / (s^2 + B s + W0^2), W0^2 = W_lo W_hi, then bilinear.
    const double w_lo = prewarp(s.low_hz);
    const double w_hi = prewarp(s.high_hz);
    const double bw = w_hi - w_lo;
    const double w0_sq = w_lo * w_hi;
    const double a0 = k * k + bw * k + w0_sq;
    s.b0 = bw * k / a0;
    s.b1 = 0.0;
    s.b2 = -bw * k / a0;
    s.a1 = (2.0 * w0_sq - 2.0 * k * k) / a0;
    s.a2 = (k * k - bw * k + w0_sq) / a0;
    if (!s.stable()) throw DesignError("unstable section " + std::to_string(i));
    bank.sections.push_back(s);
  }
  return bank;
}

ChannelSignals apply_filterbank(const Waveform& w, const BiquadBank& bank) {
  if (w.sample_rate != bank.sample_rate) {
    throw InvalidInput("waveform sample rate " + std::to_string(w.sample_rate) +
                       " does not match the filterbank");
  }
  ChannelSignals out(bank.size(), std::vector<double>(w.samples.size()));
  for (std::size_t c = 0; c < bank.size(); ++c) {
    const Biquad& s = bank.sections[c];
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    auto& y = out[c];
    for (std::size_t n = 0; n < w.samples.size(); ++n) {
      const double x0 = w.samples[n];
      const double y0 = s.b0 * x0 + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
      y[n] = y0;
      x2 = x1;
      x1 = x0;
      y2 = y1;
      y1 = y0;
    }
  }
  return out;
}

ChannelSignals rectify(ChannelSignals x) {
  for (auto& ch : x) {
    for (double& v : ch) v = std::abs(v);
  }
  return x;
}

SpikeEvents encode_spikes(const ChannelSignals& channels, double gain,
                          double theta, double fs) {
  if (!(gain > 0.0)) throw InvalidParameter("encoder gain must be positive");
  if (!(theta > 0.0)) throw InvalidParameter("encoder threshold must be positive");
  SpikeEvents events;
  events.sample_rate = fs;
  events.num_samples = channels.empty() ? 0 : channels.front().size();
  events.channels.resize(channels.size());
  const double scale = gain / fs;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    double v = 0.0;
    for (std::size_t n = 0; n < channels[c].size(); ++n) {
      v += scale * channels[c][n];
      if (v >= theta) {
        const auto count = static_cast<std::size_t>(std::floor(v / theta));
        v -= static_cast<double>(count) * theta;
        events.channels[c].insert(events.channels[c].end(), count, n);
      }
    }
  }
  return events;
}

SpikeRaster bin_spikes(const SpikeEvents& events, double bin_seconds) {
  if (!(bin_seconds > 0.0)) throw InvalidParameter("bin width must be positive");
  const double samples_per_bin = bin_seconds * events.sample_rate;
  const auto bins = static_cast<std::size_t>(
      std::ceil(static_cast<double>(events.num_samples) / samples_per_bin - 1e-9));
  SpikeRaster raster(events.channels.size(), bins, static_cast<float>(bin_seconds));
  for (std::size_t c = 0; c < events.channels.size(); ++c) {
    for (std::size_t n : events.channels[c]) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>(n / samples_per_bin));
      ++raster.at(c, b);
    }
  }
  return raster;
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::sqrt(sq / static_cast<double>(x.size()));
}

namespace {

std::vector<double> fit_noise(const Waveform& noise, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = noise.samples[i % noise.samples.size()];
  return out;
}

}  // namespace

double noise_gain(const Waveform& signal, const Waveform& noise, double snr_db) {
  const double s = rms(signal.samples);
  if (!(s > 0.0)) throw MixingError("cannot mix noise into a silent signal");
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (noise.samples.empty()) throw MixingError("noise clip is empty");
  const double n = rms(fit_noise(noise, signal.samples.size()));
  if (!(n > 0.0)) throw MixingError("noise clip is silent");
  return s / (n * std::pow(10.0, snr_db / 20.0));
}

Waveform mix_noise(const Waveform& signal, const Waveform& noise, double snr_db) {
  if (!std::isinf(snr_db) && signal.sample_rate != noise.sample_rate) {
    throw MixingError("signal and noise sample rates differ");
  }
  const double k = noise_gain(signal, noise, snr_db);
  Waveform out = signal;
  if (k > 0.0) {
    const auto n = fit_noise(noise, signal.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += k * n[i];
  }
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    for (double& v : out.samples) v /= peak;
  }
  return out;
}

Waveform standardize_length(const Waveform& w, double seconds) {
  if (!(seconds > 0.0)) throw InvalidParameter("target length must be positive");
  const auto target = static_cast<std::size_t>(std::llround(seconds * w.sample_rate));
  Waveform out{std::vector<double>(target, 0.0), w.sample_rate};
  const std::size_t len = w.samples.size();
  if (len <= target) {
    const std::size_t offset = (target - len) / 2;
    std::copy(w.samples.begin(), w.samples.end(), out.samples.begin() + offset);
  } else {
    const std::size_t offset = (len - target) / 2;
    std::copy(w.samples.begin() + offset, w.samples.begin() + offset + target,
              out.samples.begin());
  }
  return out;
}

Waveform normalize_peak(const Waveform& w, double peak) {
  double top = 0.0;
  for (double v : w.samples) top = std::max(top, std::abs(v));
  Waveform out = w;
  if (top > 0.0) {
    for (double& v : out.samples) v *= peak / top;
  }
  return out;
}

SpikeRaster audio_to_raster(const Waveform& w, const BiquadBank& bank,
                            const FrontendConfig& config) {
  if (w.sample_rate != config.sample_rate) {
    throw InvalidInput("expected " + std::to_string(config.sample_rate) +
                       " Hz audio, got " + std::to_string(w.sample_rate));
  }
  const Waveform shaped = normalize_peak(standardize_length(w, config.seconds), config.peak);
  const ChannelSignals filtered = rectify(apply_filterbank(shaped, bank));
  return bin_spikes(encode_spikes(filtered, config.gain, config.theta, w.sample_rate),
                    config.bin_seconds);
}

}  // namespace wavesense
