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

// Audio to spike-raster conversion:
//   noise mix -> length standardisation -> peak normalisation ->
//   Mel-spaced 2nd-order Butterworth band-pass bank -> full-wave rectifier ->
//   leak-free integrate-and-fire encoder -> 10 ms binning.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "wavesense/raster.hpp"

namespace wavesense {

inline constexpr double kSampleRate = 16000.0;

struct Waveform {
  std::vector<double> samples;
  double sample_rate = kSampleRate;

  double seconds() const { return samples.size() / sample_rate; }
};

// One second-order section:
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2].
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double center_hz = 0, low_hz = 0, high_hz = 0;

  bool stable() const;
  // |H(e^{j 2 pi f / fs})|.
  double magnitude(double freq_hz, double sample_rate) const;
};

struct BiquadBank {
  std::vector<Biquad> sections;  // ascending centre frequency
  double sample_rate = kSampleRate;

  std::size_t size() const { return sections.size(); }
};

using ChannelSignals = std::vector<std::vector<double>>;

// Spike times at audio rate: one entry per spike (a sample index repeats
// when several spikes are emitted at once).
struct SpikeEvents {
  std::vector<std::vector<std::size_t>> channels;
  std::size_t num_samples = 0;
  double sample_rate = kSampleRate;

  std::uint64_t total() const;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Centres equally spaced in Mel; band edges at the Mel midpoints between
// neighbouring centres and at f_lo / f_hi on the outside. An outer edge at
// or above Nyquist is pulled in to 0.99 * Nyquist.
BiquadBank design_filterbank(std::size_t n = 64, double f_lo = 100.0,
                             double f_hi = 8000.0, double fs = kSampleRate);

ChannelSignals apply_filterbank(const Waveform& w, const BiquadBank& bank);

ChannelSignals rectify(ChannelSignals x);

// Per channel: v += gain * x[n] / fs; floor(v / theta) spikes are emitted
// and subtracted once v >= theta.
SpikeEvents encode_spikes(const ChannelSignals& channels, double gain,
                          double theta = 1.0, double fs = kSampleRate);

SpikeRaster bin_spikes(const SpikeEvents& events, double bin_seconds = 0.01);

// Scale k such that 20 log10(rms(signal) / rms(k * noise)) = snr_db.
double noise_gain(const Waveform& signal, const Waveform& noise, double snr_db);

// signal + k * noise (noise looped or cropped to length), then scaled down
// so that the peak is at most 1. snr_db = +inf adds no noise.
Waveform mix_noise(const Waveform& signal, const Waveform& noise, double snr_db);

// Zero-pads (content centred) or centre-crops to exactly `seconds`.
Waveform standardize_length(const Waveform& w, double seconds);

// Scales so that max |x| = peak; silent input is returned unchanged.
Waveform normalize_peak(const Waveform& w, double peak = 0.95);

double rms(const std::vector<double>& x);

// Encoder gain giving about 300 spikes/s in the best channel for a
// full-scale 1 kHz tone with the default bank.
inline constexpr double kDefaultEncoderGain = 540.0;

struct FrontendConfig {
  std::size_t n_filters = 64;
  double f_lo = 100.0;
  double f_hi = 8000.0;
  double sample_rate = kSampleRate;
  double gain = kDefaultEncoderGain;
  double theta = 1.0;
  double bin_seconds = 0.01;
  double seconds = 5.0;
  double peak = 0.95;
};

// Full pipeline for an already noise-mixed waveform.
SpikeRaster audio_to_raster(const Waveform& w, const BiquadBank& bank,
                            const FrontendConfig& config);

}  // namespace wavesense
