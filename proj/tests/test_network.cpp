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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wavesense/error.hpp"
#include "wavesense/network.hpp"
#include "wavesense/neuron.hpp"

namespace wavesense {
namespace {

SpikeRaster random_input(std::size_t ch, std::size_t bins, double p, std::uint32_t count,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution fire(p);
  SpikeRaster r(ch, bins);
  for (auto& c : r.counts.data()) c = fire(rng) ? count : 0;
  return r;
}

WaveSenseConfig small_config() {
  WaveSenseConfig c;
  c.n_classes = 3;
  c.n_channels_in = 12;
  c.n_channels_res = 8;
  c.n_channels_skip = 10;
  c.n_hidden = 6;
  c.dilations = {2, 4, 8};
  return c;
}

// Direct per-neuron simulation of the architecture in double, written out
// state variable by state variable.
struct Reference {
  std::vector<SpikeRaster> layers;
  Tensor2<double> trace;  // [classes x bins]
};

Reference reference_forward(const Network<double>& net, const SpikeRaster& in) {
  const WaveSenseConfig& c = net.config();
  const auto& P = net.parameters();
  const auto& ids = net.ids();
  const std::size_t T = in.bins();
  const double as = std::exp(-1.0 / c.tau_s), av = std::exp(-1.0 / c.tau_v);
  const double theta = c.threshold;

  struct Syn {
    const Tensor2<double>* w;
    double decay;
    std::vector<double> i;
  };
  // One spiking layer fed by synapses reading one source raster each.
  auto run_layer = [&](std::vector<std::pair<Syn, const SpikeRaster*>> syns,
                       const Tensor2<double>* bias) {
    const std::size_t width = syns.front().first.w->rows();
    SpikeRaster out(width, T);
    std::vector<double> v(width, 0.0);
    for (auto& [s, src] : syns) s.i.assign(width, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t n = 0; n < width; ++n) {
        double current = bias ? (*bias)(0, n) : 0.0;
        for (auto& [s, src] : syns) {
          double drive = 0.0;
          for (std::size_t j = 0; j < src->channels(); ++j) drive += (*s.w)(n, j) * src->at(j, t);
          s.i[n] = s.decay * s.i[n] + drive;
          current += s.i[n];
        }
        v[n] = av * v[n] + current;
        if (v[n] >= theta) {
          const auto k = static_cast<std::uint32_t>(std::floor(v[n] / theta));
          out.at(n, t) = k;
          v[n] -= k * theta;
        }
      }
    }
    return out;
  };
  auto bias_of = [&](ParamId id) { return c.bias ? &P.value(id) : nullptr; };
  auto add = [](const SpikeRaster& a, const SpikeRaster& b) {
    SpikeRaster r = a;
    for (std::size_t i = 0; i < r.counts.size(); ++i) r.counts.data()[i] += b.counts.data()[i];
    return r;
  };

  Reference ref;
  SpikeRaster residual = run_layer({{{&P.value(ids.in_weight), as, {}}, &in}}, bias_of(ids.in_bias));
  ref.layers.push_back(residual);
  SpikeRaster skip_bus(c.n_channels_skip, T);
  for (std::size_t b = 0; b < c.dilations.size(); ++b) {
    const auto& B = ids.blocks[b];
    const double ad = std::exp(-1.0 / static_cast<double>(c.dilations[b]));
    SpikeRaster l1 = run_layer({{{&P.value(B.fast), as, {}}, &residual},
                                {{&P.value(B.slow), ad, {}}, &residual}},
                               bias_of(B.l1_bias));
    SpikeRaster l2 = run_layer({{{&P.value(B.res), as, {}}, &l1}}, bias_of(B.res_bias));
    SpikeRaster l3 = run_layer({{{&P.value(B.skip), as, {}}, &l1}}, bias_of(B.skip_bias));
    residual = add(residual, l2);
    skip_bus = add(skip_bus, l3);
    ref.layers.push_back(l1);
    ref.layers.push_back(l2);
    ref.layers.push_back(l3);
  }
  SpikeRaster hidden =
      run_layer({{{&P.value(ids.hidden_weight), as, {}}, &skip_bus}}, bias_of(ids.hidden_bias));
  ref.layers.push_back(hidden);
  const double alp = std::exp(-1.0 / c.readout_tau());
  const auto& W = P.value(ids.readout_weight);
  ref.trace = Tensor2<double>(c.n_classes, T);
  std::vector<double> y(c.n_classes, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < c.n_classes; ++k) {
      double d = 0.0;
      for (std::size_t h = 0; h < c.n_hidden; ++h) d += W(k, h) * hidden.at(h, t);
      y[k] = alp * y[k] + d;
      ref.trace(k, t) = y[k];
    }
  }
  return ref;
}

TEST(Config, Validation) {
  WaveSenseConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kernel_size = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.dilations = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.dilations = {2, 0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.n_hidden = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(Network<float>{c}, ConfigError);
}

TEST(Config, TextRoundTrip) {
  WaveSenseConfig c = small_config();
  c.tau_lp = 5.5;
  c.bias = false;
  const auto back = WaveSenseConfig::from(KeyValueConfig::parse(c.to_text()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.hash(), c.hash());
  WaveSenseConfig d = c;
  d.threshold = 1.5;
  EXPECT_NE(d.hash(), c.hash());
}

TEST(Build, MinimalParameterCount) {
  WaveSenseConfig c;
  c.n_classes = 1;
  c.n_channels_in = 1;
  c.n_channels_res = 1;
  c.n_channels_skip = 1;
  c.n_hidden = 1;
  c.dilations = {3};
  c.bias = false;
  EXPECT_EQ(Network<float>(c).parameter_count(), 7u);
  c.bias = true;
  EXPECT_EQ(Network<float>(c).parameter_count(), 12u);
}

TEST(Build, AlohaParameterCount) {
  const WaveSenseConfig c = aloha_config();
  EXPECT_EQ(c.dilations.size(), 12u);
  const Network<float> net(c);
  // input 16*64+16; per block 3*16*16 + 32*16 + 16+16+32; hidden 32*32+32; readout 2*32
  const std::size_t expected = (16 * 64 + 16) + 12 * (3 * 256 + 512 + 64) + (1024 + 32) + 64;
  EXPECT_EQ(net.parameter_count(), expected);
  EXPECT_EQ(expected, 18288u);
  EXPECT_LT(std::abs(static_cast<double>(expected) - 18482.0) / 18482.0, 0.02);
}

TEST(Build, SameSeedSameWeights) {
  const auto a = Network<float>::build(small_config(), 42);
  const auto b = Network<float>::build(small_config(), 42);
  const auto d = Network<float>::build(small_config(), 43);
  EXPECT_EQ(a.parameters(), b.parameters());
  EXPECT_NE(a.parameters(), d.parameters());
}

TEST(TemporalMemory, Examples) {
  EXPECT_DOUBLE_EQ(temporal_memory(heysnips_config()), 150.0);
  WaveSenseConfig c;
  c.dilations = {1};
  EXPECT_DOUBLE_EQ(temporal_memory(c), 2.5);
  EXPECT_DOUBLE_EQ(temporal_memory(aloha_config()), 140.0);
}

TEST(Footprint, Examples) {
  WaveSenseConfig c;
  c.dilations = {16, 1};
  const auto f = state_footprint(c);
  EXPECT_EQ(f[0].wavenet_buffer, 17u);
  EXPECT_EQ(f[0].wavesense_state, 3u);
  EXPECT_EQ(f[1].wavenet_buffer, 2u);
  EXPECT_EQ(f[1].wavesense_state, 3u);
  std::size_t wn = 0, ws = 0;
  for (const auto& l : state_footprint(heysnips_config())) {
    wn += l.wavenet_buffer;
    ws += l.wavesense_state;
  }
  EXPECT_EQ(wn, 68u);
  EXPECT_EQ(ws, 24u);
}

TEST(Forward, MatchesReferenceSimulation) {
  for (bool bias : {false, true}) {
    WaveSenseConfig c = small_config();
    c.bias = bias;
    c.weight_scaling = 1.0;
    auto net = Network<double>::build(c, 8);
    if (bias) {
      std::mt19937_64 rng(1);
      std::normal_distribution<double> n(0.0, 0.1);
      for (ParamId p = 0; p < net.parameters().size(); ++p) {
        if (net.parameters().name(p).ends_with(".bias")) {
          for (double& x : net.parameters().value(p).data()) x = n(rng);
        }
      }
    }
    const SpikeRaster in = random_input(12, 120, 0.2, 2, 4);
    const auto got = net.forward(in, true);
    const Reference ref = reference_forward(net, in);
    ASSERT_EQ(got.rasters.size(), ref.layers.size());
    std::uint64_t total = 0;
    for (std::size_t l = 0; l < ref.layers.size(); ++l) {
      EXPECT_EQ(got.rasters[l], ref.layers[l]) << "layer " << net.layer_names()[l];
      EXPECT_EQ(got.stats.spikes[l], ref.layers[l].total());
      total += ref.layers[l].total();
    }
    EXPECT_GT(ref.layers.back().total(), 0u) << "hidden layer silent, test is vacuous";
    for (std::size_t i = 0; i < ref.trace.size(); ++i) {
      EXPECT_NEAR(got.trace.values.data()[i], ref.trace.data()[i], 1e-9);
    }
    EXPECT_EQ(got.stats.total_spikes(), total);
  }
}

TEST(Forward, ZeroInputZeroOutput) {
  WaveSenseConfig c = small_config();
  c.bias = false;
  const auto net = Network<float>::build(c, 1);
  const auto out = net.forward(SpikeRaster(12, 50));
  EXPECT_EQ(out.stats.total_spikes(), 0u);
  for (double v : out.trace.values.data()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, ChannelMismatch) {
  const auto net = Network<float>::build(small_config(), 1);
  EXPECT_THROW(net.forward(SpikeRaster(11, 10)), InvalidInput);
}

TEST(Forward, ResidualPassThrough) {
  WaveSenseConfig c = small_config();
  c.bias = false;
  c.weight_scaling = 1.0;
  auto net = Network<double>::build(c, 3);
  for (const auto& b : net.ids().blocks) {
    net.parameters().value(b.fast).fill(0.0);
    net.parameters().value(b.slow).fill(0.0);
  }
  const auto out = net.forward(random_input(12, 80, 0.3, 2, 5), true);
  ASSERT_GT(out.rasters[0].total(), 0u);
  // Silent L1 leaves L2 silent, so every block passes its input on unchanged.
  for (std::size_t b = 0; b < c.dilations.size(); ++b) {
    EXPECT_EQ(out.rasters[1 + 3 * b].total(), 0u);
    EXPECT_EQ(out.rasters[2 + 3 * b].total(), 0u);
  }
}

TEST(Forward, ResidualMonotone) {
  WaveSenseConfig c = small_config();
  c.weight_scaling = 1.0;
  auto net = Network<double>::build(c, 6);
  for (const auto& b : net.ids().blocks) {
    for (double& w : net.parameters().value(b.res).data()) w = std::abs(w);
  }
  const SpikeRaster in = random_input(12, 100, 0.3, 2, 6);
  const Reference ref = reference_forward(net, in);
  SpikeRaster residual = ref.layers[0];
  for (std::size_t b = 0; b < c.dilations.size(); ++b) {
    const SpikeRaster& l2 = ref.layers[2 + 3 * b];
    for (std::size_t i = 0; i < residual.counts.size(); ++i) {
      const std::uint32_t next = residual.counts.data()[i] + l2.counts.data()[i];
      EXPECT_GE(next, residual.counts.data()[i]);
      residual.counts.data()[i] = next;
    }
  }
  EXPECT_GE(residual.total(), ref.layers[0].total());
}

TEST(Forward, ReadoutLinearInWeights) {
  WaveSenseConfig c = small_config();
  c.weight_scaling = 1.0;
  auto n1 = Network<double>::build(c, 2);
  auto n2 = n1, mix = n1;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const ParamId r = n1.ids().readout_weight;
  for (double& x : n2.parameters().value(r).data()) x = g(rng);
  const double a = 2.0, b = -0.5;
  for (std::size_t i = 0; i < mix.parameters().value(r).size(); ++i) {
    mix.parameters().value(r).data()[i] =
        a * n1.parameters().value(r).data()[i] + b * n2.parameters().value(r).data()[i];
  }
  const SpikeRaster in = random_input(12, 90, 0.2, 2, 1);
  const auto y1 = n1.forward(in), y2 = n2.forward(in), ym = mix.forward(in);
  ASSERT_GT(y1.stats.spikes.back(), 0u);
  for (std::size_t i = 0; i < ym.trace.values.size(); ++i) {
    EXPECT_NEAR(ym.trace.values.data()[i],
                a * y1.trace.values.data()[i] + b * y2.trace.values.data()[i], 1e-9);
  }
}

TEST(Streaming, BitIdenticalToBatch) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    WaveSenseConfig c = seed == 3 ? heysnips_config() : small_config();
    if (seed == 3) c.n_channels_in = 12;
    c.weight_scaling = 1.0;
    const auto net = Network<float>::build(c, seed);
    const SpikeRaster in = random_input(12, 200, 0.15, 2, seed);
    const auto batch = net.forward(in);
    NetworkStream<float> stream(net);
    std::vector<std::uint32_t> col(12);
    for (std::size_t t = 0; t < in.bins(); ++t) {
      for (std::size_t ch = 0; ch < 12; ++ch) col[ch] = in.at(ch, t);
      const auto y = stream.step(col);
      ASSERT_EQ(y.size(), c.n_classes);
      for (std::size_t k = 0; k < y.size(); ++k) {
        ASSERT_EQ(static_cast<double>(y[k]), batch.trace.values(k, t)) << "t " << t;
      }
    }
    EXPECT_EQ(stream.bins_seen(), in.bins());
    // After a reset the stream replays the same values.
    stream.reset();
    for (std::size_t ch = 0; ch < 12; ++ch) col[ch] = in.at(ch, 0);
    const auto y0 = stream.step(col);
    EXPECT_EQ(static_cast<double>(y0[0]), batch.trace.values(0, 0));
  }
}

// Largest |difference| between two traces at or after `from`, and the last
// bin where it exceeds `level`.
std::pair<double, std::size_t> deviation(const OutputTrace& a, const OutputTrace& b,
                                         std::size_t from, double level) {
  double peak = 0.0;
  std::size_t last = from;
  for (std::size_t t = from; t < a.bins(); ++t) {
    for (std::size_t k = 0; k < a.classes(); ++k) {
      const double d = std::abs(a.values(k, t) - b.values(k, t));
      peak = std::max(peak, d);
      if (d > level) last = t;
    }
  }
  return {peak, last};
}

TEST(Forward, SingleSpikeResponseFadesWithinTemporalMemory) {
  WaveSenseConfig c = heysnips_config();
  c.n_channels_in = 4;
  c.bias = false;
  // Strong enough to reach the readout, below the runaway regime where the
  // residual merge keeps re-amplifying activity.
  c.weight_scaling = 0.4;
  const auto net = Network<double>::build(c, 1);
  SpikeRaster in(4, 400);
  for (std::size_t ch = 0; ch < 4; ++ch) in.at(ch, 10) = 8;
  const auto out = net.forward(in);
  const OutputTrace zero{Tensor2<double>(c.n_classes, 400), 0.01f};
  const auto [peak, _] = deviation(out.trace, zero, 0, 0.0);
  ASSERT_GT(peak, 0.0);
  std::size_t first = 400;
  for (std::size_t t = 0; t < 400 && first == 400; ++t) {
    for (std::size_t k = 0; k < c.n_classes; ++k) {
      if (out.trace.values(k, t) != 0.0) first = t;
    }
  }
  EXPECT_LE(first - 10, static_cast<std::size_t>(c.tau_s + c.dilations[0]));
  const auto [p2, last] = deviation(out.trace, zero, 0, 0.01 * peak);
  EXPECT_LE(last - 10, static_cast<std::size_t>(temporal_memory(c)));
}

TEST(Forward, PerturbationInfluenceFades) {
  // Default init scale and at least four blocks. Shallow stacks fail by
  // construction: the readout alone needs 4.6 * max(d) bins to fall to 1%.
  std::mt19937_64 rng(77);
  int pass = 0, trials = 0;
  for (int attempt = 0; attempt < 200 && trials < 10; ++attempt) {
    WaveSenseConfig c = small_config();
    std::uniform_int_distribution<int> nb(4, 12), dil(0, 3);
    c.dilations.clear();
    for (int i = nb(rng); i > 0; --i) c.dilations.push_back(std::size_t{1} << (dil(rng) + 1));
    c.weight_scaling = 0.5;
    const auto net = Network<double>::build(c, rng());
    const std::size_t bins = 100 + static_cast<std::size_t>(temporal_memory(c)) + 100;
    SpikeRaster base = random_input(12, bins, 0.0, 0, 0);
    SpikeRaster bumped = base;
    for (std::size_t ch = 0; ch < 12; ++ch) bumped.at(ch, 50) = 4;
    const auto a = net.forward(base), b = net.forward(bumped);
    const auto [peak, unused] = deviation(a.trace, b.trace, 50, 0.0);
    if (peak == 0.0) continue;
    ++trials;
    const auto [p, last] = deviation(a.trace, b.trace, 50, 0.01 * peak);
    pass += (last - 50) <= static_cast<std::size_t>(temporal_memory(c));
  }
  ASSERT_EQ(trials, 10);
  EXPECT_GE(pass, 8);
}

}  // namespace
}  // namespace wavesense
