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
#include "wavesense/losses.hpp"

namespace wavesense {
namespace {

OutputTrace make_trace(std::vector<std::vector<double>> rows) {
  OutputTrace t;
  t.values = Tensor2<double>(rows.size(), rows.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) t.values(k, i) = rows[k][i];
  }
  return t;
}

TEST(PeakLogits, HandExample) {
  const auto p = peak_logits(make_trace({{1, 3, 2}, {0, 0, 5}}));
  EXPECT_EQ(p.logits, (std::vector<double>{3, 5}));
  EXPECT_EQ(p.peak_times, (std::vector<std::size_t>{1, 2}));
}

TEST(PeakLogits, ConstantTraceTiesToFirstBin) {
  const auto p = peak_logits(make_trace({{4, 4, 4, 4}, {-1, -1, -1, -1}}));
  EXPECT_EQ(p.logits, (std::vector<double>{4, -1}));
  EXPECT_EQ(p.peak_times, (std::vector<std::size_t>{0, 0}));
}

TEST(PeakLogits, BumpsLandOnMaxima) {
  std::vector<double> a(200), b(200);
  for (std::size_t t = 0; t < 200; ++t) {
    a[t] = std::exp(-std::pow((t - 60.0) / 10.0, 2));
    b[t] = 0.7 * std::exp(-std::pow((t - 140.0) / 15.0, 2));
  }
  const auto p = peak_logits(make_trace({a, b}));
  EXPECT_EQ(p.peak_times, (std::vector<std::size_t>{60, 140}));
  EXPECT_DOUBLE_EQ(p.logits[1], 0.7);
}

TEST(PeakLogits, BruteForceScan) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> small(-3, 3);
  std::uniform_int_distribution<std::size_t> dims(1, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = dims(rng), n = dims(rng);
    OutputTrace t;
    t.values = Tensor2<double>(k, n);
    // Coarse integer values so ties are common.
    for (double& v : t.values.data()) v = small(rng);
    const auto p = peak_logits(t);
    for (std::size_t c = 0; c < k; ++c) {
      double best = -1e300;
      std::size_t at = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (t.values(c, i) > best) {
          best = t.values(c, i);
          at = i;
        }
      }
      ASSERT_EQ(p.logits[c], best);
      ASSERT_EQ(p.peak_times[c], at);
    }
  }
}

TEST(PeakLogits, EmptyTrace) {
  EXPECT_THROW(peak_logits(OutputTrace{}), InvalidInput);
}

TEST(CrossEntropy, HandValues) {
  const std::vector<double> zero{0, 0};
  EXPECT_NEAR(cross_entropy(zero, 0), 0.69315, 1e-5);
  const std::vector<double> sure{50, -50};
  EXPECT_LT(cross_entropy(sure, 0), 1e-9);
  EXPECT_NEAR(cross_entropy(sure, 1), 100.0, 1e-9);
  const std::vector<double> three{1, 2, 3};
  EXPECT_NEAR(cross_entropy(three, 0),
              -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(3.0))), 1e-12);
  EXPECT_THROW(cross_entropy(zero, 2), InvalidInput);
}

TEST(CrossEntropy, NonNegative) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(5);
    for (double& v : z) v = n(rng);
    EXPECT_GE(cross_entropy(z, i % 5), 0.0);
  }
}

TEST(ActivityExcess, HandValues) {
  SpikeRaster one(1, 4);
  one.counts.data() = {0, 1, 2, 3};
  EXPECT_EQ(activity_excess(std::vector<SpikeRaster>{one}), 5u);
  SpikeRaster ones(3, 5);
  ones.counts.fill(1);
  EXPECT_EQ(activity_excess(std::vector<SpikeRaster>{ones}), 0u);
  SpikeRaster twos(10, 10);
  twos.counts.fill(2);
  EXPECT_EQ(activity_excess(std::vector<SpikeRaster>{twos}), 200u);
  EXPECT_EQ(activity_excess(std::vector<SpikeRaster>{one, twos}), 205u);
}

TEST(ActivityExcess, PermutationInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> c(0, 4);
  SpikeRaster r(7, 30);
  for (auto& x : r.counts.data()) x = c(rng);
  const auto base = activity_excess(std::vector<SpikeRaster>{r});
  for (int i = 0; i < 20; ++i) {
    std::shuffle(r.counts.data().begin(), r.counts.data().end(), rng);
    EXPECT_EQ(activity_excess(std::vector<SpikeRaster>{r}), base);
  }
}

TEST(ActivityLoss, HandValues) {
  EXPECT_DOUBLE_EQ(activity_loss(5, 4, 1), 1.5625);
  EXPECT_DOUBLE_EQ(activity_loss(0, 4, 3), 0.0);
  EXPECT_DOUBLE_EQ(activity_loss(12, 4, 3), 1.0);
  EXPECT_THROW(activity_loss(1, 0, 3), InvalidParameter);
}

TEST(TotalLoss, Composite) {
  // Equal peaks give CE = ln 2; one neuron with counts 0,1,2,3 gives 1.5625.
  const OutputTrace t = make_trace({{0, 1, 0, 0}, {0, 0, 1, 0}});
  SpikeRaster r(1, 4);
  r.counts.data() = {0, 1, 2, 3};
  const std::vector<SpikeRaster> rasters{r};
  EXPECT_NEAR(total_loss(t, 0, rasters, 0.01), 0.70877, 1e-5);
  EXPECT_NEAR(total_loss(t, 0, rasters, 0.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(total_loss(t, 0, rasters), 0.70877, 1e-5);
  EXPECT_DOUBLE_EQ(kDefaultActivityWeight, 0.01);
  EXPECT_THROW(total_loss(t, 0, rasters, -1.0), InvalidParameter);
}

TEST(TotalLoss, TapeAgreesAndGradientHitsPeakBinsOnly) {
  ParameterSet<double> params;
  const ParamId w = params.add("w", 2, 3);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : params.value(w).data()) v = n(rng);
  // Input with one active channel per bin, so d y(t, c) / d w(c, j) is 1 only
  // for the channel j active at t.
  Tensor2<double> x(6, 3);
  for (std::size_t t = 0; t < 6; ++t) x(t, t % 3) = 1.0;
  Tape<double> tape(params);
  const NodeId y = tape.matmul(w, tape.constant(x));
  const NodeId loss = tape.peak_cross_entropy(y, 1);

  OutputTrace trace;
  trace.values = Tensor2<double>(2, 6);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t c = 0; c < 2; ++c) trace.values(c, t) = tape.value(y)(t, c);
  }
  EXPECT_NEAR(tape.scalar(loss), total_loss(trace, 1, {}, 0.0), 1e-12);

  const auto p = peak_logits(trace);
  const auto g = tape.backward(loss);
  double zmax = std::max(p.logits[0], p.logits[1]);
  const double e0 = std::exp(p.logits[0] - zmax), e1 = std::exp(p.logits[1] - zmax);
  const double prob[2] = {e0 / (e0 + e1), e1 / (e0 + e1)};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double expected =
          (p.peak_times[c] % 3 == j) ? prob[c] - (c == 1 ? 1.0 : 0.0) : 0.0;
      EXPECT_NEAR(g.tensors[w](c, j), expected, 1e-12) << c << "," << j;
    }
  }
}

}  // namespace
}  // namespace wavesense
