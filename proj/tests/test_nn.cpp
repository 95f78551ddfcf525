// tests/test_nn.cpp

// Copyright 2026  The Phaseline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "phaseline/binary_io.hpp"
#include "phaseline/nn.hpp"
#include "phaseline/reference.hpp"

using namespace phaseline;
using namespace phaseline::nn;

namespace {

std::vector<float> detValues(std::size_t count, double scale, double offset) {
  std::vector<float> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = static_cast<float>(scale * std::sin(0.7 * static_cast<double>(i) + offset));
  }
  return v;
}

LayerSpec detLayer(LayerKind kind, std::uint16_t in, std::uint16_t out, std::uint16_t k,
                   double idx) {
  LayerSpec l;
  l.kind = kind;
  l.inChannels = in;
  l.outChannels = out;
  l.kernelSize = k;
  l.weights = detValues(std::size_t{out} * in * k, 0.5, idx);
  l.bias = detValues(out, 0.1, idx + 0.5);
  if (kind == LayerKind::FreqGatedConv) {
    l.gateWeights = detValues(std::size_t{out} * in * k, 0.4, idx + 1.0);
    l.gateBias = detValues(out, 0.2, idx + 1.5);
  }
  return l;
}

ConvNetModel tinyModel(Head head) {
  return ConvNetModel(head, {detLayer(LayerKind::FreqConv, 2, 3, 1, 0.0),
                             detLayer(LayerKind::FreqGatedConv, 3, 3, 3, 1.0),
                             detLayer(LayerKind::FreqConv, 3, 1, 1, 2.0)});
}

FeatureFrame tinyFeature() {
  FeatureFrame f;
  f.bins = 5;
  f.channels = 2;
  f.data = {0.5f, -1.0f, 0.25f, 2.0f, -0.75f, 1.5f, 0.0f, -0.5f, 0.3f, 0.9f};
  return f;
}

std::vector<double> randomFrame(std::size_t bins, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> dist(0.01, 2.0);
  std::vector<double> v(bins);
  for (double& x : v) x = dist(engine);
  return v;
}

}  // namespace

TEST_CASE("tiny network output is frozen") {
  const auto y = forwardBpd(tinyModel(Head::Bpd), tinyFeature());
  const std::vector<float> expected = {0.132708802f, 0.22585387f, -0.0618982761f,
                                       -0.020408467f, 0.106125045f};
  REQUIRE(y.size() == 5);
  for (std::size_t m = 0; m < 5; ++m) CHECK(y[m] == doctest::Approx(expected[m]).epsilon(1e-5));

  const auto fpd = forwardFpd(tinyModel(Head::Fpd), tinyFeature());
  REQUIRE(fpd.size() == 4);
  for (std::size_t m = 0; m < 4; ++m) CHECK(fpd[m] == y[m + 1]);
  CHECK_THROWS_AS(forwardFpd(tinyModel(Head::Bpd), tinyFeature()), InvalidArgument);
  CHECK_THROWS_AS(forwardBpd(tinyModel(Head::Fpd), tinyFeature()), InvalidArgument);
}

TEST_CASE("tiny network serialises to the frozen bytes") {
  const auto bytes = saveModel(tinyModel(Head::Bpd));
  CHECK(bytes.size() == 326);
  ByteReader r(std::span<const std::uint8_t>(bytes).subspan(bytes.size() - 4));
  CHECK(r.u32() == 0x0171d9beu);
  CHECK(crc32(std::span<const std::uint8_t>(bytes).first(bytes.size() - 4)) == 0x0171d9beu);
}

TEST_CASE("default architecture parameter count") {
  CHECK(ConvNetModel::zeros(Head::Bpd).parameterCount() == 123905);
  CHECK(ConvNetModel::zeros(Head::Fpd).parameterCount() == 123905);
  Architecture wide;
  wide.gatedKernel = 5;
  CHECK(ConvNetModel::zeros(Head::Bpd, wide).parameterCount() == 205825);
  const auto m = ConvNetModel::random(Head::Bpd, 1);
  CHECK(m.lookBack() == 3);
  CHECK(m.inputChannels() == 4);
  CHECK(m.layers().size() == 7);
}

TEST_CASE("parallel forward pass matches the serial reference") {
  std::mt19937_64 engine(8);
  for (Head head : {Head::Bpd, Head::Fpd}) {
    const auto model = ConvNetModel::random(head, 17);
    std::vector<std::vector<double>> frames;
    for (int c = 0; c < 4; ++c) frames.push_back(randomFrame(129, engine));
    const auto feature = buildFeature(frames);
    const auto fast = forward(model, feature);
    const auto slow = reference::forwardNaive(model, feature);
    REQUIRE(fast.size() == slow.size());
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      worst = std::max(worst, std::abs(double(fast[i]) - slow[i]));
      scale = std::max(scale, std::abs(double(slow[i])));
    }
    CHECK(worst <= 1e-5 * std::max(1.0, scale));
  }
}

TEST_CASE("single layers match the serial reference") {
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::uint16_t k : {1, 3, 5}) {
    for (LayerKind kind : {LayerKind::FreqConv, LayerKind::FreqGatedConv}) {
      LayerSpec l = detLayer(kind, 6, 4, k, k);
      std::vector<float> in(6 * 33);
      for (float& x : in) x = dist(engine);
      const auto a = applyLayer(l, in, 33);
      const auto b = reference::applyLayerNaive(l, in, 33);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("gated output is bounded by the linear branch") {
  const LayerSpec l = detLayer(LayerKind::FreqGatedConv, 3, 3, 3, 4.0);
  LayerSpec linear = l;
  linear.kind = LayerKind::FreqConv;
  linear.gateWeights.clear();
  linear.gateBias.clear();
  std::mt19937_64 engine(1);
  std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
  std::vector<float> in(3 * 20);
  for (float& x : in) x = dist(engine);
  const auto g = applyLayer(l, in, 20);
  const auto c = applyLayer(linear, in, 20);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(g[i]) <= std::abs(c[i]) + 1e-6f);
    if (c[i] != 0.0f) CHECK(g[i] / c[i] >= 0.0f);
  }
}

TEST_CASE("features are mean-subtracted and oldest first") {
  const std::vector<std::vector<double>> frames = {{1.0, 2.0}, {3.0, 6.0}};
  const auto f = buildFeature(frames);
  CHECK(f.channels == 2);
  CHECK(f.bins == 2);
  CHECK(f.data == std::vector<float>{-2.0f, -1.0f, 0.0f, 3.0f});
  CHECK_THROWS_AS(buildFeature({}), InvalidArgument);
  const std::vector<std::vector<double>> ragged = {{1.0, 2.0}, {3.0}};
  CHECK_THROWS_AS(buildFeature(ragged), DimensionMismatch);
}

TEST_CASE("zero weights give bias outputs and bin-advance TPD") {
  auto bpd = ConvNetModel::zeros(Head::Bpd);
  auto fpd = ConvNetModel::zeros(Head::Fpd);
  bpd.mutableLayers().back().bias[0] = 0.25f;
  DnnDifferenceEstimator est(std::make_shared<ConvNetModel>(bpd),
                             std::make_shared<ConvNetModel>(fpd), 64, 256);
  std::mt19937_64 engine(3);
  const auto first = est.push(randomFrame(129, engine));
  CHECK_FALSE(first.tpd.has_value());
  CHECK(first.fpd.size() == 128);
  for (double u : first.fpd) CHECK(u == 0.0);
  const auto second = est.push(randomFrame(129, engine));
  REQUIRE(second.tpd.has_value());
  for (std::size_t m = 0; m < 129; ++m) {
    CHECK((*second.tpd)[m] == doctest::Approx(0.25 + binAdvance(m, 64, 256)).epsilon(1e-12));
  }
  CHECK(second.frameIndex == 1);
}

TEST_CASE("estimator is causal, replicates history and ignores gain") {
  const auto bpd = std::make_shared<ConvNetModel>(ConvNetModel::random(Head::Bpd, 2));
  const auto fpd = std::make_shared<ConvNetModel>(ConvNetModel::random(Head::Fpd, 3));
  std::mt19937_64 engine(4);
  std::vector<std::vector<double>> frames;
  for (int n = 0; n < 8; ++n) frames.push_back(randomFrame(65, engine));

  DnnDifferenceEstimator a(bpd, fpd, 32, 128), b(bpd, fpd, 32, 128), c(bpd, fpd, 32, 128);
  std::vector<PhaseDifferenceFrame> base, louder;
  for (const auto& f : frames) {
    base.push_back(a.push(f));
    auto g = f;
    for (double& x : g) x *= 50.0;
    louder.push_back(b.push(g));
  }
  for (std::size_t n = 0; n < frames.size(); ++n) {
    for (std::size_t m = 0; m < base[n].fpd.size(); ++m) {
      CHECK(louder[n].fpd[m] == doctest::Approx(base[n].fpd[m]).epsilon(1e-4).scale(1.0));
    }
  }

  // The first feature repeats frame 0 across all look-back channels.
  std::vector<double> logMag(65);
  for (std::size_t m = 0; m < 65; ++m) logMag[m] = std::log(frames[0][m]);
  const std::vector<std::vector<double>> repeated(4, logMag);
  const auto direct = forwardFpd(*fpd, buildFeature(repeated));
  for (std::size_t m = 0; m < direct.size(); ++m) CHECK(base[0].fpd[m] == direct[m]);

  // Later frames cannot change earlier outputs.
  for (std::size_t n = 0; n < 5; ++n) {
    const auto r = c.push(frames[n]);
    CHECK(r.fpd == base[n].fpd);
  }
  CHECK(c.push(randomFrame(65, engine)).fpd != base[5].fpd);
  CHECK_THROWS_AS(c.push(randomFrame(33, engine)), DimensionMismatch);
}

TEST_CASE("model files round-trip and reject damage") {
  const auto model = ConvNetModel::random(Head::Fpd, 11, Architecture{2, 8, 2, 3});
  const auto bytes = saveModel(model);
  CHECK(loadModel(bytes) == model);
  CHECK(loadModel(bytes, Head::Fpd) == model);

  auto expectKind = [](auto&& fn, FormatError::Kind kind) {
    try {
      fn();
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.kind() == kind);
    }
  };
  expectKind([&] { loadModel(bytes, Head::Bpd); }, FormatError::Kind::HeadMismatch);
  auto corrupt = bytes;
  corrupt[40] ^= 0x10;
  expectKind([&] { loadModel(corrupt); }, FormatError::Kind::BadCrc);
  for (std::size_t cut : {std::size_t{3}, std::size_t{12}, bytes.size() - 1}) {
    const std::vector<std::uint8_t> shortBytes(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    expectKind([&] { loadModel(shortBytes); }, FormatError::Kind::Truncated);
  }
  auto badMagic = bytes;
  badMagic[0] = 'X';
  expectKind([&] { loadModel(badMagic); }, FormatError::Kind::BadMagic);
  auto extra = bytes;
  extra.push_back(0);
  expectKind([&] { loadModel(extra); }, FormatError::Kind::Malformed);
}

TEST_CASE("model validation") {
  auto layers = tinyModel(Head::Bpd).layers();
  layers[1].inChannels = 4;
  CHECK_THROWS_AS(ConvNetModel(Head::Bpd, layers), FormatError);
  auto even = tinyModel(Head::Bpd).layers();
  even[2].outChannels = 2;
  even[2].weights.resize(6);
  even[2].bias.resize(2);
  CHECK_THROWS_AS(ConvNetModel(Head::Bpd, even), FormatError);
  const auto bpd = std::make_shared<ConvNetModel>(ConvNetModel::zeros(Head::Bpd));
  CHECK_THROWS_AS(DnnDifferenceEstimator(bpd, bpd, 64, 256), FormatError);
  CHECK_THROWS_AS(DnnDifferenceEstimator(bpd, nullptr, 64, 256), InvalidArgument);
}
