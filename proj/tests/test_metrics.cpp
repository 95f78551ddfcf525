// tests/test_metrics.cpp

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
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phaseline/binary_io.hpp"
#include "phaseline/metrics.hpp"

using namespace phaseline;

namespace {

RealGrid randomPhase(std::size_t frames, std::size_t bins, std::uint64_t seed) {
  RealGrid p(frames, bins);
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  for (double& v : p.data()) v = dist(engine);
  return p;
}

}  // namespace

TEST_CASE("LSC limits") {
  const StftConfig config = StftConfig::hann(256, 64, 256);
  const auto x = fixtures::chirp(5000);
  const auto spec = stft(x, config);
  const auto mag = spec.magnitude();
  CHECK(lsc(spec, mag) == kLscFloorDb);

  Spectrogram silent = spec;
  for (auto& c : silent.coefficients.data()) c = 0.0;
  CHECK(lsc(silent, mag) == doctest::Approx(0.0));

  // Re-analysis is linear, so scaling the reference and estimate together
  // leaves the ratio unchanged.
  Spectrogram noisy = Spectrogram::fromPolar(mag, randomPhase(mag.frames(), mag.bins(), 1),
                                             config, 0, x.size());
  const double base = lsc(noisy, mag);
  Spectrogram louder = noisy;
  for (auto& c : louder.coefficients.data()) c *= 4.0;
  RealGrid louderMag = mag;
  for (double& a : louderMag.data()) a *= 4.0;
  CHECK(lsc(louder, louderMag) == doctest::Approx(base).epsilon(1e-9));
  CHECK(base < 0.0);
  CHECK(base > -20.0);
  CHECK_THROWS_AS(lsc(spec, RealGrid(mag.frames() - 1, mag.bins())), DimensionMismatch);
}

TEST_CASE("random phase sits well above the oracle") {
  const StftConfig config = StftConfig::hann(512, 128, 512);
  const auto x = fixtures::chirp(12000);
  const auto spec = stft(x, config);
  const auto mag = spec.magnitude();
  const double oracle = lsc(Spectrogram::fromPolar(mag, spec.phase(), config, 0, x.size()), mag);
  const double random =
      lsc(Spectrogram::fromPolar(mag, randomPhase(mag.frames(), mag.bins(), 7), config, 0, x.size()), mag);
  CHECK(random - oracle >= 30.0);
}

TEST_CASE("recomputed differences") {
  RealGrid phase(3, 4);
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t m = 0; m < 4; ++m) phase(m, n) = 0.3 * double(m) + 0.9 * double(n * m);
  }
  const auto d = recomputeDifferencesFromPhase(phase, 1, 8);
  CHECK(d.bpd.frames() == 2);
  CHECK(d.bpd.bins() == 4);
  CHECK(d.fpd.frames() == 3);
  CHECK(d.fpd.bins() == 3);
  CHECK(d.bpd(2, 0) == doctest::Approx(wrap(1.8 - binAdvance(2, 1, 8))));
  CHECK(d.fpd(1, 2) == doctest::Approx(wrap(0.3 + 1.8)));

  // A constant phase offset leaves all differences unchanged.
  RealGrid shifted = phase;
  for (double& v : shifted.data()) v += 2.1;
  const auto e = recomputeDifferencesFromPhase(shifted, 1, 8);
  for (std::size_t i = 0; i < d.bpd.data().size(); ++i) CHECK(awe(d.bpd.data()[i], e.bpd.data()[i]) < 1e-12);
  for (std::size_t i = 0; i < d.fpd.data().size(); ++i) CHECK(awe(d.fpd.data()[i], e.fpd.data()[i]) < 1e-12);
  CHECK_THROWS_AS(recomputeDifferencesFromPhase(RealGrid(1, 4), 1, 8), InvalidArgument);
}

TEST_CASE("AWE of uniform errors has median pi/2") {
  const std::size_t n = 200000;
  RealGrid ref(1, n), est(1, n);
  std::mt19937_64 engine(12);
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  for (std::size_t i = 0; i < n; ++i) {
    ref.data()[i] = dist(engine);
    est.data()[i] = dist(engine);
  }
  const auto s = aweSummary(ref, est);
  CHECK(std::abs(s.median - kPi / 2) < 0.05);
  CHECK(s.max <= kPi);
  CHECK(s.count == n);
  CHECK(std::accumulate(s.histogram.begin(), s.histogram.end(), std::uint64_t{0}) == n);
  // Uniform errors spread evenly over the histogram.
  for (auto c : s.histogram) CHECK(std::abs(double(c) - double(n) / kHistogramBins) < 0.1 * n / kHistogramBins);
}

TEST_CASE("AWE masks and medians") {
  RealGrid ref(1, 4), est(1, 4);
  ref.data() = {0.0, 0.0, 0.0, 3.0};
  est.data() = {0.1, 0.4, 0.2, -3.0};
  const auto all = aweSummary(ref, est);
  CHECK(all.median == doctest::Approx((0.2 + (2 * kPi - 6.0)) / 2));
  CHECK(all.max == doctest::Approx(0.4));
  Grid<std::uint8_t> mask(1, 4, 0);
  mask.data() = {0, 1, 0, 1};
  const auto some = aweSummary(ref, est, &mask);
  CHECK(some.count == 2);
  CHECK(some.median == doctest::Approx((0.4 + (2 * kPi - 6.0)) / 2));
  Grid<std::uint8_t> none(1, 4, 0);
  CHECK_THROWS_AS(aweSummary(ref, est, &none), InvalidArgument);

  RealGrid mag(2, 3);
  mag.data() = {1.0, 0.1, 1.0, 1.0, 1.0, 0.1};
  const auto bm = bpdMask(mag, 0.5);
  CHECK(bm.data() == std::vector<std::uint8_t>{1, 0, 0});
  const auto fm = fpdMask(mag, 0.5);
  CHECK(fm.data() == std::vector<std::uint8_t>{0, 0, 1, 0});
  CHECK(magnitudeQuantile(mag, 1.0) == 1.0);
  CHECK(magnitudeQuantile(mag, 0.0) == 0.1);
}

TEST_CASE("evaluate") {
  const StftConfig config = StftConfig::hann(256, 64, 256);
  const auto x = fixtures::filteredNoise(6000, 2);
  const auto same = evaluate(x, x, config, fixtures::kSampleRate);
  CHECK(same.lscDb == kLscFloorDb);
  CHECK(same.aweBpdMedian < 1e-9);
  CHECK(same.aweFpdMedian < 1e-9);

  std::vector<double> negated(x);
  for (double& v : negated) v = -v;
  const auto flipped = evaluate(x, negated, config, fixtures::kSampleRate, 0.5);
  CHECK(flipped.lscDb == kLscFloorDb);
  CHECK(flipped.aweBpdMedian < 1e-9);
  CHECK(flipped.aweFpdMedian < 1e-9);

  const std::vector<double> silence(x.size(), 0.0);
  const auto quiet = evaluate(x, silence, config, fixtures::kSampleRate);
  CHECK(quiet.lscDb == doctest::Approx(0.0));

  auto report = same;
  report.path = "a.wav";
  CHECK(report.record().rfind("path=a.wav lsc_db=-120.000000 awe_bpd_median=", 0) == 0);
  CHECK(report.record().find("pesq") == std::string::npos);
  report.pesq = 3.5;
  CHECK(report.record().find(" pesq=3.5") != std::string::npos);
  CHECK_THROWS_AS(evaluate({}, x, config, fixtures::kSampleRate), InvalidArgument);
}

TEST_CASE("histogram files") {
  const std::vector<std::uint64_t> counts = {0, 5, 1ull << 40, 7};
  const auto bytes = saveHistogram(counts);
  CHECK(bytes.size() == 4 + 4 + 32);
  CHECK(loadHistogram(bytes) == counts);
  auto shortBytes = bytes;
  shortBytes.pop_back();
  CHECK_THROWS_AS(loadHistogram(shortBytes), FormatError);
  auto longBytes = bytes;
  longBytes.push_back(0);
  CHECK_THROWS_AS(loadHistogram(longBytes), FormatError);
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(loadHistogram(bad), FormatError);
}
