// tests/fixtures.hpp

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

// Deterministic test signals and small helpers shared by the test programs.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "phaseline/common.hpp"

namespace phaseline::fixtures {

inline constexpr std::uint32_t kSampleRate = 22050;

/// One second of a 440 Hz sinusoid at amplitude 0.5.
inline std::vector<double> sinusoid(std::size_t length = kSampleRate,
                                    double frequency = 440.0) {
  std::vector<double> x(length);
  for (std::size_t t = 0; t < length; ++t) {
    x[t] = 0.5 * std::sin(kTwoPi * frequency * static_cast<double>(t) / kSampleRate);
  }
  return x;
}

/// Linear chirp from f0 to f1 Hz over `length` samples.
inline std::vector<double> chirp(std::size_t length = kSampleRate, double f0 = 200.0,
                                 double f1 = 3200.0) {
  std::vector<double> x(length);
  const double duration = static_cast<double>(length) / kSampleRate;
  const double rate = (f1 - f0) / duration;
  for (std::size_t t = 0; t < length; ++t) {
    const double s = static_cast<double>(t) / kSampleRate;
    x[t] = 0.5 * std::sin(kTwoPi * (f0 * s + 0.5 * rate * s * s));
  }
  return x;
}

/// White Gaussian noise through a two-pole resonator at 1 kHz.
inline std::vector<double> filteredNoise(std::size_t length = kSampleRate,
                                         std::uint64_t seed = 1) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  const double r = 0.98;
  const double w = kTwoPi * 1000.0 / kSampleRate;
  const double a1 = 2.0 * r * std::cos(w);
  const double a2 = -r * r;
  std::vector<double> x(length);
  double y1 = 0.0, y2 = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    const double y = normal(engine) + a1 * y1 + a2 * y2;
    x[t] = 0.05 * y;
    y2 = y1;
    y1 = y;
  }
  return x;
}

inline std::vector<double> randomSignal(std::size_t length, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(length);
  for (double& v : x) v = dist(engine);
  return x;
}

inline double relativeError(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace phaseline::fixtures
