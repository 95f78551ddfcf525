// phaseline/metrics.hpp

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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phaseline/common.hpp"
#include "phaseline/phasediff.hpp"
#include "phaseline/spectral.hpp"

namespace phaseline {

inline constexpr double kLscFloorDb = -120.0;
inline constexpr std::size_t kHistogramBins = 64;

/// Log-spectral convergence of the re-analysed estimate against `reference`,
/// in dB, clamped below at -120 dB.
double lsc(const Spectrogram& estimate, const RealGrid& reference);

/// Differences of a reconstructed phase grid: BPD rows for frames 1..N-1
/// (row n-1 holds frame n) and FPD rows for every frame, all wrapped.
struct RecomputedDifferences {
  RealGrid bpd;  // (N-1) x M
  RealGrid fpd;  // N x (M-1)
};

RecomputedDifferences recomputeDifferencesFromPhase(const RealGrid& phase,
                                                    std::size_t hop,
                                                    std::size_t fftSize);

/// Oracle differences in the same layout, for scoring.
RecomputedDifferences referenceDifferences(const Spectrogram& spec);

struct AweSummary {
  double median = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  std::array<std::uint64_t, kHistogramBins> histogram{};
};

/// AWE statistics over all entries where `mask` (if given) is non-zero.
AweSummary aweSummary(const RealGrid& reference, const RealGrid& estimate,
                      const Grid<std::uint8_t>* mask = nullptr);

/// Masks selecting difference entries whose two time-frequency points both
/// have magnitude >= threshold.
Grid<std::uint8_t> bpdMask(const RealGrid& magnitude, double threshold);
Grid<std::uint8_t> fpdMask(const RealGrid& magnitude, double threshold);

/// Magnitude value at the given upper quantile (0.8 -> top 20 %).
double magnitudeQuantile(const RealGrid& magnitude, double quantile);

struct EvaluationReport {
  std::string path;
  double lscDb = 0.0;
  double aweBpdMedian = 0.0;
  double aweFpdMedian = 0.0;
  std::array<std::uint64_t, kHistogramBins> bpdHistogram{};
  std::array<std::uint64_t, kHistogramBins> fpdHistogram{};
  /// Slots for externally computed perceptual scores.
  std::optional<double> pesq;
  std::optional<double> estoi;

  /// One line: path=... lsc_db=... awe_bpd_median=... awe_fpd_median=...
  std::string record() const;
};

/// Compares an estimated waveform with the reference on the reference grid.
/// With `maskQuantile`, AWE is scored only where both points of a difference
/// reach that quantile of the reference magnitude.
EvaluationReport evaluate(std::span<const double> reference,
                          std::span<const double> estimate,
                          const StftConfig& config, std::uint32_t sampleRate,
                          std::optional<double> maskQuantile = std::nullopt);

std::vector<std::uint8_t> saveHistogram(std::span<const std::uint64_t> counts);
std::vector<std::uint64_t> loadHistogram(std::span<const std::uint8_t> bytes);

}  // namespace phaseline
