// src/metrics.cpp

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

#include "phaseline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "phaseline/binary_io.hpp"

namespace phaseline {

double lsc(const Spectrogram& estimate, const RealGrid& reference) {
  if (estimate.frames() != reference.frames() || estimate.bins() != reference.bins()) {
    throw DimensionMismatch("estimate and reference spectrograms differ in shape");
  }
  const auto signal = istft(estimate);
  const Spectrogram re = stft(signal, estimate.config, estimate.sampleRate);
  if (re.frames() != reference.frames()) {
    throw DimensionMismatch("re-analysis changed the frame count");
  }
  double num = 0.0, den = 0.0;
  const auto& a = reference.data();
  const auto& x = re.coefficients.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - std::abs(x[i]);
    num += d * d;
    den += a[i] * a[i];
  }
  if (den == 0.0) return num == 0.0 ? kLscFloorDb : 0.0;
  if (num == 0.0) return kLscFloorDb;
  return std::max(kLscFloorDb, 10.0 * std::log10(num / den));
}

RecomputedDifferences recomputeDifferencesFromPhase(const RealGrid& phase,
                                                    std::size_t hop,
                                                    std::size_t fftSize) {
  const std::size_t frames = phase.frames();
  const std::size_t bins = phase.bins();
  if (frames < 2 || bins < 2) throw InvalidArgument("need at least two frames and two bins");
  RecomputedDifferences out{RealGrid(frames - 1, bins), RealGrid(frames, bins - 1)};
  for (std::size_t n = 1; n < frames; ++n) {
    for (std::size_t m = 0; m < bins; ++m) {
      out.bpd(m, n - 1) = wrap(phase(m, n) - phase(m, n - 1) - binAdvance(m, hop, fftSize));
    }
  }
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 1; m < bins; ++m) {
      out.fpd(m - 1, n) = wrap(phase(m, n) - phase(m - 1, n));
    }
  }
  return out;
}

RecomputedDifferences referenceDifferences(const Spectrogram& spec) {
  return recomputeDifferencesFromPhase(spec.phase(),
                                       static_cast<std::size_t>(spec.config.hop),
                                       static_cast<std::size_t>(spec.config.fftSize));
}

AweSummary aweSummary(const RealGrid& reference, const RealGrid& estimate,
                      const Grid<std::uint8_t>* mask) {
  if (reference.frames() != estimate.frames() || reference.bins() != estimate.bins()) {
    throw DimensionMismatch("AWE inputs differ in shape");
  }
  if (mask && (mask->frames() != reference.frames() || mask->bins() != reference.bins())) {
    throw DimensionMismatch("AWE mask differs in shape");
  }
  std::vector<double> errors;
  errors.reserve(reference.data().size());
  AweSummary s;
  for (std::size_t i = 0; i < reference.data().size(); ++i) {
    if (mask && mask->data()[i] == 0) continue;
    const double e = awe(reference.data()[i], estimate.data()[i]);
    errors.push_back(e);
    const auto bin = std::min<std::size_t>(
        kHistogramBins - 1, static_cast<std::size_t>(e / kPi * kHistogramBins));
    ++s.histogram[bin];
    s.max = std::max(s.max, e);
  }
  if (errors.empty()) throw InvalidArgument("AWE summary over an empty selection");
  s.count = errors.size();
  const std::size_t mid = errors.size() / 2;
  std::nth_element(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(mid), errors.end());
  s.median = errors[mid];
  if (errors.size() % 2 == 0) {
    const double lower =
        *std::max_element(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(mid));
    s.median = 0.5 * (s.median + lower);
  }
  return s;
}

Grid<std::uint8_t> bpdMask(const RealGrid& magnitude, double threshold) {
  const std::size_t frames = magnitude.frames();
  Grid<std::uint8_t> mask(frames > 0 ? frames - 1 : 0, magnitude.bins(), 0);
  for (std::size_t n = 1; n < frames; ++n) {
    for (std::size_t m = 0; m < magnitude.bins(); ++m) {
      mask(m, n - 1) = magnitude(m, n) >= threshold && magnitude(m, n - 1) >= threshold;
    }
  }
  return mask;
}

Grid<std::uint8_t> fpdMask(const RealGrid& magnitude, double threshold) {
  const std::size_t bins = magnitude.bins();
  Grid<std::uint8_t> mask(magnitude.frames(), bins > 0 ? bins - 1 : 0, 0);
  for (std::size_t n = 0; n < magnitude.frames(); ++n) {
    for (std::size_t m = 1; m < bins; ++m) {
      mask(m - 1, n) = magnitude(m, n) >= threshold && magnitude(m - 1, n) >= threshold;
    }
  }
  return mask;
}

double magnitudeQuantile(const RealGrid& magnitude, double quantile) {
  std::vector<double> v = magnitude.data();
  if (v.empty()) throw InvalidArgument("quantile of an empty grid");
  const auto k = static_cast<std::size_t>(
      std::clamp(quantile, 0.0, 1.0) * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

std::string EvaluationReport::record() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, " lsc_db=%.6f awe_bpd_median=%.6f awe_fpd_median=%.6f",
                lscDb, aweBpdMedian, aweFpdMedian);
  std::string line = "path=" + path + buf;
  if (pesq) line += " pesq=" + std::to_string(*pesq);
  if (estoi) line += " estoi=" + std::to_string(*estoi);
  return line;
}

EvaluationReport evaluate(std::span<const double> reference,
                          std::span<const double> estimate,
                          const StftConfig& config, std::uint32_t sampleRate,
                          std::optional<double> maskQuantile) {
  const std::size_t length = std::min(reference.size(), estimate.size());
  if (length == 0) throw InvalidArgument("evaluation of an empty signal");
  const Spectrogram ref = stft(reference.first(length), config, sampleRate);
  const Spectrogram est = stft(estimate.first(length), config, sampleRate);

  EvaluationReport report;
  report.lscDb = lsc(est, ref.magnitude());
  const auto refDiffs = referenceDifferences(ref);
  const auto estDiffs = referenceDifferences(est);
  AweSummary b, f;
  if (maskQuantile) {
    const RealGrid mag = ref.magnitude();
    const double threshold = magnitudeQuantile(mag, *maskQuantile);
    const auto bm = bpdMask(mag, threshold);
    const auto fm = fpdMask(mag, threshold);
    b = aweSummary(refDiffs.bpd, estDiffs.bpd, &bm);
    f = aweSummary(refDiffs.fpd, estDiffs.fpd, &fm);
  } else {
    b = aweSummary(refDiffs.bpd, estDiffs.bpd);
    f = aweSummary(refDiffs.fpd, estDiffs.fpd);
  }
  report.aweBpdMedian = b.median;
  report.aweFpdMedian = f.median;
  report.bpdHistogram = b.histogram;
  report.fpdHistogram = f.histogram;
  return report;
}

std::vector<std::uint8_t> saveHistogram(std::span<const std::uint64_t> counts) {
  ByteWriter w;
  w.magic("PPDH");
  w.u32(static_cast<std::uint32_t>(counts.size()));
  for (auto c : counts) w.u64(c);
  return std::move(w.bytes());
}

std::vector<std::uint64_t> loadHistogram(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expectMagic("PPDH");
  const std::uint32_t n = r.u32();
  if (r.remaining() != std::size_t{n} * 8) {
    throw FormatError(r.remaining() < std::size_t{n} * 8 ? FormatError::Kind::Truncated
                                                          : FormatError::Kind::DimensionMismatch,
                      "PPDH payload does not match its bin count");
  }
  std::vector<std::uint64_t> counts(n);
  for (auto& c : counts) c = r.u64();
  return counts;
}

}  // namespace phaseline
