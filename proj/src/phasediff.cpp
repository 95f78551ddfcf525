// src/phasediff.cpp

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

#include "phaseline/phasediff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phaseline/binary_io.hpp"

namespace phaseline {

double wrap(double phi) {
  if (!std::isfinite(phi)) throw InvalidArgument("wrap of a non-finite phase");
  double r = std::remainder(phi, kTwoPi);
  // remainder() lands in [-pi, pi]; the lower end belongs to +pi.  Values
  // within rounding of -pi (e.g. 3*pi reduced in double) are treated as ties.
  if (r <= -kPi + 4.0 * kPi * std::numeric_limits<double>::epsilon()) {
    return kPi;
  }
  return r;
}

double awe(double phi, double phiHat) { return std::abs(wrap(phi - phiHat)); }

double cosineLoss(double phi, double phiHat) { return -std::cos(phi - phiHat); }

std::vector<PhaseDifferenceFrame> oracleDifferences(const Spectrogram& spec) {
  const std::size_t frames = spec.frames();
  const std::size_t bins = spec.bins();
  if (frames < 2) throw InvalidArgument("oracle differences need two frames");
  if (bins < 2) throw InvalidArgument("oracle differences need two bins");
  const RealGrid phase = spec.phase();

  std::vector<PhaseDifferenceFrame> out(frames);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sn = 0; sn < static_cast<std::ptrdiff_t>(frames); ++sn) {
    const auto n = static_cast<std::size_t>(sn);
    PhaseDifferenceFrame& f = out[n];
    f.frameIndex = n;
    f.wrapped = true;
    f.fpd.resize(bins - 1);
    for (std::size_t m = 1; m < bins; ++m) {
      f.fpd[m - 1] = wrap(phase(m, n) - phase(m - 1, n));
    }
    if (n > 0) {
      std::vector<double> tpd(bins);
      for (std::size_t m = 0; m < bins; ++m) {
        tpd[m] = wrap(phase(m, n) - phase(m, n - 1));
      }
      f.tpd = std::move(tpd);
    }
  }
  return out;
}

BpdFrame tpdToBpd(std::span<const double> tpd, std::size_t hop,
                  std::size_t fftSize) {
  if (fftSize == 0) throw InvalidArgument("FFT size must be positive");
  BpdFrame out;
  out.bpd.resize(tpd.size());
  for (std::size_t m = 0; m < tpd.size(); ++m) {
    out.bpd[m] = wrap(tpd[m] - binAdvance(m, hop, fftSize));
  }
  return out;
}

std::vector<double> bpdToTpd(const BpdFrame& bpd, std::size_t hop,
                             std::size_t fftSize) {
  if (fftSize == 0) throw InvalidArgument("FFT size must be positive");
  std::vector<double> out(bpd.bpd.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m] = wrap(bpd.bpd[m] + binAdvance(m, hop, fftSize));
  }
  return out;
}

ComplexRatioFrame toComplexRatios(std::span<const double> magPrev,
                                  std::span<const double> magCur,
                                  std::span<const double> tpd,
                                  std::span<const double> fpd, double floor) {
  const std::size_t bins = magCur.size();
  if (magPrev.size() != bins || tpd.size() != bins || fpd.size() + 1 != bins) {
    throw DimensionMismatch("complex ratio inputs disagree in length");
  }
  ComplexRatioFrame r;
  r.v.resize(bins);
  r.u.resize(bins - 1);
  for (std::size_t m = 0; m < bins; ++m) {
    const double num = std::max(magCur[m], floor);
    const double den = std::max(magPrev[m], floor);
    r.v[m] = std::polar(num / den, tpd[m]);
  }
  for (std::size_t m = 1; m < bins; ++m) {
    const double num = std::max(magCur[m], floor);
    const double den = std::max(magCur[m - 1], floor);
    r.u[m - 1] = std::polar(num / den, fpd[m - 1]);
  }
  return r;
}

PhaseDiffDump makeDump(std::span<const PhaseDifferenceFrame> frames,
                       std::size_t hop, std::size_t fftSize) {
  PhaseDiffDump dump;
  if (frames.empty()) return dump;
  const std::size_t bins = frames.front().fpd.size() + 1;
  dump.bins = static_cast<std::uint32_t>(bins);
  dump.frames = static_cast<std::uint32_t>(frames.size());
  dump.bpd.assign(frames.size() * bins, 0.0f);
  dump.fpd.assign(frames.size() * (bins - 1), 0.0f);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto& f = frames[n];
    if (f.fpd.size() + 1 != bins) {
      throw DimensionMismatch("frames disagree in bin count");
    }
    if (f.tpd) {
      const BpdFrame w = tpdToBpd(*f.tpd, hop, fftSize);
      std::transform(w.bpd.begin(), w.bpd.end(),
                     dump.bpd.begin() + static_cast<std::ptrdiff_t>(n * bins),
                     [](double x) { return static_cast<float>(x); });
    }
    std::transform(f.fpd.begin(), f.fpd.end(),
                   dump.fpd.begin() + static_cast<std::ptrdiff_t>(n * (bins - 1)),
                   [](double x) { return static_cast<float>(x); });
  }
  return dump;
}

std::vector<PhaseDifferenceFrame> differencesFromDump(const PhaseDiffDump& dump,
                                                      std::size_t hop,
                                                      std::size_t fftSize) {
  const std::size_t m = dump.bins;
  std::vector<PhaseDifferenceFrame> out(dump.frames);
  for (std::size_t n = 0; n < dump.frames; ++n) {
    auto& f = out[n];
    f.frameIndex = n;
    f.wrapped = true;
    f.fpd.assign(dump.fpd.begin() + static_cast<std::ptrdiff_t>(n * (m - 1)),
                 dump.fpd.begin() + static_cast<std::ptrdiff_t>((n + 1) * (m - 1)));
    if (n > 0) {
      BpdFrame w;
      w.bpd.assign(dump.bpd.begin() + static_cast<std::ptrdiff_t>(n * m),
                   dump.bpd.begin() + static_cast<std::ptrdiff_t>((n + 1) * m));
      f.tpd = bpdToTpd(w, hop, fftSize);
    }
  }
  return out;
}

std::vector<std::uint8_t> savePhaseDiffDump(const PhaseDiffDump& dump) {
  if (dump.bins < 1 ||
      dump.bpd.size() != std::size_t{dump.bins} * dump.frames ||
      dump.fpd.size() != std::size_t{dump.bins - 1} * dump.frames) {
    throw DimensionMismatch("phase-difference dump payload size mismatch");
  }
  ByteWriter w;
  w.magic("PPDF");
  w.u16(1);
  w.u32(dump.bins);
  w.u32(dump.frames);
  const std::size_t m = dump.bins;
  for (std::size_t n = 0; n < dump.frames; ++n) {
    w.f32s(std::span<const float>(dump.bpd).subspan(n * m, m));
    w.f32s(std::span<const float>(dump.fpd).subspan(n * (m - 1), m - 1));
  }
  return std::move(w.bytes());
}

PhaseDiffDump loadPhaseDiffDump(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expectMagic("PPDF");
  const auto version = r.u16();
  if (version != 1) {
    throw FormatError(FormatError::Kind::BadVersion,
                      "unsupported PPDF version " + std::to_string(version));
  }
  PhaseDiffDump dump;
  dump.bins = r.u32();
  dump.frames = r.u32();
  if (dump.bins < 1) {
    throw FormatError(FormatError::Kind::DimensionMismatch, "PPDF with zero bins");
  }
  const std::size_t m = dump.bins;
  const std::size_t expected = std::size_t{dump.frames} * (2 * m - 1) * 4;
  if (r.remaining() < expected) {
    throw FormatError(FormatError::Kind::Truncated, "truncated PPDF payload");
  }
  if (r.remaining() > expected) {
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "PPDF payload longer than declared dimensions");
  }
  dump.bpd.reserve(m * dump.frames);
  dump.fpd.reserve((m - 1) * dump.frames);
  for (std::size_t n = 0; n < dump.frames; ++n) {
    auto b = r.f32s(m);
    dump.bpd.insert(dump.bpd.end(), b.begin(), b.end());
    auto f = r.f32s(m - 1);
    dump.fpd.insert(dump.fpd.end(), f.begin(), f.end());
  }
  return dump;
}

}  // namespace phaseline
