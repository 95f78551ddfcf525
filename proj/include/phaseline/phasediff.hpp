// phaseline/phasediff.hpp

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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "phaseline/common.hpp"
#include "phaseline/spectral.hpp"

namespace phaseline {

/// Backward phase differences of one frame.
///
/// `tpd[m]` is the difference between bin m of frames n-1 and n; it is absent
/// at frame 0.  `fpd[m-1]` is the difference between bins m-1 and m of frame
/// n, for m = 1..M-1.
struct PhaseDifferenceFrame {
  std::size_t frameIndex = 0;
  std::optional<std::vector<double>> tpd;
  std::vector<double> fpd;
  bool wrapped = false;
};

struct BpdFrame {
  std::vector<double> bpd;
};

/// Ratios of adjacent STFT coefficients: v[m] ~ X[m,n]/X[m,n-1] (length M),
/// u[m-1] ~ X[m,n]/X[m-1,n] (length M-1).
struct ComplexRatioFrame {
  std::vector<Complex> v;
  std::vector<Complex> u;
};

/// Relative magnitude floor applied before any division by a magnitude.
inline constexpr double kRelativeFloor = 1e-10;

/// Principal value of phi in (-pi, pi].  Throws InvalidArgument on NaN/inf.
double wrap(double phi);

/// Absolute wrapped error |wrap(phi - phiHat)| in [0, pi].
double awe(double phi, double phiHat);

/// Negative cosine loss -cos(phi - phiHat).
double cosineLoss(double phi, double phiHat);

/// Oracle TPD/FPD from the true phase, wrapped.  Needs at least two frames.
std::vector<PhaseDifferenceFrame> oracleDifferences(const Spectrogram& spec);

/// W[m] = wrap(V[m] - 2 pi hop m / fftSize).
BpdFrame tpdToBpd(std::span<const double> tpd, std::size_t hop,
                  std::size_t fftSize);
/// Inverse of tpdToBpd: wrap(W[m] + 2 pi hop m / fftSize).
std::vector<double> bpdToTpd(const BpdFrame& bpd, std::size_t hop,
                             std::size_t fftSize);

/// Floor value for a magnitude maximum.
inline double magnitudeFloor(double maxMagnitude) {
  return kRelativeFloor * maxMagnitude;
}

/// Complex ratios from magnitudes and (unwrapped or wrapped) differences.
/// Magnitudes are floored at `floor` before division.
ComplexRatioFrame toComplexRatios(std::span<const double> magPrev,
                                  std::span<const double> magCur,
                                  std::span<const double> tpd,
                                  std::span<const double> fpd, double floor);

/// In-memory image of a phase-difference dump file.  Frame 0 carries a
/// placeholder BPD of zeros since its TPD is undefined.
struct PhaseDiffDump {
  std::uint32_t bins = 0;
  std::uint32_t frames = 0;
  std::vector<float> bpd;  // frames x bins
  std::vector<float> fpd;  // frames x (bins-1)

  bool operator==(const PhaseDiffDump&) const = default;
};

/// Packs oracle or estimated difference frames as BPD/FPD.
PhaseDiffDump makeDump(std::span<const PhaseDifferenceFrame> frames,
                       std::size_t hop, std::size_t fftSize);

/// Unpacks a dump into difference frames (TPD = BPD + bin advance, wrapped).
std::vector<PhaseDifferenceFrame> differencesFromDump(const PhaseDiffDump& dump,
                                                      std::size_t hop,
                                                      std::size_t fftSize);

std::vector<std::uint8_t> savePhaseDiffDump(const PhaseDiffDump& dump);
PhaseDiffDump loadPhaseDiffDump(std::span<const std::uint8_t> bytes);

}  // namespace phaseline
