// phaseline/pghi.hpp

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

// Phase-gradient estimation from log-magnitude and heap-ordered integration
// (offline PGHI and its causal, frame-by-frame variant RTPGHI).

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "phaseline/common.hpp"
#include "phaseline/phasediff.hpp"
#include "phaseline/spectral.hpp"

namespace phaseline {

enum class DerivativeScheme : std::uint8_t { CenteredFreq, CenteredTime, BackwardTime2nd };

/// Phase-derivative samples on the time-frequency grid, in radians per hop
/// (vC) and radians per bin (uC).
struct DerivativeEstimates {
  RealGrid vC;
  RealGrid uC;
  DerivativeScheme scheme = DerivativeScheme::CenteredTime;
  /// 1 where an entry used a one-sided stencil.
  Grid<std::uint8_t> boundary;
};

struct HeapIntegrationParams {
  double relativeTolerance = 1e-6;
  std::uint64_t rngSeed = 0;
  /// Rotate every integrated component that reaches the DC bin so that its
  /// DC coefficients are real, as they are for any real signal.  Seeds
  /// start at phase 0 either way.
  bool anchorDc = true;
};

/// Uniform phases in (-pi, pi] from a seeded 64-bit Mersenne twister.
class PhaseRng {
 public:
  explicit PhaseRng(std::uint64_t seed) : engine_(seed) {}
  double next() {
    // 53 random bits -> u in [0, 1); pi - 2 pi u lies in (-pi, pi].
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return kPi - kTwoPi * u;
  }

 private:
  std::mt19937_64 engine_;
};

/// Coefficients shared by the estimators.
struct GradientScales {
  std::size_t hop;
  std::size_t fftSize;
  double beta;

  static GradientScales from(const StftConfig& c) {
    return {static_cast<std::size_t>(c.hop), static_cast<std::size_t>(c.fftSize),
            c.effectiveBeta()};
  }
};

/// Natural log of floored magnitudes; the floor is kRelativeFloor * max(A).
RealGrid logMagnitude(const RealGrid& magnitude);

/// Centered differences along frequency (vC) and time (uC).  Edges use
/// one-sided first-order differences.  Needs at least 3 bins and 3 frames.
DerivativeEstimates estimateDerivativesCentered(const RealGrid& logMag,
                                                const GradientScales& scales);

/// Same vC, but uC from the second-order backward time difference.  Frame 0
/// has uC = 0, frame 1 uses a first-order backward difference.
DerivativeEstimates estimateDerivativesCausal(const RealGrid& logMag,
                                              const GradientScales& scales);

/// Streaming form of estimateDerivativesCausal: push one log-magnitude frame,
/// get that frame's (vC, uC).  Holds two frames of history.
class CausalDerivativeEstimator {
 public:
  explicit CausalDerivativeEstimator(const GradientScales& scales) : scales_(scales) {}

  struct Frame {
    std::vector<double> vC;
    std::vector<double> uC;
  };
  Frame push(std::span<const double> logMagFrame);

 private:
  GradientScales scales_;
  std::vector<double> prev_;
  std::vector<double> prevPrev_;
  std::size_t count_ = 0;
};

/// Trapezoidal averages of neighbouring derivative samples: frame n gets
/// V = (vC[n] + vC[n-1])/2 (absent at n = 0) and U[m] = (uC[m] + uC[m-1])/2.
std::vector<PhaseDifferenceFrame> averageToBackwardDifferences(
    const DerivativeEstimates& est);

/// Offline heap integration over the full grid.  `diffs[n]` supplies V (from
/// frame 1 on) and U for frame n.  Returns wrapped phase.
RealGrid pghiReconstruct(const RealGrid& magnitude,
                         std::span<const PhaseDifferenceFrame> diffs,
                         const HeapIntegrationParams& params);

/// Per-stream state for causal heap integration.
class RtpghiState {
 public:
  explicit RtpghiState(const HeapIntegrationParams& params)
      : params_(params), rng_(params.rngSeed) {}

  /// Phase of frame n from its magnitude and differences.  `tpd` may be
  /// empty for the first frame.
  std::vector<double> step(std::span<const double> magnitude,
                           std::span<const double> tpd,
                           std::span<const double> fpd);

  std::size_t framesProcessed() const { return frames_; }

 private:
  HeapIntegrationParams params_;
  PhaseRng rng_;
  std::vector<double> prevPhase_;
  std::vector<double> prevMagnitude_;
  double runningMax_ = 0.0;
  std::size_t frames_ = 0;
};

/// Causal pipeline: analytic estimates with the backward time scheme, then
/// RTPGHI, frame by frame.  Returns wrapped phase.
RealGrid rtpghiReconstruct(const RealGrid& magnitude, const StftConfig& config,
                           const HeapIntegrationParams& params);

}  // namespace phaseline
