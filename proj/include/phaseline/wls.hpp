// phaseline/wls.hpp

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

// Frame-by-frame phase reconstruction from phase differences by weighted
// least squares over complex STFT coefficients.
//
// For frame n the coefficients z minimise
//
//   || z - diag(v) x_prev ||^2_Lambda + || D z ||^2_Gamma,
//
// where v and u are the complex ratios built from the estimated TPD/FPD,
// (D z)[r] = z[r+1] - u[r] z[r], and Lambda, Gamma are diagonal weights
// derived from the magnitudes.  The normal equations
// (Lambda + D^H Gamma D) z = Lambda y are Hermitian positive definite and
// tridiagonal; the phase estimate is arg(z).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "phaseline/common.hpp"
#include "phaseline/phasediff.hpp"
#include "phaseline/spectral.hpp"

namespace phaseline {

struct WlsParams {
  /// Magnitude compression exponent p (default 10^-0.4).
  double p = 0.3981071705534972;
  /// Balance between the time and frequency terms.
  double gamma0 = 10.0;
};

struct WlsWeights {
  double p = 0.0;
  double gamma0 = 0.0;
  std::vector<double> lambda;  // M
  std::vector<double> gamma;   // M-1; entry r weights the pair (r, r+1)
};

struct TridiagonalHermitianSystem {
  std::vector<Complex> diag;   // M, real-valued in practice
  std::vector<Complex> upper;  // M-1; lower band is the conjugate
  std::vector<Complex> rhs;    // M

  std::size_t size() const { return diag.size(); }
  /// y = A x.
  std::vector<Complex> multiply(std::span<const Complex> x) const;
};

struct ReconstructionState {
  /// Previous frame coefficients with the given magnitude re-imposed.
  std::vector<Complex> prevCoefficients;
  /// Previous frame phase; kept separately so zero-magnitude bins keep it.
  std::vector<double> prevPhase;
  std::size_t frameIndex = 0;
};

/// Lambda[m] = (A[m,n] A[m,n-1])^p, Gamma[r] = gamma0 (A[r+1,n] A[r,n])^p.
/// Inputs are expected to be floored already.
WlsWeights buildWeights(std::span<const double> magPrev,
                        std::span<const double> magCur, double p,
                        double gamma0);

TridiagonalHermitianSystem assembleSystem(const ComplexRatioFrame& ratios,
                                          const WlsWeights& weights,
                                          const ReconstructionState& prev);

/// Cholesky factorisation of the Hermitian tridiagonal matrix, O(M).
/// Throws SingularSystem when a pivot is not positive.
std::vector<Complex> solveTridiagonal(const TridiagonalHermitianSystem& sys);

/// Objective T + S at z.
double wlsObjective(std::span<const Complex> z, const ComplexRatioFrame& ratios,
                    const WlsWeights& weights, const ReconstructionState& prev);

/// Frame 0: phi[0] = 0, phi[m] = phi[m-1] + U[m].
ReconstructionState initializeFirstFrame(std::span<const double> magnitude,
                                         std::span<const double> fpd);

struct FrameResult {
  std::vector<double> phase;          // wrapped
  std::vector<Complex> solution;      // unconstrained minimiser z
  ReconstructionState state;          // for frame n+1
  double residual = 0.0;              // ||A z - Lambda y|| / ||Lambda y||
};

/// One step of the second stage.  `floor` is applied to both magnitude frames
/// before forming ratios and weights.
FrameResult reconstructFrame(const ReconstructionState& state,
                             std::span<const double> magPrev,
                             std::span<const double> magCur,
                             std::span<const double> tpd,
                             std::span<const double> fpd,
                             const WlsParams& params, double floor);

/// Phase accumulation phi[m,n] = phi[m,n-1] + V[m,n], wrapped.
std::vector<double> timeIntegrationBaseline(const ReconstructionState& state,
                                            std::span<const double> tpd);

/// Streaming driver: owns the state and a running-maximum magnitude floor.
class WlsReconstructor {
 public:
  explicit WlsReconstructor(const WlsParams& params) : params_(params) {}

  /// Feeds frame n; `tpd` is ignored for the first frame.
  std::vector<double> push(std::span<const double> magnitude,
                           std::span<const double> tpd,
                           std::span<const double> fpd);

  const ReconstructionState& state() const { return state_; }
  double lastResidual() const { return lastResidual_; }

 private:
  WlsParams params_;
  ReconstructionState state_;
  std::vector<double> prevMagnitude_;
  double runningMax_ = 0.0;
  double lastResidual_ = 0.0;
  bool started_ = false;
};

/// Whole-grid helpers used by the CLI and tests.  diffs[n] provides frame
/// n's TPD (n >= 1) and FPD.
RealGrid wlsReconstruct(const RealGrid& magnitude,
                        std::span<const PhaseDifferenceFrame> diffs,
                        const WlsParams& params);
RealGrid timeIntegrationReconstruct(const RealGrid& magnitude,
                                    std::span<const PhaseDifferenceFrame> diffs);

/// Griffin-Lim refinement: X <- A exp(i arg STFT(iSTFT(X))), `iterations`
/// times, starting from magnitude `spec` with phase `phase`.
RealGrid griffinLimRefine(const Spectrogram& spec, std::size_t iterations);

}  // namespace phaseline
