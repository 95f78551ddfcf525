// src/wls.cpp

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

#include "phaseline/wls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phaseline {

std::vector<Complex> TridiagonalHermitianSystem::multiply(
    std::span<const Complex> x) const {
  const std::size_t n = size();
  std::vector<Complex> y(n);
  for (std::size_t m = 0; m < n; ++m) {
    Complex acc = diag[m] * x[m];
    if (m + 1 < n) acc += upper[m] * x[m + 1];
    if (m > 0) acc += std::conj(upper[m - 1]) * x[m - 1];
    y[m] = acc;
  }
  return y;
}

WlsWeights buildWeights(std::span<const double> magPrev,
                        std::span<const double> magCur, double p,
                        double gamma0) {
  if (!(gamma0 >= 0.0)) throw InvalidArgument("gamma0 must be non-negative");
  if (!std::isfinite(p)) throw InvalidArgument("p must be finite");
  const std::size_t bins = magCur.size();
  if (magPrev.size() != bins || bins == 0) {
    throw DimensionMismatch("weight inputs disagree in length");
  }
  WlsWeights w;
  w.p = p;
  w.gamma0 = gamma0;
  w.lambda.resize(bins);
  w.gamma.resize(bins - 1);
  for (std::size_t m = 0; m < bins; ++m) {
    w.lambda[m] = std::pow(magCur[m] * magPrev[m], p);
  }
  for (std::size_t r = 0; r + 1 < bins; ++r) {
    w.gamma[r] = gamma0 * std::pow(magCur[r + 1] * magCur[r], p);
  }
  return w;
}

TridiagonalHermitianSystem assembleSystem(const ComplexRatioFrame& ratios,
                                          const WlsWeights& weights,
                                          const ReconstructionState& prev) {
  const std::size_t bins = weights.lambda.size();
  if (ratios.v.size() != bins || ratios.u.size() + 1 != bins ||
      weights.gamma.size() + 1 != bins ||
      prev.prevCoefficients.size() != bins) {
    throw DimensionMismatch("system inputs disagree in dimension");
  }
  TridiagonalHermitianSystem sys;
  sys.diag.resize(bins);
  sys.upper.resize(bins - 1);
  sys.rhs.resize(bins);
  for (std::size_t m = 0; m < bins; ++m) {
    double d = weights.lambda[m];
    if (m + 1 < bins) d += weights.gamma[m] * std::norm(ratios.u[m]);
    if (m > 0) d += weights.gamma[m - 1];
    sys.diag[m] = d;
    sys.rhs[m] = weights.lambda[m] * ratios.v[m] * prev.prevCoefficients[m];
  }
  // Row r of D has -u[r] at column r and 1 at column r+1.
  for (std::size_t r = 0; r + 1 < bins; ++r) {
    sys.upper[r] = -std::conj(ratios.u[r]) * weights.gamma[r];
  }
  return sys;
}

std::vector<Complex> solveTridiagonal(const TridiagonalHermitianSystem& sys) {
  const std::size_t n = sys.size();
  if (n == 0) return {};
  if (sys.upper.size() + 1 != n || sys.rhs.size() != n) {
    throw DimensionMismatch("tridiagonal bands disagree in length");
  }
  // A = L L^H with L lower bidiagonal: real diagonal l, subdiagonal c.
  std::vector<double> l(n);
  std::vector<Complex> c(n > 1 ? n - 1 : 0);
  std::vector<Complex> y(n);
  for (std::size_t m = 0; m < n; ++m) {
    double pivot = sys.diag[m].real();
    if (m > 0) pivot -= std::norm(c[m - 1]);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw SingularSystem("tridiagonal system is not positive definite at row " +
                           std::to_string(m));
    }
    l[m] = std::sqrt(pivot);
    Complex b = sys.rhs[m];
    if (m > 0) b -= c[m - 1] * y[m - 1];
    y[m] = b / l[m];
    if (m + 1 < n) c[m] = std::conj(sys.upper[m]) / l[m];
  }
  std::vector<Complex> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Complex b = y[k];
    if (k + 1 < n) b -= std::conj(c[k]) * x[k + 1];
    x[k] = b / l[k];
  }
  return x;
}

double wlsObjective(std::span<const Complex> z, const ComplexRatioFrame& ratios,
                    const WlsWeights& weights, const ReconstructionState& prev) {
  double t = 0.0;
  for (std::size_t m = 0; m < z.size(); ++m) {
    t += weights.lambda[m] * std::norm(z[m] - ratios.v[m] * prev.prevCoefficients[m]);
  }
  double s = 0.0;
  for (std::size_t r = 0; r + 1 < z.size(); ++r) {
    s += weights.gamma[r] * std::norm(z[r + 1] - ratios.u[r] * z[r]);
  }
  return t + s;
}

ReconstructionState initializeFirstFrame(std::span<const double> magnitude,
                                         std::span<const double> fpd) {
  const std::size_t bins = magnitude.size();
  if (bins == 0 || fpd.size() + 1 != bins) {
    throw DimensionMismatch("FPD must have M-1 entries");
  }
  ReconstructionState s;
  s.prevPhase.resize(bins);
  s.prevCoefficients.resize(bins);
  double acc = 0.0;
  for (std::size_t m = 0; m < bins; ++m) {
    if (m > 0) acc += fpd[m - 1];
    s.prevPhase[m] = wrap(acc);
    s.prevCoefficients[m] = std::polar(magnitude[m], s.prevPhase[m]);
  }
  s.frameIndex = 0;
  return s;
}

FrameResult reconstructFrame(const ReconstructionState& state,
                             std::span<const double> magPrev,
                             std::span<const double> magCur,
                             std::span<const double> tpd,
                             std::span<const double> fpd,
                             const WlsParams& params, double floor) {
  const std::size_t bins = magCur.size();
  std::vector<double> prevF(magPrev.begin(), magPrev.end());
  std::vector<double> curF(magCur.begin(), magCur.end());
  for (double& a : prevF) a = std::max(a, floor);
  for (double& a : curF) a = std::max(a, floor);

  const ComplexRatioFrame ratios = toComplexRatios(prevF, curF, tpd, fpd, floor);
  const WlsWeights weights = buildWeights(prevF, curF, params.p, params.gamma0);
  const TridiagonalHermitianSystem sys = assembleSystem(ratios, weights, state);

  FrameResult out;
  out.solution = solveTridiagonal(sys);

  const auto ax = sys.multiply(out.solution);
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < bins; ++m) {
    num += std::norm(ax[m] - sys.rhs[m]);
    den += std::norm(sys.rhs[m]);
  }
  out.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);

  out.phase.resize(bins);
  out.state.prevPhase.resize(bins);
  out.state.prevCoefficients.resize(bins);
  for (std::size_t m = 0; m < bins; ++m) {
    out.phase[m] = principalArg(out.solution[m]);
    out.state.prevPhase[m] = out.phase[m];
    out.state.prevCoefficients[m] = std::polar(magCur[m], out.phase[m]);
  }
  out.state.frameIndex = state.frameIndex + 1;
  return out;
}

std::vector<double> timeIntegrationBaseline(const ReconstructionState& state,
                                            std::span<const double> tpd) {
  if (tpd.size() != state.prevPhase.size()) {
    throw DimensionMismatch("TPD must have M entries");
  }
  std::vector<double> phase(tpd.size());
  for (std::size_t m = 0; m < tpd.size(); ++m) {
    phase[m] = wrap(state.prevPhase[m] + tpd[m]);
  }
  return phase;
}

std::vector<double> WlsReconstructor::push(std::span<const double> magnitude,
                                           std::span<const double> tpd,
                                           std::span<const double> fpd) {
  runningMax_ = std::max(runningMax_, *std::max_element(magnitude.begin(), magnitude.end()));
  if (!started_) {
    state_ = initializeFirstFrame(magnitude, fpd);
    started_ = true;
    prevMagnitude_.assign(magnitude.begin(), magnitude.end());
    return state_.prevPhase;
  }
  const double floor =
      std::max(magnitudeFloor(runningMax_), std::numeric_limits<double>::min());
  FrameResult r = reconstructFrame(state_, prevMagnitude_, magnitude, tpd, fpd,
                                   params_, floor);
  lastResidual_ = r.residual;
  state_ = std::move(r.state);
  prevMagnitude_.assign(magnitude.begin(), magnitude.end());
  return r.phase;
}

RealGrid wlsReconstruct(const RealGrid& magnitude,
                        std::span<const PhaseDifferenceFrame> diffs,
                        const WlsParams& params) {
  if (diffs.size() != magnitude.frames()) {
    throw DimensionMismatch("one difference frame per magnitude frame");
  }
  WlsReconstructor rec(params);
  RealGrid phase(magnitude.frames(), magnitude.bins());
  FrameStream stream(magnitude);
  for (std::size_t n = 0; n < magnitude.frames(); ++n) {
    const auto frame = stream.next();
    std::span<const double> tpd;
    if (n > 0) {
      if (!diffs[n].tpd) throw InvalidArgument("missing TPD at frame " + std::to_string(n));
      tpd = *diffs[n].tpd;
    }
    const auto p = rec.push(frame, tpd, diffs[n].fpd);
    std::copy(p.begin(), p.end(), phase.frame(n).begin());
  }
  return phase;
}

RealGrid timeIntegrationReconstruct(const RealGrid& magnitude,
                                    std::span<const PhaseDifferenceFrame> diffs) {
  if (diffs.size() != magnitude.frames() || magnitude.frames() == 0) {
    throw DimensionMismatch("one difference frame per magnitude frame");
  }
  RealGrid phase(magnitude.frames(), magnitude.bins());
  ReconstructionState state = initializeFirstFrame(magnitude.frame(0), diffs[0].fpd);
  std::copy(state.prevPhase.begin(), state.prevPhase.end(), phase.frame(0).begin());
  for (std::size_t n = 1; n < magnitude.frames(); ++n) {
    if (!diffs[n].tpd) throw InvalidArgument("missing TPD at frame " + std::to_string(n));
    state.prevPhase = timeIntegrationBaseline(state, *diffs[n].tpd);
    state.frameIndex = n;
    std::copy(state.prevPhase.begin(), state.prevPhase.end(), phase.frame(n).begin());
  }
  return phase;
}

RealGrid griffinLimRefine(const Spectrogram& spec, std::size_t iterations) {
  checkReconstructible(spec.config, spec.frames());
  const RealGrid magnitude = spec.magnitude();
  Spectrogram current = spec;
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto signal = istft(current);
    const Spectrogram reanalysed = stft(signal, spec.config, spec.sampleRate);
    if (reanalysed.frames() != spec.frames()) {
      throw DimensionMismatch("re-analysis changed the frame count");
    }
    auto& dst = current.coefficients.data();
    const auto& src = reanalysed.coefficients.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = std::polar(magnitude.data()[i], principalArg(src[i]));
    }
  }
  return current.phase();
}

}  // namespace phaseline
