// src/pghi.cpp

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

#include "phaseline/pghi.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

namespace phaseline {

namespace {

// Heap entry ordered by magnitude; ties broken by position so the pop order,
// and therefore the result, never depends on the heap implementation.
struct HeapEntry {
  double magnitude;
  std::size_t frame;
  std::size_t bin;

  bool operator<(const HeapEntry& o) const {
    return std::tie(magnitude, o.frame, o.bin) <
           std::tie(o.magnitude, frame, bin);
  }
};

using MaxHeap = std::priority_queue<HeapEntry>;

// Zero magnitude is never above tolerance, so an all-zero grid stays random.
bool aboveTolerance(double a, double threshold) { return a > 0.0 && a >= threshold; }

// Offset in (-pi/2, pi/2] that makes sum A^2 exp(2i(phi - offset)) real and
// positive; the global constant of a real signal is free only modulo pi.
double dcOffset(Complex squaredSum) { return wrap(std::arg(squaredSum)) / 2.0; }

HeapEntry popAudited(MaxHeap& heap) {
  HeapEntry top = heap.top();
  heap.pop();
  assert(heap.empty() || !(top < heap.top()));
  return top;
}

double timeCoefficient(const GradientScales& s) {
  return static_cast<double>(s.hop) * static_cast<double>(s.fftSize) / s.beta;
}

double freqCoefficient(const GradientScales& s) {
  return s.beta / (static_cast<double>(s.hop) * static_cast<double>(s.fftSize));
}

// vC of one frame from its log-magnitude (frequency differences only).
void frequencyDerivative(std::span<const double> logMag,
                         const GradientScales& s, std::span<double> vC,
                         std::span<std::uint8_t> edge) {
  const std::size_t bins = logMag.size();
  const double k = timeCoefficient(s);
  for (std::size_t m = 0; m < bins; ++m) {
    double slope;  // d(log A)/dm
    if (m == 0) {
      slope = logMag[1] - logMag[0];
      edge[m] = 1;
    } else if (m + 1 == bins) {
      slope = logMag[m] - logMag[m - 1];
      edge[m] = 1;
    } else {
      slope = 0.5 * (logMag[m + 1] - logMag[m - 1]);
    }
    vC[m] = k * slope + binAdvance(m, s.hop, s.fftSize);
  }
}

void checkGrid(const RealGrid& logMag) {
  if (logMag.bins() < 3 || logMag.frames() < 3) {
    throw InvalidArgument("derivative estimation needs at least 3 bins and 3 frames");
  }
}

}  // namespace

RealGrid logMagnitude(const RealGrid& magnitude) {
  const auto& a = magnitude.data();
  const double peak = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
  // An all-zero input still needs a finite log; fall back to the smallest
  // normal double.
  const double floor = std::max(magnitudeFloor(peak), std::numeric_limits<double>::min());
  RealGrid out(magnitude.frames(), magnitude.bins());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = std::log(std::max(a[i], floor));
  }
  return out;
}

DerivativeEstimates estimateDerivativesCentered(const RealGrid& logMag,
                                                const GradientScales& scales) {
  checkGrid(logMag);
  const std::size_t frames = logMag.frames();
  const std::size_t bins = logMag.bins();
  DerivativeEstimates est;
  est.scheme = DerivativeScheme::CenteredTime;
  est.vC = RealGrid(frames, bins);
  est.uC = RealGrid(frames, bins);
  est.boundary = Grid<std::uint8_t>(frames, bins, 0);
  const double k = freqCoefficient(scales);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sn = 0; sn < static_cast<std::ptrdiff_t>(frames); ++sn) {
    const auto n = static_cast<std::size_t>(sn);
    frequencyDerivative(logMag.frame(n), scales, est.vC.frame(n),
                        est.boundary.frame(n));
    for (std::size_t m = 0; m < bins; ++m) {
      double slope;  // d(log A)/dn
      if (n == 0) {
        slope = logMag(m, 1) - logMag(m, 0);
        est.boundary(m, n) = 1;
      } else if (n + 1 == frames) {
        slope = logMag(m, n) - logMag(m, n - 1);
        est.boundary(m, n) = 1;
      } else {
        slope = 0.5 * (logMag(m, n + 1) - logMag(m, n - 1));
      }
      est.uC(m, n) = -k * slope;
    }
  }
  return est;
}

CausalDerivativeEstimator::Frame CausalDerivativeEstimator::push(
    std::span<const double> logMagFrame) {
  const std::size_t bins = logMagFrame.size();
  if (bins < 3) throw InvalidArgument("derivative estimation needs at least 3 bins");
  if (count_ > 0 && prev_.size() != bins) {
    throw DimensionMismatch("frame length changed mid-stream");
  }
  Frame out;
  out.vC.resize(bins);
  out.uC.assign(bins, 0.0);
  std::vector<std::uint8_t> edge(bins, 0);
  frequencyDerivative(logMagFrame, scales_, out.vC, edge);

  const double k = freqCoefficient(scales_);
  if (count_ == 1) {
    for (std::size_t m = 0; m < bins; ++m) {
      out.uC[m] = -k * (logMagFrame[m] - prev_[m]);
    }
  } else if (count_ >= 2) {
    for (std::size_t m = 0; m < bins; ++m) {
      out.uC[m] = -0.5 * k * (3.0 * logMagFrame[m] - 4.0 * prev_[m] + prevPrev_[m]);
    }
  }
  prevPrev_ = std::move(prev_);
  prev_.assign(logMagFrame.begin(), logMagFrame.end());
  ++count_;
  return out;
}

DerivativeEstimates estimateDerivativesCausal(const RealGrid& logMag,
                                              const GradientScales& scales) {
  checkGrid(logMag);
  const std::size_t frames = logMag.frames();
  const std::size_t bins = logMag.bins();
  DerivativeEstimates est;
  est.scheme = DerivativeScheme::BackwardTime2nd;
  est.vC = RealGrid(frames, bins);
  est.uC = RealGrid(frames, bins);
  est.boundary = Grid<std::uint8_t>(frames, bins, 0);
  CausalDerivativeEstimator stream(scales);
  for (std::size_t n = 0; n < frames; ++n) {
    auto f = stream.push(logMag.frame(n));
    std::copy(f.vC.begin(), f.vC.end(), est.vC.frame(n).begin());
    std::copy(f.uC.begin(), f.uC.end(), est.uC.frame(n).begin());
    est.boundary(0, n) = 1;
    est.boundary(bins - 1, n) = 1;
    if (n < 2) std::fill(est.boundary.frame(n).begin(), est.boundary.frame(n).end(), 1);
  }
  return est;
}

std::vector<PhaseDifferenceFrame> averageToBackwardDifferences(
    const DerivativeEstimates& est) {
  const std::size_t frames = est.vC.frames();
  const std::size_t bins = est.vC.bins();
  std::vector<PhaseDifferenceFrame> out(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    auto& f = out[n];
    f.frameIndex = n;
    f.fpd.resize(bins - 1);
    for (std::size_t m = 1; m < bins; ++m) {
      f.fpd[m - 1] = 0.5 * (est.uC(m, n) + est.uC(m - 1, n));
    }
    if (n > 0) {
      std::vector<double> v(bins);
      for (std::size_t m = 0; m < bins; ++m) {
        v[m] = 0.5 * (est.vC(m, n) + est.vC(m, n - 1));
      }
      f.tpd = std::move(v);
    }
  }
  return out;
}

RealGrid pghiReconstruct(const RealGrid& magnitude,
                         std::span<const PhaseDifferenceFrame> diffs,
                         const HeapIntegrationParams& params) {
  const std::size_t frames = magnitude.frames();
  const std::size_t bins = magnitude.bins();
  if (frames == 0 || bins == 0) throw InvalidArgument("empty magnitude grid");
  if (diffs.size() != frames) throw DimensionMismatch("one difference frame per magnitude frame");
  if (!(params.relativeTolerance >= 0.0 && params.relativeTolerance < 1.0)) {
    throw InvalidArgument("relative tolerance must lie in [0, 1)");
  }
  for (std::size_t n = 0; n < frames; ++n) {
    if (diffs[n].fpd.size() + 1 != bins ||
        (n > 0 && (!diffs[n].tpd || diffs[n].tpd->size() != bins))) {
      throw DimensionMismatch("difference frame " + std::to_string(n) +
                              " does not match the magnitude grid");
    }
  }

  RealGrid phase(frames, bins);
  PhaseRng rng(params.rngSeed);
  for (double& p : phase.data()) p = rng.next();

  const auto& a = magnitude.data();
  const double threshold =
      params.relativeTolerance * *std::max_element(a.begin(), a.end());
  Grid<std::uint8_t> done(frames, bins, 0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (aboveTolerance(a[i], threshold)) order.push_back(i);
    else done.data()[i] = 1;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x] > a[y]; });

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> component(a.size(), kNone);
  std::size_t components = 0;
  auto settle = [&](MaxHeap& heap, std::size_t m, std::size_t n, double value) {
    phase(m, n) = value;
    done(m, n) = 1;
    component[n * bins + m] = components - 1;
    heap.push({magnitude(m, n), n, m});
  };

  MaxHeap heap;
  for (std::size_t seed : order) {
    if (done.data()[seed]) continue;
    ++components;
    settle(heap, seed % bins, seed / bins, 0.0);
    while (!heap.empty()) {
      const HeapEntry e = popAudited(heap);
      const std::size_t m = e.bin;
      const std::size_t n = e.frame;
      const double here = phase(m, n);
      if (n + 1 < frames && !done(m, n + 1)) {
        settle(heap, m, n + 1, here + (*diffs[n + 1].tpd)[m]);
      }
      if (n > 0 && !done(m, n - 1)) {
        settle(heap, m, n - 1, here - (*diffs[n].tpd)[m]);
      }
      if (m + 1 < bins && !done(m + 1, n)) {
        settle(heap, m + 1, n, here + diffs[n].fpd[m]);
      }
      if (m > 0 && !done(m - 1, n)) {
        settle(heap, m - 1, n, here - diffs[n].fpd[m - 1]);
      }
    }
  }
  if (params.anchorDc) {
    std::vector<Complex> dc(components, 0.0);
    for (std::size_t n = 0; n < frames; ++n) {
      const std::size_t c = component[n * bins];
      if (c != kNone) dc[c] += std::polar(magnitude(0, n) * magnitude(0, n), 2.0 * phase(0, n));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (component[i] != kNone) phase.data()[i] -= dcOffset(dc[component[i]]);
    }
  }
  for (double& p : phase.data()) p = wrap(p);
  return phase;
}

std::vector<double> RtpghiState::step(std::span<const double> magnitude,
                                      std::span<const double> tpd,
                                      std::span<const double> fpd) {
  const std::size_t bins = magnitude.size();
  if (fpd.size() + 1 != bins) throw DimensionMismatch("FPD must have M-1 entries");
  const bool havePrev = frames_ > 0;
  if (havePrev && (prevPhase_.size() != bins || tpd.size() != bins)) {
    throw DimensionMismatch("TPD must have M entries after the first frame");
  }
  if (!(params_.relativeTolerance >= 0.0 && params_.relativeTolerance < 1.0)) {
    throw InvalidArgument("relative tolerance must lie in [0, 1)");
  }

  std::vector<double> phase(bins);
  for (double& p : phase) p = rng_.next();
  runningMax_ = std::max(runningMax_, *std::max_element(magnitude.begin(), magnitude.end()));
  const double threshold = params_.relativeTolerance * runningMax_;

  std::vector<std::uint8_t> done(bins, 0);
  std::size_t todo = 0;
  for (std::size_t m = 0; m < bins; ++m) {
    if (aboveTolerance(magnitude[m], threshold)) ++todo;
    else done[m] = 1;
  }

  // Frame index 0 marks previous-frame entries, 1 current-frame entries.
  // Bins reached from the previous frame keep component kCarried; fresh
  // seeds open new components.
  constexpr std::size_t kCarried = static_cast<std::size_t>(-1);
  std::vector<std::size_t> component(bins, kCarried);
  std::size_t components = 0;
  MaxHeap heap;
  if (havePrev) {
    for (std::size_t m = 0; m < bins; ++m) {
      if (aboveTolerance(prevMagnitude_[m], threshold)) heap.push({prevMagnitude_[m], 0, m});
    }
  }
  auto settle = [&](std::size_t m, double value, std::size_t comp) {
    phase[m] = value;
    done[m] = 1;
    component[m] = comp;
    --todo;
    heap.push({magnitude[m], 1, m});
  };

  while (todo > 0) {
    if (heap.empty()) {
      std::size_t best = bins;
      for (std::size_t m = 0; m < bins; ++m) {
        if (!done[m] && (best == bins || magnitude[m] > magnitude[best])) best = m;
      }
      settle(best, 0.0, components++);
    }
    while (!heap.empty() && todo > 0) {
      const HeapEntry e = popAudited(heap);
      const std::size_t m = e.bin;
      if (e.frame == 0) {
        if (!done[m]) settle(m, prevPhase_[m] + tpd[m], kCarried);
        continue;
      }
      const std::size_t c = component[m];
      if (m + 1 < bins && !done[m + 1]) settle(m + 1, phase[m] + fpd[m], c);
      if (m > 0 && !done[m - 1]) settle(m - 1, phase[m] - fpd[m - 1], c);
    }
  }
  // A component seeded in this frame that reaches DC takes its constant
  // from the DC bin; carried bins already have theirs.
  if (params_.anchorDc && done[0] && component[0] != kCarried &&
      aboveTolerance(magnitude[0], threshold)) {
    const std::size_t c = component[0];
    const double offset = dcOffset(std::polar(1.0, 2.0 * phase[0]));
    for (std::size_t m = 0; m < bins; ++m) {
      if (component[m] == c) phase[m] -= offset;
    }
  }

  for (double& p : phase) p = wrap(p);
  prevPhase_ = phase;
  prevMagnitude_.assign(magnitude.begin(), magnitude.end());
  ++frames_;
  return phase;
}

RealGrid rtpghiReconstruct(const RealGrid& magnitude, const StftConfig& config,
                           const HeapIntegrationParams& params) {
  const std::size_t frames = magnitude.frames();
  const std::size_t bins = magnitude.bins();
  if (frames == 0 || bins < 3) throw InvalidArgument("grid too small for RTPGHI");
  CausalDerivativeEstimator estimator(GradientScales::from(config));
  RtpghiState state(params);
  RealGrid phase(frames, bins);
  std::vector<double> logMag(bins), prevVc, tpd(bins), fpd(bins - 1);
  double runningMax = 0.0;
  FrameStream stream(magnitude);
  for (std::size_t n = 0; n < frames; ++n) {
    const auto a = stream.next();
    runningMax = std::max(runningMax, *std::max_element(a.begin(), a.end()));
    const double floor = std::max(magnitudeFloor(runningMax), std::numeric_limits<double>::min());
    for (std::size_t m = 0; m < bins; ++m) logMag[m] = std::log(std::max(a[m], floor));
    auto d = estimator.push(logMag);
    for (std::size_t m = 1; m < bins; ++m) fpd[m - 1] = 0.5 * (d.uC[m] + d.uC[m - 1]);
    std::vector<double> out;
    if (n == 0) {
      out = state.step(a, {}, fpd);
    } else {
      for (std::size_t m = 0; m < bins; ++m) tpd[m] = 0.5 * (d.vC[m] + prevVc[m]);
      out = state.step(a, tpd, fpd);
    }
    std::copy(out.begin(), out.end(), phase.frame(n).begin());
    prevVc = std::move(d.vC);
  }
  return phase;
}

}  // namespace phaseline
