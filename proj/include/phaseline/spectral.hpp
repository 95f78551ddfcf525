// phaseline/spectral.hpp

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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseline/common.hpp"

namespace phaseline {

enum class WindowKind : std::uint8_t { Hann, Gaussian, Custom };

/// Analysis parameters of the short-time Fourier transform.
///
/// Window taps are indexed by their offset l from the frame center,
/// l = -floor(L/2) .. floor(L/2), so an even length L yields L+1 taps whose
/// two outermost entries coincide modulo the FFT size.  For the Hann window
/// those outermost taps are zero.
struct StftConfig {
  WindowKind window = WindowKind::Hann;
  int windowLength = 1024;
  int hop = 256;
  int fftSize = 1024;
  bool oneSided = true;
  /// Phase-magnitude constant in samples^2; 0 selects the window default
  /// (0.25645 L^2 for Hann, sigma^2 for Gaussian).
  double beta = 0.0;
  /// Gaussian parameter sigma in samples, only read for WindowKind::Gaussian.
  double gaussianSigma = 0.0;
  /// Taps for WindowKind::Custom, length 2*floor(L/2)+1, center in the middle.
  std::vector<double> customTaps;

  static StftConfig hann(int length = 1024, int hop = 256, int fftSize = 1024);
  static StftConfig gaussian(int length, double sigma, int hop, int fftSize);

  /// Throws InvalidArgument when the parameters are inconsistent.
  void validate() const;

  std::vector<double> taps() const;
  double effectiveBeta() const;
  /// Number of stored frequency bins (fftSize/2+1 when one-sided).
  std::size_t numBins() const;
  std::size_t halfWidth() const { return static_cast<std::size_t>(windowLength / 2); }

  bool operator==(const StftConfig&) const = default;
};

/// Symmetric Hann taps 0.5 + 0.5 cos(2 pi l / L) for |l| <= floor(L/2).
std::vector<double> hannWindow(int length);

/// Taps of (2/sigma^2)^(1/4) exp(-pi t^2 / sigma^2) sampled at integer t.
std::vector<double> gaussianWindow(int length, double sigma);

/// Number of frames for a signal of `length` samples: ceil(length/hop) + 1.
std::size_t frameCount(std::size_t length, int hop);

struct Spectrogram {
  ComplexGrid coefficients;  // bins x frames
  StftConfig config;
  std::uint32_t sampleRate = 0;
  /// Length of the analysed signal; istft returns this many samples.
  std::size_t signalLength = 0;

  std::size_t bins() const { return coefficients.bins(); }
  std::size_t frames() const { return coefficients.frames(); }
  RealGrid magnitude() const;
  /// Principal argument in (-pi, pi].
  RealGrid phase() const;

  static Spectrogram fromPolar(const RealGrid& magnitude, const RealGrid& phase,
                               const StftConfig& config,
                               std::uint32_t sampleRate,
                               std::size_t signalLength = 0);
};

/// Principal argument of z in (-pi, pi]; arg(-0 - 0i) style ties map to +pi.
double principalArg(Complex z);

/// Discrete STFT with the window centered on sample hop*n; the signal is
/// treated as zero outside [0, size).  Frames are processed in parallel.
Spectrogram stft(std::span<const double> signal, const StftConfig& config,
                 std::uint32_t sampleRate = 0);

/// Least-squares inverse (canonical dual window).  For a spectrogram produced
/// by stft this returns the analysed signal.
std::vector<double> istft(const Spectrogram& spec);

/// Throws InvalidArgument if some sample in [0, span) is not covered by a
/// window tap (overlap-add normalizer vanishes).
void checkReconstructible(const StftConfig& config, std::size_t frames);

/// Causal frame source.  A consumer positioned at frame n may read frames
/// n - k (any history) up to n + lookAhead; reading further throws.
class FrameStream {
 public:
  FrameStream(const RealGrid& magnitude, std::size_t lookAhead = 0);

  bool done() const { return next_ >= magnitude_->frames(); }
  std::size_t position() const { return next_; }
  std::size_t bins() const { return magnitude_->bins(); }

  /// Returns the next frame and advances.
  std::span<const double> next();
  /// Access to an already delivered frame or an allowed look-ahead frame.
  std::span<const double> at(std::size_t frame) const;

 private:
  const RealGrid* magnitude_;
  std::size_t lookAhead_;
  std::size_t next_ = 0;
};

}  // namespace phaseline
