// src/spectral.cpp

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

#include "phaseline/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"

namespace phaseline {

StftConfig StftConfig::hann(int length, int hop, int fftSize) {
  StftConfig c;
  c.window = WindowKind::Hann;
  c.windowLength = length;
  c.hop = hop;
  c.fftSize = fftSize;
  return c;
}

StftConfig StftConfig::gaussian(int length, double sigma, int hop,
                                int fftSize) {
  StftConfig c;
  c.window = WindowKind::Gaussian;
  c.windowLength = length;
  c.hop = hop;
  c.fftSize = fftSize;
  c.gaussianSigma = sigma;
  return c;
}

void StftConfig::validate() const {
  if (windowLength <= 0) throw InvalidArgument("window length must be positive");
  if (hop <= 0) throw InvalidArgument("hop must be positive");
  if (hop > windowLength) {
    throw InvalidArgument("hop " + std::to_string(hop) +
                          " exceeds window length " +
                          std::to_string(windowLength));
  }
  if (windowLength > fftSize) {
    throw InvalidArgument("window length exceeds FFT size");
  }
  if (oneSided && fftSize % 2 != 0) {
    throw InvalidArgument("one-sided spectra need an even FFT size");
  }
  if (window == WindowKind::Gaussian && !(gaussianSigma > 0.0)) {
    throw InvalidArgument("Gaussian window needs sigma > 0");
  }
  if (window == WindowKind::Custom) {
    if (customTaps.size() != 2 * halfWidth() + 1) {
      throw InvalidArgument("custom taps must have 2*floor(L/2)+1 entries");
    }
    for (std::size_t k = 0; k < customTaps.size(); ++k) {
      if (customTaps[k] != customTaps[customTaps.size() - 1 - k]) {
        throw InvalidArgument("custom window must be symmetric");
      }
    }
  }
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be positive");
  }
}

std::vector<double> StftConfig::taps() const {
  switch (window) {
    case WindowKind::Hann:
      return hannWindow(windowLength);
    case WindowKind::Gaussian:
      return gaussianWindow(windowLength, gaussianSigma);
    case WindowKind::Custom:
      return customTaps;
  }
  return {};
}

double StftConfig::effectiveBeta() const {
  if (beta > 0.0) return beta;
  switch (window) {
    case WindowKind::Gaussian:
      return gaussianSigma * gaussianSigma;
    case WindowKind::Hann:
    case WindowKind::Custom:
      break;
  }
  const double len = static_cast<double>(windowLength);
  return 0.25645 * len * len;
}

std::size_t StftConfig::numBins() const {
  return oneSided ? static_cast<std::size_t>(fftSize / 2 + 1)
                  : static_cast<std::size_t>(fftSize);
}

std::vector<double> hannWindow(int length) {
  if (length <= 0) throw InvalidArgument("window length must be positive");
  const int half = length / 2;
  std::vector<double> g(2 * half + 1);
  for (int l = -half; l <= half; ++l) {
    g[l + half] = 0.5 + 0.5 * std::cos(kTwoPi * l / length);
  }
  // cos(pi) is not exactly -1 in floating point; pin the zero.
  if (length % 2 == 0) g.front() = g.back() = 0.0;
  return g;
}

std::vector<double> gaussianWindow(int length, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (length <= 0) throw InvalidArgument("window length must be positive");
  const int half = length / 2;
  const double scale = std::pow(2.0 / (sigma * sigma), 0.25);
  std::vector<double> g(2 * half + 1);
  for (int l = 0; l <= half; ++l) {
    const double v = scale * std::exp(-kPi * l * l / (sigma * sigma));
    g[half + l] = v;
    g[half - l] = v;
  }
  return g;
}

std::size_t frameCount(std::size_t length, int hop) {
  const auto h = static_cast<std::size_t>(hop);
  return (length + h - 1) / h + 1;
}

double principalArg(Complex z) {
  const double a = std::arg(z);
  return a <= -kPi ? kPi : a;
}

RealGrid Spectrogram::magnitude() const {
  RealGrid out(frames(), bins());
  auto& dst = out.data();
  const auto& src = coefficients.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]);
  return out;
}

RealGrid Spectrogram::phase() const {
  RealGrid out(frames(), bins());
  auto& dst = out.data();
  const auto& src = coefficients.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = principalArg(src[i]);
  return out;
}

Spectrogram Spectrogram::fromPolar(const RealGrid& magnitude,
                                   const RealGrid& phase,
                                   const StftConfig& config,
                                   std::uint32_t sampleRate,
                                   std::size_t signalLength) {
  if (magnitude.frames() != phase.frames() ||
      magnitude.bins() != phase.bins()) {
    throw DimensionMismatch("magnitude and phase grids differ in shape");
  }
  Spectrogram s;
  s.config = config;
  s.sampleRate = sampleRate;
  s.coefficients = ComplexGrid(magnitude.frames(), magnitude.bins());
  s.signalLength = signalLength != 0
                       ? signalLength
                       : (magnitude.frames() > 0
                              ? (magnitude.frames() - 1) *
                                    static_cast<std::size_t>(config.hop)
                              : 0);
  auto& dst = s.coefficients.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::polar(magnitude.data()[i], phase.data()[i]);
  }
  return s;
}

Spectrogram stft(std::span<const double> signal, const StftConfig& config,
                 std::uint32_t sampleRate) {
  config.validate();
  if (signal.empty()) throw InvalidArgument("stft of an empty signal");

  const std::vector<double> g = config.taps();
  const auto half = static_cast<std::ptrdiff_t>(config.halfWidth());
  const auto fftSize = static_cast<std::size_t>(config.fftSize);
  const auto hop = static_cast<std::ptrdiff_t>(config.hop);
  const auto length = static_cast<std::ptrdiff_t>(signal.size());
  const std::size_t frames = frameCount(signal.size(), config.hop);
  const std::size_t bins = config.numBins();
  const std::size_t halfBins = fftSize / 2 + 1;
  const auto& fft = detail::RealFft::forSize(fftSize);

  Spectrogram out;
  out.config = config;
  out.sampleRate = sampleRate;
  out.signalLength = signal.size();
  out.coefficients = ComplexGrid(frames, bins);

#pragma omp parallel
  {
    std::vector<double> buffer(fftSize);
    std::vector<Complex> spectrum(halfBins);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(frames); ++n) {
      std::fill(buffer.begin(), buffer.end(), 0.0);
      const std::ptrdiff_t center = hop * n;
      for (std::ptrdiff_t l = -half; l <= half; ++l) {
        const std::ptrdiff_t t = center + l;
        if (t < 0 || t >= length) continue;
        const auto slot = static_cast<std::size_t>(
            (l % static_cast<std::ptrdiff_t>(fftSize) +
             static_cast<std::ptrdiff_t>(fftSize)) %
            static_cast<std::ptrdiff_t>(fftSize));
        buffer[slot] += signal[static_cast<std::size_t>(t)] * g[l + half];
      }
      fft.forward(buffer.data(), spectrum.data());
      auto dst = out.coefficients.frame(static_cast<std::size_t>(n));
      std::copy(spectrum.begin(), spectrum.end(), dst.begin());
      if (!config.oneSided) {
        for (std::size_t m = halfBins; m < fftSize; ++m) {
          dst[m] = std::conj(spectrum[fftSize - m]);
        }
      }
    }
  }
  return out;
}

namespace {

// Sum over frames of g^2 at every output sample, i.e. the diagonal of the
// frame operator divided by the FFT size.
std::vector<double> overlapNormalizer(const std::vector<double>& g,
                                      std::size_t half, std::size_t hop,
                                      std::size_t frames, std::size_t length) {
  std::vector<double> norm(length, 0.0);
  const auto h = static_cast<std::ptrdiff_t>(half);
  for (std::size_t n = 0; n < frames; ++n) {
    const auto center = static_cast<std::ptrdiff_t>(n * hop);
    for (std::ptrdiff_t l = -h; l <= h; ++l) {
      const std::ptrdiff_t t = center + l;
      if (t < 0 || t >= static_cast<std::ptrdiff_t>(length)) continue;
      norm[static_cast<std::size_t>(t)] += g[l + h] * g[l + h];
    }
  }
  return norm;
}

}  // namespace

void checkReconstructible(const StftConfig& config, std::size_t frames) {
  config.validate();
  const auto hop = static_cast<std::size_t>(config.hop);
  const std::size_t span = frames > 0 ? (frames - 1) * hop + 1 : 0;
  const auto g = config.taps();
  const auto norm = overlapNormalizer(g, config.halfWidth(), hop, frames, span);
  const double peak = norm.empty() ? 0.0 : *std::max_element(norm.begin(), norm.end());
  for (double v : norm) {
    if (!(v > 1e-10 * peak)) {
      throw InvalidArgument(
          "window/hop pair does not admit perfect reconstruction "
          "(overlap-add normalizer vanishes)");
    }
  }
}

std::vector<double> istft(const Spectrogram& spec) {
  const StftConfig& config = spec.config;
  config.validate();
  const std::size_t frames = spec.frames();
  if (frames == 0) return {};
  if (spec.bins() != config.numBins()) {
    throw DimensionMismatch("spectrogram bin count does not match config");
  }
  const auto fftSize = static_cast<std::size_t>(config.fftSize);
  const auto hop = static_cast<std::size_t>(config.hop);
  const std::size_t half = config.halfWidth();
  const std::size_t taps = 2 * half + 1;
  const std::size_t halfBins = fftSize / 2 + 1;
  const std::size_t length =
      spec.signalLength != 0 ? spec.signalLength : (frames - 1) * hop;
  const auto g = config.taps();
  const auto& fft = detail::RealFft::forSize(fftSize);

  checkReconstructible(config, frames);

  // Windowed inverse transforms, one row of `taps` samples per frame.
  std::vector<double> blocks(frames * taps);
#pragma omp parallel
  {
    std::vector<Complex> spectrum(halfBins);
    std::vector<double> buffer(fftSize);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(frames); ++n) {
      auto src = spec.coefficients.frame(static_cast<std::size_t>(n));
      std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(halfBins),
                spectrum.begin());
      if (!config.oneSided) {
        // Real part of the full inverse: average each bin with its mirror.
        for (std::size_t m = 1; m < halfBins; ++m) {
          spectrum[m] = 0.5 * (spectrum[m] + std::conj(src[(fftSize - m) % fftSize]));
        }
      }
      fft.inverse(spectrum.data(), buffer.data());
      double* row = blocks.data() + static_cast<std::size_t>(n) * taps;
      for (std::size_t k = 0; k < taps; ++k) {
        const auto l = static_cast<std::ptrdiff_t>(k) -
                       static_cast<std::ptrdiff_t>(half);
        const auto slot = static_cast<std::size_t>(
            (l % static_cast<std::ptrdiff_t>(fftSize) +
             static_cast<std::ptrdiff_t>(fftSize)) %
            static_cast<std::ptrdiff_t>(fftSize));
        row[k] = g[k] * buffer[slot];
      }
    }
  }

  const auto norm = overlapNormalizer(g, half, hop, frames, length);
  std::vector<double> out(length, 0.0);
  for (std::size_t n = 0; n < frames; ++n) {
    const auto center = static_cast<std::ptrdiff_t>(n * hop);
    const double* row = blocks.data() + n * taps;
    for (std::size_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t t =
          center + static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(half);
      if (t < 0 || t >= static_cast<std::ptrdiff_t>(length)) continue;
      out[static_cast<std::size_t>(t)] += row[k];
    }
  }
  const double scale = static_cast<double>(fftSize);
  for (std::size_t t = 0; t < length; ++t) {
    if (!(norm[t] > 0.0)) {
      throw InvalidArgument("sample " + std::to_string(t) +
                            " is not covered by any analysis window");
    }
    out[t] /= scale * norm[t];
  }
  return out;
}

FrameStream::FrameStream(const RealGrid& magnitude, std::size_t lookAhead)
    : magnitude_(&magnitude), lookAhead_(lookAhead) {}

std::span<const double> FrameStream::next() {
  if (done()) throw InvalidArgument("frame stream exhausted");
  return magnitude_->frame(next_++);
}

std::span<const double> FrameStream::at(std::size_t frame) const {
  // Frames up to (last delivered) + lookAhead are visible.
  if (next_ == 0 || frame + 1 > next_ + lookAhead_ ||
      frame >= magnitude_->frames()) {
    throw InvalidArgument("causality violation: frame " +
                          std::to_string(frame) + " requested at position " +
                          std::to_string(next_));
  }
  return magnitude_->frame(frame);
}

}  // namespace phaseline
