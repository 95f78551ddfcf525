// src/reference.cpp

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

#include "phaseline/reference.hpp"

#include <cmath>

namespace phaseline::reference {

Spectrogram stftDirect(std::span<const double> signal, const StftConfig& config) {
  config.validate();
  if (signal.empty()) throw InvalidArgument("stft of an empty signal");
  const auto g = config.taps();
  const auto half = static_cast<std::ptrdiff_t>(config.halfWidth());
  const auto hop = static_cast<std::ptrdiff_t>(config.hop);
  const double fftSize = config.fftSize;
  const std::size_t frames = frameCount(signal.size(), config.hop);
  const std::size_t bins = config.numBins();

  Spectrogram out;
  out.config = config;
  out.signalLength = signal.size();
  out.coefficients = ComplexGrid(frames, bins);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < bins; ++m) {
      Complex acc = 0.0;
      for (std::ptrdiff_t l = -half; l <= half; ++l) {
        const std::ptrdiff_t t = l + hop * static_cast<std::ptrdiff_t>(n);
        if (t < 0 || t >= static_cast<std::ptrdiff_t>(signal.size())) continue;
        // Reduce l*m modulo fftSize before scaling to keep the angle small.
        const auto lm = static_cast<double>(
            ((l * static_cast<std::ptrdiff_t>(m)) % config.fftSize + config.fftSize) %
            config.fftSize);
        acc += signal[static_cast<std::size_t>(t)] * g[l + half] *
               std::polar(1.0, -kTwoPi * lm / fftSize);
      }
      out.coefficients(m, n) = acc;
    }
  }
  return out;
}

std::vector<float> applyLayerNaive(const nn::LayerSpec& layer,
                                   std::span<const float> in, std::size_t bins) {
  const std::size_t inCh = layer.inChannels;
  const std::size_t outCh = layer.outChannels;
  const std::size_t k = layer.kernelSize;
  const auto half = static_cast<std::ptrdiff_t>(k / 2);
  const bool gated = layer.kind == nn::LayerKind::FreqGatedConv;
  std::vector<float> out(outCh * bins);
  for (std::size_t o = 0; o < outCh; ++o) {
    for (std::size_t m = 0; m < bins; ++m) {
      double lin = layer.bias[o];
      double gate = gated ? layer.gateBias[o] : 0.0;
      for (std::size_t i = 0; i < inCh; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(m) + static_cast<std::ptrdiff_t>(j) - half;
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(bins)) continue;
          const double x = in[i * bins + static_cast<std::size_t>(src)];
          lin += layer.weights[(o * inCh + i) * k + j] * x;
          if (gated) gate += layer.gateWeights[(o * inCh + i) * k + j] * x;
        }
      }
      const double y = gated ? lin / (1.0 + std::exp(-gate)) : lin;
      out[o * bins + m] = static_cast<float>(y);
    }
  }
  return out;
}

std::vector<float> forwardNaive(const nn::ConvNetModel& model,
                                const nn::FeatureFrame& feature) {
  std::vector<float> x = feature.data;
  for (const auto& layer : model.layers()) x = applyLayerNaive(layer, x, feature.bins);
  if (model.head() == nn::Head::Fpd) x.erase(x.begin());
  return x;
}

}  // namespace phaseline::reference
