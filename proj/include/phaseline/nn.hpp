// phaseline/nn.hpp

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

// Forward pass of the causal frequency-convolution networks that estimate
// BPD (M outputs) and FPD (M-1 outputs) from the current and look-back
// log-magnitude frames.  Time enters only as input channels, so the output
// for frame n depends on frames n-lookBack..n and nothing later.

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "phaseline/common.hpp"
#include "phaseline/phasediff.hpp"

namespace phaseline::nn {

enum class Head : std::uint8_t { Bpd = 0, Fpd = 1 };
enum class LayerKind : std::uint8_t { FreqConv = 0, FreqGatedConv = 1 };

/// One 1-D convolution along frequency, zero "same" padding.  Weights are
/// [out][in][kernel] row-major.  Gated layers compute
/// sigmoid(gate(x)) * conv(x).
struct LayerSpec {
  LayerKind kind = LayerKind::FreqConv;
  std::uint16_t kernelSize = 1;
  std::uint16_t inChannels = 0;
  std::uint16_t outChannels = 0;
  std::vector<float> weights;
  std::vector<float> bias;
  std::vector<float> gateWeights;
  std::vector<float> gateBias;

  std::size_t parameterCount() const;
  /// Throws FormatError(DimensionMismatch) on inconsistent shapes.
  void validate() const;

  bool operator==(const LayerSpec&) const = default;
};

struct Architecture {
  std::size_t lookBack = 3;
  std::size_t channels = 64;
  std::size_t gatedLayers = 5;
  std::size_t gatedKernel = 3;
};

class ConvNetModel {
 public:
  ConvNetModel() = default;
  ConvNetModel(Head head, std::vector<LayerSpec> layers);

  /// k=1 input conv, `gatedLayers` gated k=`gatedKernel` convs, k=1 output
  /// conv, all weights and biases zero.
  static ConvNetModel zeros(Head head, const Architecture& arch = {});
  /// Same shapes, weights drawn uniformly in +-1/sqrt(fan_in) from `seed`.
  static ConvNetModel random(Head head, std::uint64_t seed,
                             const Architecture& arch = {});

  Head head() const { return head_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::vector<LayerSpec>& mutableLayers() { return layers_; }
  std::size_t inputChannels() const;
  std::size_t lookBack() const { return inputChannels() - 1; }
  std::size_t parameterCount() const;

  /// Channel chaining, first/last layer shapes.
  void validate() const;

  bool operator==(const ConvNetModel&) const = default;

 private:
  Head head_ = Head::Bpd;
  std::vector<LayerSpec> layers_;
};

/// Mean-subtracted log-magnitudes of frames n-lookBack..n, channel-major:
/// data[c * bins + m] with channel c = 0 the oldest frame.
struct FeatureFrame {
  std::size_t bins = 0;
  std::size_t channels = 0;
  std::vector<float> data;
};

/// `frames` oldest first; all of equal length.
FeatureFrame buildFeature(std::span<const std::vector<double>> frames);

/// Output of the network for one feature: M values for BPD, M-1 for FPD
/// (index 0 of the raw M outputs dropped).  Values are unwrapped radians.
std::vector<float> forward(const ConvNetModel& model, const FeatureFrame& feature);
std::vector<float> forwardBpd(const ConvNetModel& model, const FeatureFrame& feature);
std::vector<float> forwardFpd(const ConvNetModel& model, const FeatureFrame& feature);

/// One layer, parallel over output channels.  `in` is [inCh][bins].
std::vector<float> applyLayer(const LayerSpec& layer, std::span<const float> in,
                              std::size_t bins);

std::vector<std::uint8_t> saveModel(const ConvNetModel& model);
ConvNetModel loadModel(std::span<const std::uint8_t> bytes);
/// Loads and checks that the file holds the expected head.
ConvNetModel loadModel(std::span<const std::uint8_t> bytes, Head expected);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Per-stream causal estimator: log-magnitude history, both networks, and
/// the BPD -> TPD conversion V = W + 2 pi hop m / fftSize.
class DnnDifferenceEstimator {
 public:
  DnnDifferenceEstimator(std::shared_ptr<const ConvNetModel> bpdModel,
                         std::shared_ptr<const ConvNetModel> fpdModel,
                         std::size_t hop, std::size_t fftSize);

  /// Consumes magnitude frame n; returns its differences.  The TPD is
  /// present from the second frame on.
  PhaseDifferenceFrame push(std::span<const double> magnitude);

 private:
  std::shared_ptr<const ConvNetModel> bpd_;
  std::shared_ptr<const ConvNetModel> fpd_;
  std::size_t hop_;
  std::size_t fftSize_;
  std::deque<std::vector<double>> history_;
  double runningMax_ = 0.0;
  std::size_t frames_ = 0;
};

}  // namespace phaseline::nn
