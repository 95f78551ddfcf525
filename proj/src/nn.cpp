// src/nn.cpp

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

#include "phaseline/nn.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phaseline/binary_io.hpp"

namespace phaseline::nn {

namespace {

FormatError shapeError(const std::string& what) {
  return FormatError(FormatError::Kind::DimensionMismatch, what);
}

LayerSpec makeLayer(LayerKind kind, std::size_t in, std::size_t out,
                    std::size_t kernel) {
  LayerSpec l;
  l.kind = kind;
  l.inChannels = static_cast<std::uint16_t>(in);
  l.outChannels = static_cast<std::uint16_t>(out);
  l.kernelSize = static_cast<std::uint16_t>(kernel);
  l.weights.assign(out * in * kernel, 0.0f);
  l.bias.assign(out, 0.0f);
  if (kind == LayerKind::FreqGatedConv) {
    l.gateWeights.assign(out * in * kernel, 0.0f);
    l.gateBias.assign(out, 0.0f);
  }
  return l;
}

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// Accumulates conv(in) into `acc` (already holding the bias) for channel o.
void convolveChannel(std::span<const float> weights, std::size_t o,
                     std::size_t inCh, std::size_t kernel,
                     std::span<const float> in, std::size_t bins,
                     float* acc) {
  const auto half = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto nb = static_cast<std::ptrdiff_t>(bins);
  for (std::size_t i = 0; i < inCh; ++i) {
    const float* src = in.data() + i * bins;
    const float* w = weights.data() + (o * inCh + i) * kernel;
    for (std::size_t j = 0; j < kernel; ++j) {
      const float wj = w[j];
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - half;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nb, nb - shift);
      for (std::ptrdiff_t m = lo; m < hi; ++m) acc[m] += wj * src[m + shift];
    }
  }
}

}  // namespace

std::size_t LayerSpec::parameterCount() const {
  return weights.size() + bias.size() + gateWeights.size() + gateBias.size();
}

void LayerSpec::validate() const {
  if (kernelSize == 0 || kernelSize % 2 == 0) {
    throw shapeError("kernel size must be odd, got " + std::to_string(kernelSize));
  }
  if (inChannels == 0 || outChannels == 0) throw shapeError("layer with zero channels");
  const std::size_t wn = std::size_t{outChannels} * inChannels * kernelSize;
  if (weights.size() != wn || bias.size() != outChannels) {
    throw shapeError("weight tensor does not match declared channels");
  }
  const bool gated = kind == LayerKind::FreqGatedConv;
  if (gated && (gateWeights.size() != wn || gateBias.size() != outChannels)) {
    throw shapeError("gate tensor does not match declared channels");
  }
  if (!gated && (!gateWeights.empty() || !gateBias.empty())) {
    throw shapeError("plain convolution carries gate parameters");
  }
}

ConvNetModel::ConvNetModel(Head head, std::vector<LayerSpec> layers)
    : head_(head), layers_(std::move(layers)) {
  validate();
}

ConvNetModel ConvNetModel::zeros(Head head, const Architecture& arch) {
  std::vector<LayerSpec> layers;
  layers.push_back(makeLayer(LayerKind::FreqConv, arch.lookBack + 1, arch.channels, 1));
  for (std::size_t k = 0; k < arch.gatedLayers; ++k) {
    layers.push_back(makeLayer(LayerKind::FreqGatedConv, arch.channels,
                               arch.channels, arch.gatedKernel));
  }
  layers.push_back(makeLayer(LayerKind::FreqConv, arch.channels, 1, 1));
  return ConvNetModel(head, std::move(layers));
}

ConvNetModel ConvNetModel::random(Head head, std::uint64_t seed,
                                  const Architecture& arch) {
  ConvNetModel model = zeros(head, arch);
  std::mt19937_64 engine(seed);
  for (auto& layer : model.layers_) {
    const float bound =
        1.0f / std::sqrt(static_cast<float>(layer.inChannels * layer.kernelSize));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (auto* tensor : {&layer.weights, &layer.bias, &layer.gateWeights, &layer.gateBias}) {
      for (float& v : *tensor) v = dist(engine);
    }
  }
  return model;
}

std::size_t ConvNetModel::inputChannels() const {
  return layers_.empty() ? 0 : layers_.front().inChannels;
}

std::size_t ConvNetModel::parameterCount() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.parameterCount();
  return total;
}

void ConvNetModel::validate() const {
  if (layers_.empty()) throw shapeError("model has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].validate();
    if (k > 0 && layers_[k].inChannels != layers_[k - 1].outChannels) {
      throw shapeError("layer " + std::to_string(k) + " expects " +
                       std::to_string(layers_[k].inChannels) +
                       " channels but receives " +
                       std::to_string(layers_[k - 1].outChannels));
    }
  }
  if (layers_.back().outChannels != 1) throw shapeError("last layer must have one output channel");
}

FeatureFrame buildFeature(std::span<const std::vector<double>> frames) {
  if (frames.empty()) throw InvalidArgument("feature needs at least one frame");
  const std::size_t bins = frames.front().size();
  double sum = 0.0;
  for (const auto& f : frames) {
    if (f.size() != bins) throw DimensionMismatch("feature frames differ in length");
    for (double v : f) sum += v;
  }
  const double mean = sum / static_cast<double>(bins * frames.size());
  FeatureFrame out;
  out.bins = bins;
  out.channels = frames.size();
  out.data.resize(bins * frames.size());
  for (std::size_t c = 0; c < frames.size(); ++c) {
    for (std::size_t m = 0; m < bins; ++m) {
      out.data[c * bins + m] = static_cast<float>(frames[c][m] - mean);
    }
  }
  return out;
}

std::vector<float> applyLayer(const LayerSpec& layer, std::span<const float> in,
                              std::size_t bins) {
  const std::size_t inCh = layer.inChannels;
  const std::size_t outCh = layer.outChannels;
  const std::size_t kernel = layer.kernelSize;
  if (in.size() != inCh * bins) throw DimensionMismatch("layer input has wrong shape");
  const bool gated = layer.kind == LayerKind::FreqGatedConv;
  std::vector<float> out(outCh * bins);

#pragma omp parallel
  {
    std::vector<float> gate(gated ? bins : 0);
#pragma omp for schedule(static)
    for (std::ptrdiff_t so = 0; so < static_cast<std::ptrdiff_t>(outCh); ++so) {
      const auto o = static_cast<std::size_t>(so);
      float* acc = out.data() + o * bins;
      std::fill(acc, acc + bins, layer.bias[o]);
      convolveChannel(layer.weights, o, inCh, kernel, in, bins, acc);
      if (gated) {
        std::fill(gate.begin(), gate.end(), layer.gateBias[o]);
        convolveChannel(layer.gateWeights, o, inCh, kernel, in, bins, gate.data());
        for (std::size_t m = 0; m < bins; ++m) acc[m] *= sigmoid(gate[m]);
      }
    }
  }
  return out;
}

std::vector<float> forward(const ConvNetModel& model, const FeatureFrame& feature) {
  if (feature.channels != model.inputChannels()) {
    throw DimensionMismatch("feature has " + std::to_string(feature.channels) +
                            " channels, model expects " +
                            std::to_string(model.inputChannels()));
  }
  std::vector<float> x = feature.data;
  for (const auto& layer : model.layers()) x = applyLayer(layer, x, feature.bins);
  if (model.head() == Head::Fpd) x.erase(x.begin());
  return x;
}

std::vector<float> forwardBpd(const ConvNetModel& model, const FeatureFrame& feature) {
  if (model.head() != Head::Bpd) throw InvalidArgument("model is not a BPD head");
  return forward(model, feature);
}

std::vector<float> forwardFpd(const ConvNetModel& model, const FeatureFrame& feature) {
  if (model.head() != Head::Fpd) throw InvalidArgument("model is not an FPD head");
  return forward(model, feature);
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> saveModel(const ConvNetModel& model) {
  model.validate();
  ByteWriter w;
  w.magic("PDNW");
  w.u16(1);
  w.u8(static_cast<std::uint8_t>(model.head()));
  w.u16(static_cast<std::uint16_t>(model.layers().size()));
  for (const auto& l : model.layers()) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u16(l.inChannels);
    w.u16(l.outChannels);
    w.u16(l.kernelSize);
    w.f32s(l.weights);
    w.f32s(l.bias);
    if (l.kind == LayerKind::FreqGatedConv) {
      w.f32s(l.gateWeights);
      w.f32s(l.gateBias);
    }
  }
  const std::uint32_t crc = crc32(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

ConvNetModel loadModel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expectMagic("PDNW");
  const auto version = r.u16();
  if (version != 1) {
    throw FormatError(FormatError::Kind::BadVersion,
                      "unsupported PDNW version " + std::to_string(version));
  }
  const auto head = r.u8();
  if (head > 1) throw FormatError(FormatError::Kind::Malformed, "unknown head " + std::to_string(head));
  const auto layerCount = r.u16();
  std::vector<LayerSpec> layers(layerCount);
  for (auto& l : layers) {
    const auto kind = r.u8();
    if (kind > 1) throw FormatError(FormatError::Kind::Malformed, "unknown layer kind " + std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    l.inChannels = r.u16();
    l.outChannels = r.u16();
    l.kernelSize = r.u16();
    const std::size_t wn = std::size_t{l.outChannels} * l.inChannels * l.kernelSize;
    l.weights = r.f32s(wn);
    l.bias = r.f32s(l.outChannels);
    if (l.kind == LayerKind::FreqGatedConv) {
      l.gateWeights = r.f32s(wn);
      l.gateBias = r.f32s(l.outChannels);
    }
  }
  const std::size_t payloadEnd = r.position();
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::Malformed, "trailing bytes after PDNW checksum");
  }
  if (crc32(bytes.subspan(0, payloadEnd)) != stored) {
    throw FormatError(FormatError::Kind::BadCrc, "PDNW checksum mismatch");
  }
  ConvNetModel model(static_cast<Head>(head), std::move(layers));
  return model;
}

ConvNetModel loadModel(std::span<const std::uint8_t> bytes, Head expected) {
  ConvNetModel m = loadModel(bytes);
  if (m.head() != expected) {
    throw FormatError(FormatError::Kind::HeadMismatch,
                      std::string("model head is ") +
                          (m.head() == Head::Bpd ? "BPD" : "FPD") + ", expected " +
                          (expected == Head::Bpd ? "BPD" : "FPD"));
  }
  return m;
}

DnnDifferenceEstimator::DnnDifferenceEstimator(
    std::shared_ptr<const ConvNetModel> bpdModel,
    std::shared_ptr<const ConvNetModel> fpdModel, std::size_t hop,
    std::size_t fftSize)
    : bpd_(std::move(bpdModel)), fpd_(std::move(fpdModel)), hop_(hop), fftSize_(fftSize) {
  if (!bpd_ || !fpd_) throw InvalidArgument("both BPD and FPD models are required");
  if (bpd_->head() != Head::Bpd || fpd_->head() != Head::Fpd) {
    throw FormatError(FormatError::Kind::HeadMismatch, "models passed in the wrong slots");
  }
  if (bpd_->inputChannels() != fpd_->inputChannels()) {
    throw DimensionMismatch("BPD and FPD models disagree in look-back");
  }
}

PhaseDifferenceFrame DnnDifferenceEstimator::push(std::span<const double> magnitude) {
  const std::size_t bins = magnitude.size();
  if (bins < 2) throw InvalidArgument("need at least two bins");
  runningMax_ = std::max(runningMax_, *std::max_element(magnitude.begin(), magnitude.end()));
  const double floor =
      std::max(magnitudeFloor(runningMax_), std::numeric_limits<double>::min());
  std::vector<double> logMag(bins);
  for (std::size_t m = 0; m < bins; ++m) logMag[m] = std::log(std::max(magnitude[m], floor));

  const std::size_t span = bpd_->inputChannels();
  if (history_.empty()) {
    history_.assign(span, logMag);
  } else {
    if (history_.back().size() != bins) throw DimensionMismatch("frame length changed mid-stream");
    history_.pop_front();
    history_.push_back(std::move(logMag));
  }
  const std::vector<std::vector<double>> window(history_.begin(), history_.end());
  const FeatureFrame feature = buildFeature(window);
  const auto w = forwardBpd(*bpd_, feature);
  const auto u = forwardFpd(*fpd_, feature);

  PhaseDifferenceFrame f;
  f.frameIndex = frames_;
  f.wrapped = false;
  f.fpd.assign(u.begin(), u.end());
  if (frames_ > 0) {
    std::vector<double> v(bins);
    for (std::size_t m = 0; m < bins; ++m) {
      v[m] = static_cast<double>(w[m]) + binAdvance(m, hop_, fftSize_);
    }
    f.tpd = std::move(v);
  }
  ++frames_;
  return f;
}

}  // namespace phaseline::nn
