// phaseline/reference.hpp

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

// Serial, unoptimised implementations of the parallel kernels.  They follow
// the defining sums term by term and exist to check the fast paths in tests
// and to give the benchmark a baseline.

#pragma once

#include <span>
#include <vector>

#include "phaseline/nn.hpp"
#include "phaseline/spectral.hpp"

namespace phaseline::reference {

/// X[m,n] = sum_l x[l + hop n] g[l] exp(-2 pi i l m / fftSize), evaluated
/// directly in O(L * M) per frame.
Spectrogram stftDirect(std::span<const double> signal, const StftConfig& config);

/// One convolution layer with loops in (out, bin, in, tap) order and double
/// accumulation.
std::vector<float> applyLayerNaive(const nn::LayerSpec& layer,
                                   std::span<const float> in, std::size_t bins);

std::vector<float> forwardNaive(const nn::ConvNetModel& model,
                                const nn::FeatureFrame& feature);

}  // namespace phaseline::reference
