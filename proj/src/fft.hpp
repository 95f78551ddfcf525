// src/fft.hpp

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

// Thin wrapper over FFTW plans.  Plans are created once per size under a lock
// and executed with the new-array interface, which is safe from any thread.

#pragma once

#include <cstddef>

#include "phaseline/common.hpp"

namespace phaseline::detail {

class RealFft {
 public:
  /// Shared plan pair for transforms of length `size`.
  static const RealFft& forSize(std::size_t size);

  std::size_t size() const { return size_; }
  /// out[k] = sum_j in[j] exp(-2 pi i j k / size), k = 0..size/2.
  void forward(const double* in, Complex* out) const;
  /// Unnormalized inverse from size/2+1 Hermitian bins; `in` is clobbered.
  void inverse(Complex* in, double* out) const;

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

 private:
  explicit RealFft(std::size_t size);

  std::size_t size_;
  void* forwardPlan_ = nullptr;
  void* inversePlan_ = nullptr;
};

}  // namespace phaseline::detail
