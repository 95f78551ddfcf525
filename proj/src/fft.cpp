// src/fft.cpp

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

#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace phaseline::detail {

namespace {

std::mutex& planMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const RealFft& RealFft::forSize(std::size_t size) {
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard<std::mutex> lock(planMutex());
  auto it = cache.find(size);
  if (it == cache.end()) {
    it = cache.emplace(size, std::unique_ptr<RealFft>(new RealFft(size))).first;
  }
  return *it->second;
}

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size == 0) throw InvalidArgument("FFT size must be positive");
  // Planning only; the scratch arrays are never used for execution.
  std::vector<double> real(size);
  std::vector<Complex> spec(size / 2 + 1);
  const int n = static_cast<int>(size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forwardPlan_ = fftw_plan_dft_r2c_1d(
      n, real.data(), reinterpret_cast<fftw_complex*>(spec.data()), flags);
  inversePlan_ = fftw_plan_dft_c2r_1d(
      n, reinterpret_cast<fftw_complex*>(spec.data()), real.data(), flags);
  if (forwardPlan_ == nullptr || inversePlan_ == nullptr) {
    throw Error("FFTW planning failed");
  }
}

RealFft::~RealFft() {
  fftw_destroy_plan(static_cast<fftw_plan>(forwardPlan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inversePlan_));
}

void RealFft::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forwardPlan_),
                       const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(Complex* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inversePlan_),
                       reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace phaseline::detail
