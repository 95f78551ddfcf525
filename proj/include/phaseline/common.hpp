// phaseline/common.hpp

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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaseline {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Complex = std::complex<double>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a tridiagonal system is not positive definite.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Frame-major 2-D array: `frames()` rows of `bins()` entries each.
///
/// Every time-frequency quantity in the library (magnitudes, phases,
/// coefficients, phase differences) is stored this way so that one frame is a
/// contiguous span.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t frames, std::size_t bins, T fill = T{})
      : frames_(frames), bins_(bins), data_(frames * bins, fill) {}

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t bin, std::size_t frame) {
    return data_[frame * bins_ + bin];
  }
  const T& operator()(std::size_t bin, std::size_t frame) const {
    return data_[frame * bins_ + bin];
  }

  std::span<T> frame(std::size_t n) {
    return std::span<T>(data_).subspan(n * bins_, bins_);
  }
  std::span<const T> frame(std::size_t n) const {
    return std::span<const T>(data_).subspan(n * bins_, bins_);
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<Complex>;

/// Deterministic phase advance 2*pi*hop*m/fftSize of bin m over one hop,
/// reduced modulo 2*pi with integer arithmetic so that e.g. hop*m a multiple
/// of fftSize gives exactly zero.
inline double binAdvance(std::size_t bin, std::size_t hop,
                         std::size_t fftSize) {
  const auto r = (static_cast<std::uint64_t>(hop) * bin) % fftSize;
  return kTwoPi * static_cast<double>(r) / static_cast<double>(fftSize);
}

}  // namespace phaseline
