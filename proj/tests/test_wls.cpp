// tests/test_wls.cpp

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

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phaseline/metrics.hpp"
#include "phaseline/wls.hpp"

using namespace phaseline;

namespace {

TridiagonalHermitianSystem randomSystem(std::size_t n, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  TridiagonalHermitianSystem sys;
  sys.upper.resize(n - 1);
  for (auto& u : sys.upper) u = Complex(dist(engine), dist(engine));
  sys.diag.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    // Strict diagonal dominance makes the matrix positive definite.
    double off = 0.0;
    if (m > 0) off += std::abs(sys.upper[m - 1]);
    if (m + 1 < n) off += std::abs(sys.upper[m]);
    sys.diag[m] = off + 0.1 + std::abs(dist(engine));
  }
  sys.rhs.resize(n);
  for (auto& b : sys.rhs) b = Complex(dist(engine), dist(engine));
  return sys;
}

std::vector<Complex> denseSolve(const TridiagonalHermitianSystem& sys) {
  const auto n = static_cast<Eigen::Index>(sys.size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd b(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    a(m, m) = sys.diag[static_cast<std::size_t>(m)];
    b(m) = sys.rhs[static_cast<std::size_t>(m)];
    if (m + 1 < n) {
      a(m, m + 1) = sys.upper[static_cast<std::size_t>(m)];
      a(m + 1, m) = std::conj(sys.upper[static_cast<std::size_t>(m)]);
    }
  }
  const Eigen::VectorXcd x = a.partialPivLu().solve(b);
  return {x.data(), x.data() + n};
}

double relativeDiff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

ReconstructionState stateFrom(const std::vector<double>& mag, const std::vector<double>& phase) {
  ReconstructionState s;
  s.prevPhase = phase;
  for (std::size_t m = 0; m < mag.size(); ++m) s.prevCoefficients.push_back(std::polar(mag[m], phase[m]));
  return s;
}

}  // namespace

TEST_CASE("weights") {
  const std::vector<double> prev = {1.0, 4.0, 0.25};
  const std::vector<double> cur = {4.0, 1.0, 1.0};
  const auto w = buildWeights(prev, cur, 0.5, 3.0);
  CHECK(w.lambda == std::vector<double>{2.0, 2.0, 0.5});
  REQUIRE(w.gamma.size() == 2);
  CHECK(w.gamma[0] == doctest::Approx(6.0));
  CHECK(w.gamma[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(buildWeights(prev, cur, 0.5, -1.0), InvalidArgument);
  CHECK_THROWS_AS(buildWeights(prev, std::vector<double>{1.0}, 0.5, 1.0), DimensionMismatch);
  const auto zero = buildWeights(prev, cur, 0.5, 0.0);
  for (double g : zero.gamma) CHECK(g == 0.0);
}

TEST_CASE("two-bin system matches the hand expansion") {
  const std::vector<double> magPrev = {1.0, 2.0};
  const std::vector<double> magCur = {1.5, 0.5};
  const std::vector<double> tpd = {0.3, -1.1};
  const std::vector<double> fpd = {2.0};
  const auto state = stateFrom(magPrev, {0.1, -0.4});
  const auto ratios = toComplexRatios(magPrev, magCur, tpd, fpd, 1e-12);
  const auto weights = buildWeights(magPrev, magCur, 0.5, 2.0);
  const auto sys = assembleSystem(ratios, weights, state);

  // T + S = L0|z0 - y0|^2 + L1|z1 - y1|^2 + G|z1 - u z0|^2.
  const double l0 = std::sqrt(1.5), l1 = 1.0, g = 2.0 * std::sqrt(0.75);
  const Complex u = std::polar(0.5 / 1.5, 2.0);
  CHECK(sys.diag[0].real() == doctest::Approx(l0 + g * std::norm(u)));
  CHECK(sys.diag[1].real() == doctest::Approx(l1 + g));
  CHECK(std::abs(sys.upper[0] - (-g * std::conj(u))) < 1e-14);
  const Complex y0 = std::polar(1.5, 0.3) * std::polar(1.0, 0.1);
  const Complex y1 = std::polar(0.25, -1.1) * std::polar(2.0, -0.4);
  CHECK(std::abs(sys.rhs[0] - l0 * y0) < 1e-14);
  CHECK(std::abs(sys.rhs[1] - l1 * y1) < 1e-14);

  const auto z = solveTridiagonal(sys);
  CHECK(z[0].real() == doctest::Approx(1.2300535943191464).epsilon(1e-12));
  CHECK(z[0].imag() == doctest::Approx(0.58097562744513631).epsilon(1e-12));
  CHECK(z[1].real() == doctest::Approx(-0.2068664055637468).epsilon(1e-12));
  CHECK(z[1].imag() == doctest::Approx(0.002717088356807229).epsilon(1e-9));
}

TEST_CASE("five-bin frame matches the stacked least-squares solution") {
  const std::vector<double> magPrev = {0.2, 1.0, 3.0, 0.7, 0.05};
  const std::vector<double> magCur = {0.3, 1.4, 2.5, 0.9, 0.1};
  const std::vector<double> tpd = {0.0, 0.5, 1.0, -2.0, 3.0};
  const std::vector<double> fpd = {1.2, -0.3, 0.8, -2.9};
  const auto state = stateFrom(magPrev, {0.0, -1.0, 2.0, 0.4, -3.0});
  const auto r = reconstructFrame(state, magPrev, magCur, tpd, fpd, WlsParams{}, 1e-12);
  const std::vector<double> expected = {2.2610192372234961, -2.8199193501649629,
                                        -3.1406818689962352, -2.2901502119847912,
                                        1.0566472392669555};
  for (std::size_t m = 0; m < 5; ++m) CHECK(awe(r.phase[m], expected[m]) < 1e-10);
  CHECK(r.residual < 1e-12);
  CHECK(r.state.frameIndex == state.frameIndex + 1);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(std::abs(r.state.prevCoefficients[m]) == doctest::Approx(magCur[m]));
  }
}

TEST_CASE("tridiagonal solver agrees with a dense solve") {
  std::mt19937_64 engine(21);
  for (std::size_t n : {1u, 2u, 3u, 16u, 513u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto sys = randomSystem(n, engine);
      CHECK(relativeDiff(solveTridiagonal(sys), denseSolve(sys)) < 1e-12);
    }
  }
  CHECK(solveTridiagonal(TridiagonalHermitianSystem{}).empty());
}

TEST_CASE("solver rejects indefinite and malformed systems") {
  TridiagonalHermitianSystem sys;
  sys.diag = {1.0, 1.0};
  sys.upper = {Complex(2.0, 0.0)};
  sys.rhs = {1.0, 1.0};
  CHECK_THROWS_AS(solveTridiagonal(sys), SingularSystem);
  sys.diag = {0.0, 1.0};
  sys.upper = {Complex(0.0, 0.0)};
  CHECK_THROWS_AS(solveTridiagonal(sys), SingularSystem);
  sys.diag = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(solveTridiagonal(sys), DimensionMismatch);
}

TEST_CASE("solution minimises the objective") {
  const auto x = fixtures::filteredNoise(6000, 4);
  const auto spec = stft(x, StftConfig::hann(256, 64, 256));
  const auto mag = spec.magnitude();
  const auto diffs = oracleDifferences(spec);
  std::mt19937_64 engine(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto state = initializeFirstFrame(mag.frame(0), diffs[0].fpd);
  const double floor = magnitudeFloor(*std::max_element(mag.data().begin(), mag.data().end()));
  for (std::size_t n = 1; n < 12; ++n) {
    const auto r = reconstructFrame(state, mag.frame(n - 1), mag.frame(n), *diffs[n].tpd,
                                    diffs[n].fpd, WlsParams{}, floor);
    std::vector<double> prevF(mag.frame(n - 1).begin(), mag.frame(n - 1).end());
    std::vector<double> curF(mag.frame(n).begin(), mag.frame(n).end());
    for (double& a : prevF) a = std::max(a, floor);
    for (double& a : curF) a = std::max(a, floor);
    const auto ratios = toComplexRatios(prevF, curF, *diffs[n].tpd, diffs[n].fpd, floor);
    const auto weights = buildWeights(prevF, curF, WlsParams{}.p, WlsParams{}.gamma0);
    const double best = wlsObjective(r.solution, ratios, weights, state);
    double scale = 0.0;
    for (const auto& z : r.solution) scale = std::max(scale, std::abs(z));
    for (int k = 0; k < 50; ++k) {
      auto z = r.solution;
      for (auto& c : z) c += 1e-3 * scale * Complex(normal(engine), normal(engine));
      CHECK(wlsObjective(z, ratios, weights, state) >= best);
    }
    CHECK(r.residual < 1e-10);
    state = r.state;
  }
}

TEST_CASE("gamma0 = 0 reduces to time integration") {
  const auto x = fixtures::chirp(8000);
  const auto spec = stft(x, StftConfig::hann(512, 128, 512));
  const auto mag = spec.magnitude();
  // Perturbed differences so the comparison is not trivially exact.
  auto diffs = oracleDifferences(spec);
  std::mt19937_64 engine(6);
  std::uniform_real_distribution<double> noise(-0.5, 0.5);
  for (auto& d : diffs) {
    for (auto& u : d.fpd) u += noise(engine);
    if (d.tpd) for (auto& v : *d.tpd) v += noise(engine);
  }
  const auto wls = wlsReconstruct(mag, diffs, {WlsParams{}.p, 0.0});
  const auto ti = timeIntegrationReconstruct(mag, diffs);
  double worst = 0.0;
  for (std::size_t i = 0; i < wls.data().size(); ++i) {
    worst = std::max(worst, awe(wls.data()[i], ti.data()[i]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("oracle differences reconstruct the signal") {
  const StftConfig config = StftConfig::hann(512, 128, 512);
  for (const auto& x : {fixtures::sinusoid(8000), fixtures::chirp(8000), fixtures::filteredNoise(8000)}) {
    const auto spec = stft(x, config);
    const auto mag = spec.magnitude();
    const auto diffs = oracleDifferences(spec);
    const auto phase = wlsReconstruct(mag, diffs, WlsParams{});
    CHECK(lsc(Spectrogram::fromPolar(mag, phase, config, 0, x.size()), mag) <= -40.0);
    const auto ti = timeIntegrationReconstruct(mag, diffs);
    CHECK(lsc(Spectrogram::fromPolar(mag, ti, config, 0, x.size()), mag) <= -40.0);
  }
}

TEST_CASE("phase is invariant to a global gain") {
  const StftConfig config = StftConfig::hann(256, 64, 256);
  const auto spec = stft(fixtures::filteredNoise(5000, 9), config);
  const auto mag = spec.magnitude();
  const auto diffs = oracleDifferences(spec);
  RealGrid louder = mag;
  for (double& a : louder.data()) a *= 8.0;
  const auto a = wlsReconstruct(mag, diffs, WlsParams{});
  const auto b = wlsReconstruct(louder, diffs, WlsParams{});
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (mag.data()[i] > 1e-6) worst = std::max(worst, awe(a.data()[i], b.data()[i]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("streaming reconstruction is causal") {
  const StftConfig config = StftConfig::hann(256, 64, 256);
  const auto spec = stft(fixtures::chirp(5000), config);
  const auto mag = spec.magnitude();
  auto diffs = oracleDifferences(spec);
  const auto base = wlsReconstruct(mag, diffs, WlsParams{});
  RealGrid altered = mag;
  const std::size_t cut = mag.frames() - 5;
  for (std::size_t n = cut; n < mag.frames(); ++n) {
    for (auto& v : altered.frame(n)) v *= 3.0;
    for (auto& u : diffs[n].fpd) u = -u;
  }
  const auto other = wlsReconstruct(altered, diffs, WlsParams{});
  for (std::size_t n = 0; n < cut; ++n) {
    for (std::size_t m = 0; m < mag.bins(); ++m) CHECK(other(m, n) == base(m, n));
  }
}

TEST_CASE("streaming driver and first frame") {
  const std::vector<double> mag = {1.0, 2.0, 0.5};
  const std::vector<double> fpd = {0.5, 3.0};
  const auto s = initializeFirstFrame(mag, fpd);
  CHECK(s.prevPhase[0] == 0.0);
  CHECK(s.prevPhase[1] == 0.5);
  CHECK(s.prevPhase[2] == doctest::Approx(wrap(3.5)));
  CHECK(std::abs(s.prevCoefficients[1] - std::polar(2.0, 0.5)) < 1e-15);
  CHECK_THROWS_AS(initializeFirstFrame(mag, mag), DimensionMismatch);

  WlsReconstructor rec(WlsParams{});
  CHECK(rec.push(mag, {}, fpd) == s.prevPhase);
  const auto p = rec.push(mag, std::vector<double>{0.1, 0.2, 0.3}, fpd);
  CHECK(p.size() == 3);
  CHECK(rec.lastResidual() < 1e-12);
  CHECK(rec.state().frameIndex == 1);
  CHECK_THROWS_AS(rec.push(mag, std::vector<double>{0.1}, fpd), DimensionMismatch);

  const auto ti = timeIntegrationBaseline(s, std::vector<double>{kPi, 0.0, -1.0});
  CHECK(ti[0] == kPi);
  CHECK(ti[1] == 0.5);
  CHECK_THROWS_AS(timeIntegrationBaseline(s, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("Griffin-Lim refinement") {
  const StftConfig config = StftConfig::hann(256, 64, 256);
  const auto x = fixtures::chirp(4000);
  const auto spec = stft(x, config);
  const auto mag = spec.magnitude();
  SUBCASE("the true phase is a fixed point") {
    const auto p = griffinLimRefine(spec, 3);
    const auto out = Spectrogram::fromPolar(mag, p, config, 0, x.size());
    CHECK(lsc(out, mag) <= -100.0);
  }
  SUBCASE("iterations reduce the inconsistency from random phase") {
    RealGrid phase(mag.frames(), mag.bins());
    std::mt19937_64 engine(3);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (double& p : phase.data()) p = dist(engine);
    const auto start = Spectrogram::fromPolar(mag, phase, config, 0, x.size());
    const double before = lsc(start, mag);
    const auto refined = griffinLimRefine(start, 30);
    const double after = lsc(Spectrogram::fromPolar(mag, refined, config, 0, x.size()), mag);
    CHECK(after < before - 3.0);
    CHECK(griffinLimRefine(start, 0) == start.phase());
  }
}
