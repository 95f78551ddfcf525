// tools/phaseline_cli.cpp

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

// Command-line front end: analysis, oracle extraction, reconstruction by any
// method, evaluation and model inspection.

#include <omp.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "phaseline/audio_io.hpp"
#include "phaseline/binary_io.hpp"
#include "phaseline/metrics.hpp"
#include "phaseline/nn.hpp"
#include "phaseline/phasediff.hpp"
#include "phaseline/pghi.hpp"
#include "phaseline/spectral.hpp"
#include "phaseline/wls.hpp"

namespace {

using namespace phaseline;

struct StftOptions {
  int windowLength = 1024;
  int hop = 256;
  int fftSize = 1024;

  StftConfig config() const { return StftConfig::hann(windowLength, hop, fftSize); }
};

void addStftOptions(CLI::App* app, StftOptions& o) {
  app->add_option("--window-length", o.windowLength, "Hann window length")
      ->check(CLI::PositiveNumber);
  app->add_option("--hop", o.hop, "Hop size in samples")->check(CLI::PositiveNumber);
  app->add_option("--fft-size", o.fftSize, "FFT size")->check(CLI::PositiveNumber);
}

/// Outputs written by one command; removed again if the command fails.
class OutputSet {
 public:
  void write(const std::string& path, std::span<const std::uint8_t> bytes) {
    writeFileBytes(path, bytes);
    written_.push_back(path);
  }
  void writeWav(const std::string& path, const WavData& wav, SampleFormat format) {
    phaseline::writeWav(path, wav, format);
    written_.push_back(path);
  }
  void rollback() {
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
    written_.clear();
  }

 private:
  std::vector<std::string> written_;
};

WavData loadWavChecked(const std::string& path, std::uint32_t expectedRate) {
  WavData wav = readWav(path);
  if (expectedRate != 0 && wav.sampleRate != expectedRate) {
    throw InvalidArgument(path + ": sample rate " + std::to_string(wav.sampleRate) +
                          " differs from the expected " + std::to_string(expectedRate));
  }
  if (wav.samples.empty()) throw InvalidArgument(path + ": no samples");
  return wav;
}

bool hasExtension(const std::string& path, const char* ext) {
  return std::filesystem::path(path).extension() == ext;
}

std::uint64_t resolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PHASELINE_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("PHASELINE_SEED is not an unsigned integer");
  }
  return 0;
}

std::optional<nn::Head> parseHead(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "bpd") return nn::Head::Bpd;
  if (s == "fpd") return nn::Head::Fpd;
  throw InvalidArgument("head must be bpd or fpd");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string input;
  std::string output;
  bool complexPayload = false;
  std::uint32_t sampleRate = 0;
  StftOptions stft;
};

void cmdAnalyze(const AnalyzeArgs& a, OutputSet& out) {
  const WavData wav = loadWavChecked(a.input, a.sampleRate);
  const Spectrogram spec = stft(wav.samples, a.stft.config(), wav.sampleRate);
  const auto file = toSpectrogramFile(
      spec, a.complexPayload ? SpectrogramPayload::Complex : SpectrogramPayload::Magnitude);
  out.write(a.output, saveSpectrogramFile(file));
}

// ----------------------------------------------------------------- oracle

struct OracleArgs {
  std::string input;
  std::string diffsOut;
  std::string specOut;
  std::uint32_t sampleRate = 0;
  StftOptions stft;
};

void cmdOracle(const OracleArgs& a, OutputSet& out) {
  const WavData wav = loadWavChecked(a.input, a.sampleRate);
  const StftConfig config = a.stft.config();
  const Spectrogram spec = stft(wav.samples, config, wav.sampleRate);
  const auto diffs = oracleDifferences(spec);
  const auto dump = makeDump(diffs, static_cast<std::size_t>(config.hop),
                             static_cast<std::size_t>(config.fftSize));
  out.write(a.diffsOut, savePhaseDiffDump(dump));
  if (!a.specOut.empty()) {
    out.write(a.specOut,
              saveSpectrogramFile(toSpectrogramFile(spec, SpectrogramPayload::Magnitude)));
  }
}

// ------------------------------------------------------------ reconstruct

enum class Method { Oracle, Rtpghi, Pghi, Dnn, TimeInt, GlaRefine };

const std::map<std::string, Method> kMethods = {
    {"oracle", Method::Oracle}, {"rtpghi", Method::Rtpghi}, {"pghi", Method::Pghi},
    {"dnn", Method::Dnn},       {"timeint", Method::TimeInt}, {"gla-refine", Method::GlaRefine}};

struct ReconstructArgs {
  Method method = Method::Oracle;
  std::optional<Method> baseMethod;
  std::string input;
  std::string output;
  std::string batchList;
  std::size_t jobs = 1;
  WlsParams wls;
  std::size_t glaIters = 100;
  double tolerance = 1e-6;
  std::optional<std::uint64_t> seed;
  std::string bpdModel;
  std::string fpdModel;
  std::string diffsIn;
  std::string emitDiffs;
  std::string emitSpec;
  std::uint32_t sampleRate = 0;
  bool pcm16 = false;
  StftOptions stft;
};

/// Magnitude, analysis settings and (when known) the true phase of one input.
struct ReconstructionInput {
  RealGrid magnitude;
  StftConfig config;
  std::uint32_t sampleRate = 0;
  std::size_t signalLength = 0;
  std::optional<Spectrogram> reference;
};

ReconstructionInput loadReconstructionInput(const std::string& path,
                                            const ReconstructArgs& a) {
  ReconstructionInput in;
  if (hasExtension(path, ".pspc")) {
    const auto file = loadSpectrogramFile(readFileBytes(path));
    if (a.sampleRate != 0 && file.sampleRate != a.sampleRate) {
      throw InvalidArgument(path + ": sample rate " + std::to_string(file.sampleRate) +
                            " differs from the expected " + std::to_string(a.sampleRate));
    }
    in.config = configFromFile(file);
    in.magnitude = magnitudeFromFile(file);
    in.sampleRate = file.sampleRate;
    in.signalLength = (in.magnitude.frames() - 1) * static_cast<std::size_t>(in.config.hop);
    if (file.payload == SpectrogramPayload::Complex) {
      Spectrogram spec;
      spec.config = in.config;
      spec.sampleRate = in.sampleRate;
      spec.signalLength = in.signalLength;
      spec.coefficients = ComplexGrid(file.frames, file.bins);
      for (std::size_t i = 0; i < spec.coefficients.data().size(); ++i) {
        spec.coefficients.data()[i] = Complex(file.values[2 * i], file.values[2 * i + 1]);
      }
      in.reference = std::move(spec);
    }
    return in;
  }
  const WavData wav = loadWavChecked(path, a.sampleRate);
  in.config = a.stft.config();
  in.reference = stft(wav.samples, in.config, wav.sampleRate);
  in.magnitude = in.reference->magnitude();
  in.sampleRate = wav.sampleRate;
  in.signalLength = wav.samples.size();
  return in;
}

struct MethodResult {
  RealGrid phase;
  std::vector<PhaseDifferenceFrame> diffs;
};

class Reconstruction {
 public:
  Reconstruction(const ReconstructArgs& a, std::uint64_t seed,
                 std::shared_ptr<const nn::ConvNetModel> bpd,
                 std::shared_ptr<const nn::ConvNetModel> fpd)
      : args_(a), seed_(seed), bpd_(std::move(bpd)), fpd_(std::move(fpd)) {}

  MethodResult run(Method method, const ReconstructionInput& in) const {
    const auto hop = static_cast<std::size_t>(in.config.hop);
    const auto fft = static_cast<std::size_t>(in.config.fftSize);
    const HeapIntegrationParams heap{args_.tolerance, seed_};
    MethodResult r;
    switch (method) {
      case Method::Oracle:
        r.diffs = suppliedDifferences(in);
        r.phase = wlsReconstruct(in.magnitude, r.diffs, args_.wls);
        break;
      case Method::TimeInt:
        r.diffs = suppliedDifferences(in);
        r.phase = timeIntegrationReconstruct(in.magnitude, r.diffs);
        break;
      case Method::Pghi:
        if (!args_.diffsIn.empty()) {
          r.diffs = suppliedDifferences(in);
        } else {
          const auto scales = GradientScales::from(in.config);
          r.diffs = averageToBackwardDifferences(
              estimateDerivativesCentered(logMagnitude(in.magnitude), scales));
        }
        r.phase = pghiReconstruct(in.magnitude, r.diffs, heap);
        break;
      case Method::Rtpghi:
        if (!args_.diffsIn.empty()) {
          r.diffs = suppliedDifferences(in);
          r.phase = streamHeap(in.magnitude, r.diffs, heap);
        } else {
          const auto scales = GradientScales::from(in.config);
          r.diffs = averageToBackwardDifferences(
              estimateDerivativesCausal(logMagnitude(in.magnitude), scales));
          r.phase = rtpghiReconstruct(in.magnitude, in.config, heap);
        }
        break;
      case Method::Dnn: {
        if (!args_.diffsIn.empty()) {
          r.diffs = suppliedDifferences(in);
        } else {
          nn::DnnDifferenceEstimator estimator(bpd_, fpd_, hop, fft);
          for (std::size_t n = 0; n < in.magnitude.frames(); ++n) {
            r.diffs.push_back(estimator.push(in.magnitude.frame(n)));
          }
        }
        r.phase = wlsReconstruct(in.magnitude, r.diffs, args_.wls);
        break;
      }
      case Method::GlaRefine: {
        r = run(*args_.baseMethod, in);
        Spectrogram start = Spectrogram::fromPolar(in.magnitude, r.phase, in.config,
                                                   in.sampleRate, in.signalLength);
        r.phase = griffinLimRefine(start, args_.glaIters);
        break;
      }
    }
    return r;
  }

 private:
  std::vector<PhaseDifferenceFrame> suppliedDifferences(const ReconstructionInput& in) const {
    const auto hop = static_cast<std::size_t>(in.config.hop);
    const auto fft = static_cast<std::size_t>(in.config.fftSize);
    if (!args_.diffsIn.empty()) {
      const auto dump = loadPhaseDiffDump(readFileBytes(args_.diffsIn));
      if (dump.bins != in.magnitude.bins() || dump.frames != in.magnitude.frames()) {
        throw DimensionMismatch(args_.diffsIn + ": dimensions differ from the magnitude");
      }
      return differencesFromDump(dump, hop, fft);
    }
    if (!in.reference) {
      throw InvalidArgument("oracle differences need a WAV or complex PSPC input, or --diffs");
    }
    return oracleDifferences(*in.reference);
  }

  static RealGrid streamHeap(const RealGrid& magnitude,
                             std::span<const PhaseDifferenceFrame> diffs,
                             const HeapIntegrationParams& heap) {
    RtpghiState state(heap);
    RealGrid phase(magnitude.frames(), magnitude.bins());
    for (std::size_t n = 0; n < magnitude.frames(); ++n) {
      const auto& d = diffs[n];
      const std::span<const double> tpd =
          d.tpd ? std::span<const double>(*d.tpd) : std::span<const double>();
      const auto p = state.step(magnitude.frame(n), tpd, d.fpd);
      std::copy(p.begin(), p.end(), phase.frame(n).begin());
    }
    return phase;
  }

  const ReconstructArgs& args_;
  std::uint64_t seed_;
  std::shared_ptr<const nn::ConvNetModel> bpd_;
  std::shared_ptr<const nn::ConvNetModel> fpd_;
};

void validateReconstructArgs(const ReconstructArgs& a) {
  const Method effective = a.method == Method::GlaRefine
                               ? a.baseMethod.value_or(Method::GlaRefine)
                               : a.method;
  if (a.method == Method::GlaRefine) {
    if (!a.baseMethod) throw InvalidArgument("gla-refine requires --base-method");
    if (*a.baseMethod == Method::GlaRefine) {
      throw InvalidArgument("--base-method cannot be gla-refine");
    }
  }
  if (effective == Method::Dnn && (a.bpdModel.empty() || a.fpdModel.empty())) {
    throw InvalidArgument("dnn requires --bpd-model and --fpd-model");
  }
  if (a.wls.gamma0 < 0.0) throw InvalidArgument("--gamma0 must be non-negative");
  if (!(a.tolerance >= 0.0)) throw InvalidArgument("--tolerance must be non-negative");
}

void reconstructOne(const Reconstruction& engine, const ReconstructArgs& a,
                    const std::string& input, const std::string& output,
                    bool emitExtras) {
  OutputSet out;
  try {
    const ReconstructionInput in = loadReconstructionInput(input, a);
    const MethodResult r = engine.run(a.method, in);
    const Spectrogram spec = Spectrogram::fromPolar(in.magnitude, r.phase, in.config,
                                                    in.sampleRate, in.signalLength);
    WavData wav{in.sampleRate, istft(spec)};
    out.writeWav(output, wav, a.pcm16 ? SampleFormat::Pcm16 : SampleFormat::Float32);
    if (emitExtras && !a.emitDiffs.empty()) {
      const auto dump = makeDump(r.diffs, static_cast<std::size_t>(in.config.hop),
                                 static_cast<std::size_t>(in.config.fftSize));
      out.write(a.emitDiffs, savePhaseDiffDump(dump));
    }
    if (emitExtras && !a.emitSpec.empty()) {
      out.write(a.emitSpec,
                saveSpectrogramFile(toSpectrogramFile(spec, SpectrogramPayload::Complex)));
    }
  } catch (...) {
    out.rollback();
    throw;
  }
}

std::vector<std::pair<std::string, std::string>> readBatchList(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open batch list " + path);
  std::vector<std::pair<std::string, std::string>> jobs;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string in, out, extra;
    if (!(ss >> in >> out) || (ss >> extra)) {
      throw InvalidArgument(path + ": each line needs an input and an output path");
    }
    jobs.emplace_back(in, out);
  }
  return jobs;
}

int cmdReconstruct(const ReconstructArgs& a) {
  validateReconstructArgs(a);
  const std::uint64_t seed = resolveSeed(a.seed);
  std::shared_ptr<const nn::ConvNetModel> bpd, fpd;
  if (!a.bpdModel.empty()) {
    bpd = std::make_shared<nn::ConvNetModel>(
        nn::loadModel(readFileBytes(a.bpdModel), nn::Head::Bpd));
  }
  if (!a.fpdModel.empty()) {
    fpd = std::make_shared<nn::ConvNetModel>(
        nn::loadModel(readFileBytes(a.fpdModel), nn::Head::Fpd));
  }
  const Reconstruction engine(a, seed, bpd, fpd);

  if (a.batchList.empty()) {
    if (a.input.empty() || a.output.empty()) {
      throw InvalidArgument("reconstruct needs INPUT and OUTPUT, or --batch");
    }
    reconstructOne(engine, a, a.input, a.output, true);
    return 0;
  }
  if (!a.emitDiffs.empty() || !a.emitSpec.empty()) {
    throw InvalidArgument("--emit-diffs and --emit-spec apply to single-file runs only");
  }
  const auto jobs = readBatchList(a.batchList);
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex logMutex;
  auto worker = [&] {
    // Each file runs through its own single-threaded pipeline.
    omp_set_num_threads(1);
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        reconstructOne(engine, a, jobs[i].first, jobs[i].second, false);
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(logMutex);
        std::cerr << "error: " << jobs[i].first << ": " << e.what() << "\n";
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(a.jobs, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures == 0 ? 0 : 1;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string reference;
  std::string estimate;
  std::string bpdHistogram;
  std::string fpdHistogram;
  std::optional<double> maskQuantile;
  std::uint32_t sampleRate = 0;
  StftOptions stft;
};

void cmdEvaluate(const EvaluateArgs& a, OutputSet& out) {
  const WavData ref = loadWavChecked(a.reference, a.sampleRate);
  const WavData est = loadWavChecked(a.estimate, ref.sampleRate);
  if (ref.samples.size() != est.samples.size()) {
    std::cerr << "warning: lengths differ (" << ref.samples.size() << " vs "
              << est.samples.size() << "), trimming to the shorter\n";
  }
  EvaluationReport report =
      evaluate(ref.samples, est.samples, a.stft.config(), ref.sampleRate, a.maskQuantile);
  report.path = a.estimate;
  if (!a.bpdHistogram.empty()) out.write(a.bpdHistogram, saveHistogram(report.bpdHistogram));
  if (!a.fpdHistogram.empty()) out.write(a.fpdHistogram, saveHistogram(report.fpdHistogram));
  std::cout << report.record() << "\n";
}

// ---------------------------------------------------------- model commands

struct InspectArgs {
  std::string path;
  std::string expectHead;
};

void cmdInspect(const InspectArgs& a) {
  const auto bytes = readFileBytes(a.path);
  const auto expected = parseHead(a.expectHead);
  const nn::ConvNetModel model =
      expected ? nn::loadModel(bytes, *expected) : nn::loadModel(bytes);
  std::cout << "head: " << (model.head() == nn::Head::Bpd ? "bpd" : "fpd") << "\n";
  std::cout << "layers: " << model.layers().size() << "\n";
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const auto& l = model.layers()[i];
    std::cout << "  " << i << ": "
              << (l.kind == nn::LayerKind::FreqGatedConv ? "FreqGatedConv" : "FreqConv")
              << " in=" << l.inChannels << " out=" << l.outChannels
              << " kernel=" << l.kernelSize << " params=" << l.parameterCount() << "\n";
  }
  std::cout << "look-back: " << model.lookBack() << "\n";
  std::cout << "params: " << model.parameterCount() << "\n";
  std::cout << "crc: ok\n";
}

struct InitModelArgs {
  std::string output;
  std::string head = "bpd";
  bool zeros = false;
  std::optional<std::uint64_t> seed;
  nn::Architecture arch;
};

void cmdInitModel(const InitModelArgs& a, OutputSet& out) {
  const nn::Head head = *parseHead(a.head);
  const auto model = a.zeros ? nn::ConvNetModel::zeros(head, a.arch)
                             : nn::ConvNetModel::random(head, resolveSeed(a.seed), a.arch);
  out.write(a.output, nn::saveModel(model));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase reconstruction from STFT magnitude"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* analyzeCmd = app.add_subcommand("analyze", "Write the STFT of a WAV file as PSPC");
  analyzeCmd->add_option("input", analyze.input, "Input WAV")->required();
  analyzeCmd->add_option("output", analyze.output, "Output PSPC")->required();
  analyzeCmd->add_flag("--complex", analyze.complexPayload, "Store complex coefficients");
  analyzeCmd->add_option("--sample-rate", analyze.sampleRate, "Expected sample rate");
  addStftOptions(analyzeCmd, analyze.stft);

  OracleArgs oracle;
  auto* oracleCmd = app.add_subcommand("oracle", "Dump oracle phase differences");
  oracleCmd->add_option("input", oracle.input, "Input WAV")->required();
  oracleCmd->add_option("diffs", oracle.diffsOut, "Output PPDF")->required();
  oracleCmd->add_option("--spec-out", oracle.specOut, "Also write the magnitude as PSPC");
  oracleCmd->add_option("--sample-rate", oracle.sampleRate, "Expected sample rate");
  addStftOptions(oracleCmd, oracle.stft);

  ReconstructArgs rec;
  std::string baseMethod;
  auto* recCmd = app.add_subcommand("reconstruct", "Reconstruct a waveform from magnitude");
  recCmd->add_option("input", rec.input, "Input WAV or PSPC");
  recCmd->add_option("output", rec.output, "Output WAV");
  recCmd->add_option("--method", rec.method, "Reconstruction method")
      ->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case));
  recCmd->add_option("--base-method", baseMethod, "First method for gla-refine")
      ->check(CLI::IsMember({"oracle", "rtpghi", "pghi", "dnn", "timeint"}));
  recCmd->add_option("--p", rec.wls.p, "Magnitude compression exponent");
  recCmd->add_option("--gamma0", rec.wls.gamma0, "Frequency term weight");
  recCmd->add_option("--gla-iters", rec.glaIters, "Griffin-Lim iterations");
  recCmd->add_option("--tolerance", rec.tolerance, "Relative heap tolerance");
  recCmd->add_option("--seed", rec.seed, "Random seed (falls back to PHASELINE_SEED)");
  recCmd->add_option("--bpd-model", rec.bpdModel, "PDNW model for BPD");
  recCmd->add_option("--fpd-model", rec.fpdModel, "PDNW model for FPD");
  recCmd->add_option("--diffs", rec.diffsIn, "PPDF differences replacing the first stage");
  recCmd->add_option("--emit-diffs", rec.emitDiffs, "Write the differences used as PPDF");
  recCmd->add_option("--emit-spec", rec.emitSpec, "Write the reconstruction as PSPC");
  recCmd->add_option("--sample-rate", rec.sampleRate, "Expected sample rate");
  recCmd->add_flag("--pcm16", rec.pcm16, "Write 16-bit PCM instead of float");
  recCmd->add_option("--batch", rec.batchList, "File of 'input output' lines");
  recCmd->add_option("--jobs", rec.jobs, "Files processed in parallel")
      ->check(CLI::PositiveNumber);
  addStftOptions(recCmd, rec.stft);

  EvaluateArgs eval;
  auto* evalCmd = app.add_subcommand("evaluate", "Score an estimate against a reference");
  evalCmd->add_option("reference", eval.reference, "Reference WAV")->required();
  evalCmd->add_option("estimate", eval.estimate, "Estimated WAV")->required();
  evalCmd->add_option("--bpd-histogram", eval.bpdHistogram, "Write the BPD AWE histogram");
  evalCmd->add_option("--fpd-histogram", eval.fpdHistogram, "Write the FPD AWE histogram");
  evalCmd->add_option("--mask-quantile", eval.maskQuantile,
                      "Score only bins above this magnitude quantile")
      ->check(CLI::Range(0.0, 1.0));
  evalCmd->add_option("--sample-rate", eval.sampleRate, "Expected sample rate");
  addStftOptions(evalCmd, eval.stft);

  InspectArgs inspect;
  auto* inspectCmd = app.add_subcommand("inspect-model", "Summarise a PDNW model");
  inspectCmd->add_option("path", inspect.path, "PDNW file")->required();
  inspectCmd->add_option("--expect-head", inspect.expectHead, "bpd or fpd")
      ->check(CLI::IsMember({"bpd", "fpd"}));

  InitModelArgs init;
  auto* initCmd = app.add_subcommand("init-model", "Write an untrained PDNW model");
  initCmd->add_option("output", init.output, "Output PDNW")->required();
  initCmd->add_option("--head", init.head, "bpd or fpd")->check(CLI::IsMember({"bpd", "fpd"}));
  initCmd->add_flag("--zeros", init.zeros, "All weights zero");
  initCmd->add_option("--seed", init.seed, "Random seed (falls back to PHASELINE_SEED)");
  initCmd->add_option("--look-back", init.arch.lookBack, "Look-back frames");
  initCmd->add_option("--channels", init.arch.channels, "Hidden channels");
  initCmd->add_option("--gated-layers", init.arch.gatedLayers, "Gated layers");
  initCmd->add_option("--gated-kernel", init.arch.gatedKernel, "Gated kernel size");

  CLI11_PARSE(app, argc, argv);

  OutputSet out;
  try {
    if (*analyzeCmd) {
      cmdAnalyze(analyze, out);
    } else if (*oracleCmd) {
      cmdOracle(oracle, out);
    } else if (*recCmd) {
      if (!baseMethod.empty()) rec.baseMethod = kMethods.at(baseMethod);
      return cmdReconstruct(rec);
    } else if (*evalCmd) {
      cmdEvaluate(eval, out);
    } else if (*inspectCmd) {
      cmdInspect(inspect);
    } else if (*initCmd) {
      cmdInitModel(init, out);
    }
  } catch (const std::exception& e) {
    out.rollback();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
