// phaseline/audio_io.hpp

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

// Mono WAV files and the PSPC spectrogram container.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseline/spectral.hpp"

namespace phaseline {

enum class SampleFormat : std::uint8_t { Pcm16, Float32 };

struct WavData {
  std::uint32_t sampleRate = 0;
  std::vector<double> samples;
};

/// Parses a mono PCM-16 or IEEE float-32 WAV image.
WavData decodeWav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encodeWav(const WavData& wav, SampleFormat format);

WavData readWav(const std::string& path);
void writeWav(const std::string& path, const WavData& wav, SampleFormat format);

enum class SpectrogramPayload : std::uint8_t { Magnitude = 0, Complex = 1 };

/// Contents of a PSPC file.  Only the magnitude or the complex coefficients
/// are meaningful, according to `payload`.
struct SpectrogramFile {
  std::uint32_t bins = 0;
  std::uint32_t frames = 0;
  std::uint32_t sampleRate = 0;
  std::uint32_t hop = 0;
  std::uint32_t windowLength = 0;
  SpectrogramPayload payload = SpectrogramPayload::Magnitude;
  std::vector<float> values;  // frames x bins, interleaved re/im for Complex

  bool operator==(const SpectrogramFile&) const = default;
};

std::vector<std::uint8_t> saveSpectrogramFile(const SpectrogramFile& file);
SpectrogramFile loadSpectrogramFile(std::span<const std::uint8_t> bytes);

SpectrogramFile toSpectrogramFile(const Spectrogram& spec,
                                  SpectrogramPayload payload);
/// Magnitude grid stored in a PSPC file (modulus for complex payloads).
RealGrid magnitudeFromFile(const SpectrogramFile& file);
/// Hann analysis configuration implied by a PSPC header.
StftConfig configFromFile(const SpectrogramFile& file);

}  // namespace phaseline
