// src/audio_io.cpp

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

#include "phaseline/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "phaseline/binary_io.hpp"

namespace phaseline {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t readU32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 |
         static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t readU16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

}  // namespace

WavData decodeWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(FormatError::Kind::BadMagic, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool haveFmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = readU32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw FormatError(FormatError::Kind::Truncated, "truncated WAV chunk");
    }
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(FormatError::Kind::Malformed, "short fmt chunk");
      format = readU16(bytes, body);
      channels = readU16(bytes, body + 2);
      rate = readU32(bytes, body + 4);
      bits = readU16(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = readU16(bytes, body + 24);
      }
      haveFmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!haveFmt) throw FormatError(FormatError::Kind::Malformed, "data before fmt");
      if (channels != 1) {
        throw FormatError(FormatError::Kind::Malformed,
                          "only mono WAV is supported (got " +
                              std::to_string(channels) + " channels)");
      }
      WavData wav;
      wav.sampleRate = rate;
      if (format == kFormatPcm && bits == 16) {
        wav.samples.resize(size / 2);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          const auto v = static_cast<std::int16_t>(readU16(bytes, body + 2 * i));
          wav.samples[i] = static_cast<double>(v) / 32768.0;
        }
      } else if (format == kFormatFloat && bits == 32) {
        wav.samples.resize(size / 4);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          const std::uint32_t raw = readU32(bytes, body + 4 * i);
          float f;
          std::memcpy(&f, &raw, 4);
          wav.samples[i] = f;
        }
      } else {
        throw FormatError(FormatError::Kind::Malformed,
                          "unsupported WAV encoding (format " +
                              std::to_string(format) + ", " +
                              std::to_string(bits) + " bits)");
      }
      return wav;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(FormatError::Kind::Malformed, "WAV file has no data chunk");
}

std::vector<std::uint8_t> encodeWav(const WavData& wav, SampleFormat format) {
  const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : 32;
  const std::uint32_t dataSize =
      static_cast<std::uint32_t>(wav.samples.size() * (bits / 8));
  ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + dataSize);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u16(format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  w.u16(1);
  w.u32(wav.sampleRate);
  w.u32(wav.sampleRate * (bits / 8));
  w.u16(bits / 8);
  w.u16(bits);
  w.magic("data");
  w.u32(dataSize);
  for (double s : wav.samples) {
    if (format == SampleFormat::Pcm16) {
      const double clipped = std::clamp(s, -1.0, 32767.0 / 32768.0);
      w.u16(static_cast<std::uint16_t>(
          static_cast<std::int16_t>(std::lround(clipped * 32768.0))));
    } else {
      w.f32(static_cast<float>(s));
    }
  }
  return std::move(w.bytes());
}

WavData readWav(const std::string& path) {
  const auto bytes = readFileBytes(path);
  try {
    return decodeWav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path + ": " + e.what());
  }
}

void writeWav(const std::string& path, const WavData& wav,
              SampleFormat format) {
  writeFileBytes(path, encodeWav(wav, format));
}

std::vector<std::uint8_t> saveSpectrogramFile(const SpectrogramFile& file) {
  const std::size_t per = file.payload == SpectrogramPayload::Complex ? 2 : 1;
  if (file.values.size() != std::size_t{file.bins} * file.frames * per) {
    throw DimensionMismatch("PSPC payload size does not match dimensions");
  }
  ByteWriter w;
  w.magic("PSPC");
  w.u16(1);
  w.u32(file.bins);
  w.u32(file.frames);
  w.u32(file.sampleRate);
  w.u32(file.hop);
  w.u32(file.windowLength);
  w.u8(static_cast<std::uint8_t>(file.payload));
  w.f32s(file.values);
  return std::move(w.bytes());
}

SpectrogramFile loadSpectrogramFile(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expectMagic("PSPC");
  const auto version = r.u16();
  if (version != 1) {
    throw FormatError(FormatError::Kind::BadVersion,
                      "unsupported PSPC version " + std::to_string(version));
  }
  SpectrogramFile f;
  f.bins = r.u32();
  f.frames = r.u32();
  f.sampleRate = r.u32();
  f.hop = r.u32();
  f.windowLength = r.u32();
  const auto kind = r.u8();
  if (kind > 1) {
    throw FormatError(FormatError::Kind::Malformed,
                      "unknown PSPC payload kind " + std::to_string(kind));
  }
  f.payload = static_cast<SpectrogramPayload>(kind);
  const std::size_t per = kind == 1 ? 2 : 1;
  const std::size_t count = std::size_t{f.bins} * f.frames * per;
  if (r.remaining() < count * 4) {
    throw FormatError(FormatError::Kind::Truncated, "truncated PSPC payload");
  }
  if (r.remaining() > count * 4) {
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "PSPC payload longer than declared dimensions");
  }
  f.values = r.f32s(count);
  return f;
}

SpectrogramFile toSpectrogramFile(const Spectrogram& spec,
                                  SpectrogramPayload payload) {
  SpectrogramFile f;
  f.bins = static_cast<std::uint32_t>(spec.bins());
  f.frames = static_cast<std::uint32_t>(spec.frames());
  f.sampleRate = spec.sampleRate;
  f.hop = static_cast<std::uint32_t>(spec.config.hop);
  f.windowLength = static_cast<std::uint32_t>(spec.config.windowLength);
  f.payload = payload;
  const auto& c = spec.coefficients.data();
  if (payload == SpectrogramPayload::Magnitude) {
    f.values.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      f.values[i] = static_cast<float>(std::abs(c[i]));
    }
  } else {
    f.values.resize(2 * c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      f.values[2 * i] = static_cast<float>(c[i].real());
      f.values[2 * i + 1] = static_cast<float>(c[i].imag());
    }
  }
  return f;
}

RealGrid magnitudeFromFile(const SpectrogramFile& file) {
  RealGrid g(file.frames, file.bins);
  auto& d = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (file.payload == SpectrogramPayload::Magnitude) {
      d[i] = file.values[i];
    } else {
      d[i] = std::hypot(static_cast<double>(file.values[2 * i]),
                        static_cast<double>(file.values[2 * i + 1]));
    }
  }
  return g;
}

StftConfig configFromFile(const SpectrogramFile& file) {
  if (file.bins < 2) {
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "PSPC needs at least two bins");
  }
  StftConfig c = StftConfig::hann(static_cast<int>(file.windowLength),
                                  static_cast<int>(file.hop),
                                  static_cast<int>(2 * (file.bins - 1)));
  c.validate();
  return c;
}

}  // namespace phaseline
