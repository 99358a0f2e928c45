// Copyright 2026 The modalnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "modalnode/render.hpp"

namespace modalnode {
namespace {

namespace fs = std::filesystem;

fs::path tmp(const std::string& name) {
  return fs::temp_directory_path() / ("modalnode_render_" + name);
}

Vector sine(std::size_t n, double cycles_per_sample, double amplitude) {
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = amplitude * std::sin(2.0 * std::numbers::pi * cycles_per_sample * i);
  }
  return w;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

TEST(Wav, SilentInputWritesZeros) {
  const Vector w(1000, 0.0);
  const auto r = write_wav(tmp("silent.wav"), w, 44100.0);
  EXPECT_TRUE(r.silent);
  const auto wav = read_wav(tmp("silent.wav"));
  ASSERT_EQ(wav.samples.size(), 1000u);
  for (auto s : wav.samples) EXPECT_EQ(s, 0);
}

TEST(Wav, PeakNormalisedToTarget) {
  const auto w = sine(44100, 440.0 / 44100.0, 3.7e-4);
  const auto r = write_wav(tmp("sine.wav"), w, 44100.0);
  EXPECT_FALSE(r.silent);
  const double expected = std::pow(10.0, -1.0 / 20.0) * 32767.0;
  const auto wav = read_wav(tmp("sine.wav"));
  EXPECT_EQ(wav.channels, 1);
  EXPECT_EQ(wav.sample_rate, 44100u);
  EXPECT_EQ(wav.bits, 16);
  ASSERT_EQ(wav.samples.size(), w.size());
  int peak = 0;
  for (auto s : wav.samples) peak = std::max(peak, std::abs(s));
  EXPECT_LE(std::abs(peak - expected), 1.0);
  EXPECT_EQ(peak, r.peak_code);
  // Quantisation is round-to-nearest of gain * w.
  for (std::size_t i = 0; i < w.size(); i += 97) {
    EXPECT_LE(std::abs(wav.samples[i] - w[i] * r.gain * 32767.0), 0.5 + 1e-9);
  }
}

TEST(Wav, HeaderFieldsByteExact) {
  write_wav(tmp("hdr.wav"), sine(10, 0.1, 1.0), 48000.0);
  std::ifstream in(tmp("hdr.wav"), std::ios::binary);
  const std::string raw((std::istreambuf_iterator<char>(in)), {});
  ASSERT_EQ(raw.size(), 44u + 20u);
  EXPECT_EQ(raw.substr(0, 4), "RIFF");
  EXPECT_EQ(raw.substr(8, 8), "WAVEfmt ");
  EXPECT_EQ(raw.substr(36, 4), "data");
  auto u32 = [&](std::size_t o) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(raw[o])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(raw[o + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(raw[o + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(raw[o + 3])) << 24;
  };
  EXPECT_EQ(u32(4), 56u);
  EXPECT_EQ(u32(24), 48000u);
  EXPECT_EQ(u32(28), 96000u);
  EXPECT_EQ(u32(40), 20u);
}

TEST(Wav, TwentyFourBit) {
  const auto w = sine(2000, 0.01, -2.0);
  write_wav(tmp("24.wav"), w, 96000.0, {-3.0, 24});
  const auto wav = read_wav(tmp("24.wav"));
  EXPECT_EQ(wav.bits, 24);
  int peak = 0;
  for (auto s : wav.samples) peak = std::max(peak, std::abs(s));
  EXPECT_LE(std::abs(peak - std::pow(10.0, -3.0 / 20.0) * 8388607.0), 1.0);
}

TEST(Wav, Validation) {
  const Vector w{0.1, 0.2};
  EXPECT_THROW(write_wav(tmp("bad.wav"), w, 44100.0, {0.0, 16}), InvalidArgument);
  EXPECT_THROW(write_wav(tmp("bad.wav"), w, 44100.0, {-1.0, 8}), InvalidArgument);
  const Vector nan{0.1, std::nan("")};
  EXPECT_THROW(write_wav(tmp("bad.wav"), nan, 44100.0), InvalidArgument);
  std::ofstream(tmp("junk.wav")) << "not a wav file at all";
  EXPECT_THROW(read_wav(tmp("junk.wav")), FormatError);
}

TEST(Stft, FrameCountAndShape) {
  const auto s = stft_magnitudes(sine(1024, 0.05, 1.0), 256, 128);
  EXPECT_EQ(s.frames, 7u);
  EXPECT_EQ(s.bins, 129u);
  EXPECT_THROW(stft_magnitudes(Vector(100, 0.0), 256, 128), InvalidArgument);
  EXPECT_THROW(stft_magnitudes(Vector(1000, 0.0), 256, 0), InvalidArgument);
  for (double v : stft_magnitudes(Vector(1024, 0.0), 256, 128).magnitude) EXPECT_EQ(v, 0.0);
}

TEST(Stft, BinCentredToneConcentrates) {
  const auto s = stft_magnitudes(sine(2048, 16.0 / 256.0, 1.0), 256, 64);
  for (std::size_t f = 0; f < s.frames; ++f) {
    double total = 0.0, near = 0.0;
    for (std::size_t b = 0; b < s.bins; ++b) {
      const double e = s.at(f, b) * s.at(f, b);
      total += e;
      if (b >= 15 && b <= 17) near += e;
    }
    EXPECT_GT(near / total, 0.9);
  }
}

TEST(Stft, MatchesDirectDft) {
  Vector w(600);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(0.37 * i) + 0.01 * i;
  const std::size_t window = 128, hop = 100;
  const auto s = stft_magnitudes(w, window, hop);
  for (std::size_t f : {0u, 3u}) {
    for (std::size_t b : {0u, 7u, 64u}) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < window; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / window);
        acc += hann * w[f * hop + i] *
               std::polar(1.0, -2.0 * std::numbers::pi * b * i / window);
      }
      EXPECT_NEAR(s.at(f, b), std::abs(acc), 1e-9 * std::max(1.0, std::abs(acc)));
    }
  }
}

TEST(Csv, Headers) {
  write_output_csv(tmp("w.csv"), Vector{1.0, 2.0}, 10.0);
  EXPECT_EQ(first_line(tmp("w.csv")), "step,time,w");
  Trajectory t(2, 3);
  write_state_csv(tmp("s.csv"), t, 10.0);
  EXPECT_EQ(first_line(tmp("s.csv")), "step,time,q1,q2,p1,p2");
  write_stft_csv(tmp("f.csv"), stft_magnitudes(Vector(8, 1.0), 4, 2), 2, 10.0);
  EXPECT_EQ(first_line(tmp("f.csv")), "frame,time,bin_0,bin_1,bin_2");
  std::ifstream in(tmp("w.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "1,0.10000000000000001,2");
}

}  // namespace
}  // namespace modalnode
