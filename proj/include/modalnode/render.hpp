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

#ifndef MODALNODE_RENDER_HPP_
#define MODALNODE_RENDER_HPP_

// Audio and data export: RIFF/WAVE PCM, CSV series, STFT magnitudes.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "modalnode/binary_io.hpp"
#include "modalnode/error.hpp"
#include "modalnode/integrator.hpp"
#include "modalnode/modal_core.hpp"

namespace modalnode {

struct RenderOptions {
  double peak_dbfs = -1.0;
  int bit_depth = 16;
  std::size_t stft_window = 1024;
  std::size_t stft_hop = 256;

  void validate() const {
    require(peak_dbfs < 0.0, "normalisation target must be below 0 dBFS");
    require(bit_depth == 16 || bit_depth == 24, "bit depth must be 16 or 24");
    require(stft_hop >= 1 && stft_window >= stft_hop,
            "STFT needs window >= hop >= 1");
  }
};

struct WavResult {
  bool silent = false;    // all-zero input; file written anyway
  double gain = 0.0;      // applied to the series before quantisation
  std::int32_t peak_code = 0;
};

// Mono PCM at `sample_rate`, peak-normalised to options.peak_dbfs.
// Quantisation rounds to nearest without dither.
inline WavResult write_wav(const std::filesystem::path& path,
                           std::span<const double> w, double sample_rate,
                           const RenderOptions& options = {}) {
  options.validate();
  require(sample_rate > 0.0 && sample_rate < 4.3e9, "invalid WAV sample rate");
  double peak = 0.0;
  for (double x : w) {
    require(std::isfinite(x), "write_wav: non-finite sample");
    peak = std::max(peak, std::abs(x));
  }
  const int bytes_per_sample = options.bit_depth / 8;
  const double full_scale =
      static_cast<double>((std::int64_t{1} << (options.bit_depth - 1)) - 1);
  const double target = std::pow(10.0, options.peak_dbfs / 20.0);
  WavResult result;
  result.silent = peak == 0.0;
  result.gain = result.silent ? 0.0 : target / peak;

  const auto data_bytes = static_cast<std::uint32_t>(w.size() * bytes_per_sample);
  const auto rate = static_cast<std::uint32_t>(std::llround(sample_rate));
  io::Bytes out;
  out.reserve(44 + data_bytes);
  auto tag = [&](const char* t) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(t[i]));
  };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xff));
    out.push_back(static_cast<std::byte>(v >> 8));
  };
  tag("RIFF");
  io::put_u32(out, 36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  io::put_u32(out, 16);
  u16(1);  // PCM
  u16(1);  // mono
  io::put_u32(out, rate);
  io::put_u32(out, rate * static_cast<std::uint32_t>(bytes_per_sample));
  u16(static_cast<std::uint16_t>(bytes_per_sample));
  u16(static_cast<std::uint16_t>(options.bit_depth));
  tag("data");
  io::put_u32(out, data_bytes);
  for (double x : w) {
    const auto code = static_cast<std::int32_t>(std::lround(x * result.gain * full_scale));
    result.peak_code = std::max(result.peak_code, std::abs(code));
    const auto u = static_cast<std::uint32_t>(code);
    for (int b = 0; b < bytes_per_sample; ++b) {
      out.push_back(static_cast<std::byte>((u >> (8 * b)) & 0xff));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  return result;
}

struct WavData {
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::vector<std::int32_t> samples;
};

// Minimal PCM reader used for verification.
inline WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  const std::string raw((std::istreambuf_iterator<char>(in)), {});
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(raw[off + i]);
    return v;
  };
  auto u16 = [&](std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(raw[off]) |
                                      (static_cast<unsigned char>(raw[off + 1]) << 8));
  };
  if (raw.size() < 12 || raw.compare(0, 4, "RIFF") != 0 ||
      raw.compare(8, 4, "WAVE") != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  if (u32(4) + 8 != raw.size()) throw FormatError("RIFF size mismatch");
  WavData wav;
  std::size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= raw.size()) {
    const std::string id = raw.substr(pos, 4);
    const std::uint32_t size = u32(pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > raw.size()) throw FormatError("truncated WAV chunk");
    if (id == "fmt ") {
      if (u16(body) != 1) throw FormatError("not PCM");
      wav.channels = u16(body + 2);
      wav.sample_rate = u32(body + 4);
      wav.bits = u16(body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data before fmt");
      const int bytes = wav.bits / 8;
      for (std::size_t off = body; off + bytes <= body + size; off += bytes) {
        std::uint32_t u = 0;
        for (int b = bytes - 1; b >= 0; --b) {
          u = (u << 8) | static_cast<unsigned char>(raw[off + b]);
        }
        const int shift = 32 - wav.bits;
        wav.samples.push_back(static_cast<std::int32_t>(u << shift) >> shift);
      }
    }
    pos = body + size + (size & 1);
  }
  return wav;
}

// ---------------------------------------------------------------------------

// Frames x bins matrix (row-major) of |X| with a periodic Hann window.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // window / 2 + 1
  Vector magnitude;

  double at(std::size_t frame, std::size_t bin) const {
    return magnitude[frame * bins + bin];
  }
};

inline Spectrogram stft_magnitudes(std::span<const double> w, std::size_t window,
                                   std::size_t hop) {
  require(hop >= 1 && window >= hop, "STFT needs window >= hop >= 1");
  require(w.size() >= window, "series shorter than the STFT window");
  Spectrogram s;
  s.frames = (w.size() - window) / hop + 1;
  s.bins = window / 2 + 1;
  s.magnitude.resize(s.frames * s.bins);
  Vector hann(window);
  for (std::size_t i = 0; i < window; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(window));
  }
  double* in = fftw_alloc_real(window);
  fftw_complex* out = fftw_alloc_complex(s.bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(window), in, out,
                                        FFTW_ESTIMATE);
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t i = 0; i < window; ++i) in[i] = w[f * hop + i] * hann[i];
    fftw_execute(plan);
    for (std::size_t b = 0; b < s.bins; ++b) {
      s.magnitude[f * s.bins + b] = std::hypot(out[b][0], out[b][1]);
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(out);
  fftw_free(in);
  return s;
}

// ---------------------------------------------------------------------------
// CSV: full double precision, header row first.

namespace detail {
inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}
}  // namespace detail

// step,time,w
inline void write_output_csv(const std::filesystem::path& path,
                             std::span<const double> w, double sample_rate) {
  auto out = detail::open_csv(path);
  out << "step,time,w\n";
  for (std::size_t n = 0; n < w.size(); ++n) {
    out << n << ',' << static_cast<double>(n) / sample_rate << ',' << w[n] << '\n';
  }
}

// step,time,q1..qM,p1..pM
inline void write_state_csv(const std::filesystem::path& path,
                            const Trajectory& traj, double sample_rate) {
  auto out = detail::open_csv(path);
  out << "step,time";
  for (std::size_t m = 1; m <= traj.modes; ++m) out << ",q" << m;
  for (std::size_t m = 1; m <= traj.modes; ++m) out << ",p" << m;
  out << '\n';
  for (std::size_t n = 0; n < traj.steps; ++n) {
    out << n << ',' << static_cast<double>(n) / sample_rate;
    for (double v : traj.q_at(n)) out << ',' << v;
    for (double v : traj.p_at(n)) out << ',' << v;
    out << '\n';
  }
}

// frame,time,bin_0..bin_{B-1}; time is the frame start.
inline void write_stft_csv(const std::filesystem::path& path,
                           const Spectrogram& s, std::size_t hop,
                           double sample_rate) {
  auto out = detail::open_csv(path);
  out << "frame,time";
  for (std::size_t b = 0; b < s.bins; ++b) out << ",bin_" << b;
  out << '\n';
  for (std::size_t f = 0; f < s.frames; ++f) {
    out << f << ',' << static_cast<double>(f * hop) / sample_rate;
    for (std::size_t b = 0; b < s.bins; ++b) out << ',' << s.at(f, b);
    out << '\n';
  }
}

}  // namespace modalnode

#endif  // MODALNODE_RENDER_HPP_
