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

#ifndef MODALNODE_BINARY_IO_HPP_
#define MODALNODE_BINARY_IO_HPP_

// Framed file container shared by every on-disk artifact:
//
//   bytes 0..7    magic tag (ASCII, NUL padded)
//   bytes 8..15   header length H, unsigned 64-bit little-endian
//   next H bytes  UTF-8 JSON header
//   remainder     binary body (little-endian scalars)

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modalnode/error.hpp"

namespace modalnode::io {

using Bytes = std::vector<std::byte>;

namespace detail {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = (out << 8) | (v & 0xff);
      v >>= 8;
    }
    return out;
  }
}

template <typename U>
void put(Bytes& out, U v) {
  v = to_little(v);
  std::array<std::byte, sizeof(U)> raw;
  std::memcpy(raw.data(), &v, sizeof(U));
  out.insert(out.end(), raw.begin(), raw.end());
}

template <typename U>
U get(std::span<const std::byte> in, std::size_t offset) {
  U v;
  std::memcpy(&v, in.data() + offset, sizeof(U));
  return to_little(v);
}

}  // namespace detail

inline void put_u32(Bytes& out, std::uint32_t v) { detail::put(out, v); }
inline void put_f64(Bytes& out, double v) {
  detail::put(out, std::bit_cast<std::uint64_t>(v));
}
inline void put_f64s(Bytes& out, std::span<const double> values) {
  out.reserve(out.size() + values.size() * sizeof(double));
  for (double v : values) put_f64(out, v);
}

inline std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
  return detail::get<std::uint32_t>(in, offset);
}
inline double get_f64(std::span<const std::byte> in, std::size_t offset) {
  return std::bit_cast<double>(detail::get<std::uint64_t>(in, offset));
}

// Reads `count` doubles starting at byte `offset`; throws on overrun.
inline std::vector<double> get_f64s(std::span<const std::byte> in,
                                    std::size_t offset, std::size_t count) {
  if (offset > in.size() || count > (in.size() - offset) / sizeof(double)) {
    throw FormatError("body too short for requested array");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = get_f64(in, offset + i * sizeof(double));
  }
  return out;
}

inline std::uint32_t crc32(std::span<const std::byte> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t chunk =
        std::min<std::size_t>(data.size() - pos, 1u << 30);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data() + pos),
                  static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

struct Framed {
  nlohmann::json header;
  Bytes body;
};

inline void write_framed(const std::filesystem::path& path,
                         std::string_view magic, const nlohmann::json& header,
                         std::span<const std::byte> body) {
  require(magic.size() <= 8, "magic tag longer than 8 bytes");
  Bytes prefix(8, std::byte{0});
  std::memcpy(prefix.data(), magic.data(), magic.size());
  const std::string text = header.dump();
  detail::put(prefix, static_cast<std::uint64_t>(text.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(prefix.data()),
            static_cast<std::streamsize>(prefix.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Framed read_framed(const std::filesystem::path& path,
                          std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  Bytes raw(text.size());
  std::memcpy(raw.data(), text.data(), text.size());
  if (raw.size() < 16) throw FormatError("file shorter than frame prefix");
  std::array<char, 8> tag{};
  std::memcpy(tag.data(), raw.data(), 8);
  std::string expected(magic);
  expected.resize(8, '\0');
  if (std::memcmp(tag.data(), expected.data(), 8) != 0) {
    throw FormatError("unexpected magic tag in " + path.string());
  }
  const auto header_len = detail::get<std::uint64_t>(raw, 8);
  if (header_len > raw.size() - 16) throw FormatError("truncated header");
  Framed framed;
  try {
    framed.header = nlohmann::json::parse(
        std::string_view(reinterpret_cast<const char*>(raw.data() + 16),
                         static_cast<std::size_t>(header_len)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  }
  framed.body.assign(raw.begin() + 16 + static_cast<std::ptrdiff_t>(header_len),
                     raw.end());
  return framed;
}

}  // namespace modalnode::io

#endif  // MODALNODE_BINARY_IO_HPP_
