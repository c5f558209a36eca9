/*
 * Copyright 2026 The ecgx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ecgx/core/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "ecgx/error.hpp"

namespace ecgx {
namespace {

std::string to_hex(std::span<const unsigned char> digest) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

template <typename T>
void append_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  std::array<char, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  out.append(raw.data(), raw.size());
}

template <typename T>
T read_le(const char* bytes) {
  std::array<char, sizeof(T)> raw;
  std::memcpy(raw.data(), bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

}  // namespace

void append_u32_le(std::string& out, std::uint32_t value) {
  append_le(out, value);
}
void append_f32_le(std::string& out, float value) { append_le(out, value); }
void append_f64_le(std::string& out, double value) { append_le(out, value); }
std::uint32_t read_u32_le(const char* bytes) {
  return read_le<std::uint32_t>(bytes);
}
float read_f32_le(const char* bytes) { return read_le<float>(bytes); }

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 digest failed");
  }
  return to_hex(std::span(digest.data(), length));
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string fingerprint(const EcgRecord& record) {
  std::string bytes = "ECGX-RECORD-1";
  append_u32_le(bytes, static_cast<std::uint32_t>(record.sampling_rate()));
  append_u32_le(bytes, static_cast<std::uint32_t>(record.num_leads()));
  append_u32_le(bytes, static_cast<std::uint32_t>(record.num_samples()));
  for (const auto& name : record.lead_names()) {
    append_u32_le(bytes, static_cast<std::uint32_t>(name.size()));
    bytes += name;
  }
  for (double v : record.signal().values()) append_f64_le(bytes, v);
  return sha256_hex(bytes);
}

}  // namespace ecgx
