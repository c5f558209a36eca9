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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "ecgx/core/ecg_record.hpp"

namespace ecgx {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

// SHA-256 over a canonical little-endian serialization of the record:
// sampling rate, L, T, each lead name (length-prefixed), then the signal as
// float64. Lead order is part of the content.
std::string fingerprint(const EcgRecord& record);

// Little-endian byte appenders shared by the serializers.
void append_u32_le(std::string& out, std::uint32_t value);
void append_f32_le(std::string& out, float value);
void append_f64_le(std::string& out, double value);
std::uint32_t read_u32_le(const char* bytes);
float read_f32_le(const char* bytes);

}  // namespace ecgx
