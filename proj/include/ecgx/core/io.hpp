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

#include <filesystem>
#include <optional>

#include "ecgx/core/ecg_record.hpp"

namespace ecgx {

enum class EcgFormat { kCsv, kBinaryFloat32, kWfdbLike };

// Extension-based guess: .csv, .bin, .hea. Empty for anything else.
std::optional<EcgFormat> format_from_extension(
    const std::filesystem::path& path);

// CSV: "sampling_rate,<int>", a lead-name row, then one row per sample.
// binary_float32: "EXE1", u32 L, u32 T, u32 rate (LE), L*T float32 row-major.
// wfdb_like: a text header "<name> <L> <rate> <T>" followed by one line per
//   lead "<name>.dat 16 <adc-per-mV> <lead>"; the .dat file next to it holds
//   sample-interleaved little-endian int16 values.
EcgRecord load_ecg(const std::filesystem::path& path, EcgFormat format);

// Writes in the canonical form of each format. Values are narrowed to float32
// (CSV, binary) or quantized to int16 at 1000 ADC units per mV (wfdb_like), so
// save(load(file)) reproduces a file written here byte for byte.
void save_ecg(const EcgRecord& record, const std::filesystem::path& path,
              EcgFormat format);

// Raw float32 array container sharing the binary_float32 layout; attribution
// maps of shape (T,) are stored as a single row.
void save_array_f32(const Tensor& array, const std::filesystem::path& path,
                    int sampling_rate);
Tensor load_array_f32(const std::filesystem::path& path);

}  // namespace ecgx
