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

#include "ecgx/core/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "ecgx/core/hash.hpp"
#include "ecgx/error.hpp"

namespace ecgx {
namespace {

constexpr char kBinaryMagic[4] = {'E', 'X', 'E', '1'};
constexpr double kWfdbGain = 1000.0;

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kUnwritablePath, path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  return out;
}

float parse_float(const std::string& text, const std::filesystem::path& path) {
  float value = 0.0f;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc::result_out_of_range) {
    throw Error(ErrorCode::kNonFiniteValues,
                "value '" + text + "' out of float32 range in " +
                    path.string());
  }
  if (ec != std::errc() || ptr != end) {
    // from_chars does not accept "nan"/"inf" spellings with signs uniformly.
    if (text.find("nan") != std::string::npos ||
        text.find("NaN") != std::string::npos ||
        text.find("inf") != std::string::npos) {
      throw Error(ErrorCode::kNonFiniteValues, path.string());
    }
    throw Error(ErrorCode::kShapeMismatch,
                "malformed value '" + text + "' in " + path.string());
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteValues, path.string());
  }
  return value;
}

int parse_int(const std::string& text, const std::filesystem::path& path) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "malformed integer '" + text + "' in " + path.string());
  }
  return value;
}

std::string format_float(float value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

EcgRecord load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kShapeMismatch, "empty CSV " + path.string());
  }
  const auto header = split(line, ',');
  if (header.size() != 2 || header[0] != "sampling_rate") {
    throw Error(ErrorCode::kShapeMismatch,
                "CSV header must be 'sampling_rate,<int>' in " +
                    path.string());
  }
  const int rate = parse_int(header[1], path);
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kShapeMismatch, "missing lead row " + path.string());
  }
  auto names = split(line, ',');
  const std::size_t num_leads = names.size();
  std::vector<std::vector<double>> columns(num_leads);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    if (fields.size() != num_leads) {
      throw Error(ErrorCode::kShapeMismatch,
                  "row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " values, header has " +
                      std::to_string(num_leads) + " leads");
    }
    for (std::size_t l = 0; l < num_leads; ++l) {
      columns[l].push_back(parse_float(fields[l], path));
    }
    ++row;
  }
  Tensor signal({num_leads, row});
  for (std::size_t l = 0; l < num_leads; ++l) {
    for (std::size_t t = 0; t < row; ++t) signal.at(l, t) = columns[l][t];
  }
  return EcgRecord(std::move(signal), rate, std::move(names));
}

void save_csv(const EcgRecord& record, const std::filesystem::path& path) {
  std::string out = "sampling_rate," + std::to_string(record.sampling_rate());
  out += "\n";
  for (std::size_t l = 0; l < record.num_leads(); ++l) {
    if (l > 0) out += ",";
    out += record.lead_names()[l];
  }
  out += "\n";
  for (std::size_t t = 0; t < record.num_samples(); ++t) {
    for (std::size_t l = 0; l < record.num_leads(); ++l) {
      if (l > 0) out += ",";
      out += format_float(static_cast<float>(record.value(l, t)));
    }
    out += "\n";
  }
  write_all(path, out);
}

struct BinaryPayload {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t rate = 0;
  std::vector<double> values;
};

BinaryPayload read_binary(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, kBinaryMagic, 4) != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "missing EXE1 header in " + path.string());
  }
  BinaryPayload p;
  p.rows = read_u32_le(bytes.data() + 4);
  p.cols = read_u32_le(bytes.data() + 8);
  p.rate = read_u32_le(bytes.data() + 12);
  const std::uint64_t expected = 16 + 4ull * p.rows * p.cols;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                "header declares " + std::to_string(p.rows) + "x" +
                    std::to_string(p.cols) + " but payload has " +
                    std::to_string(bytes.size() - 16) + " bytes");
  }
  p.values.resize(static_cast<std::size_t>(p.rows) * p.cols);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const float v = read_f32_le(bytes.data() + 16 + 4 * i);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValues, path.string());
    }
    p.values[i] = v;
  }
  return p;
}

void write_binary(const std::filesystem::path& path, std::uint32_t rows,
                  std::uint32_t cols, std::uint32_t rate,
                  std::span<const double> values) {
  std::string out(kBinaryMagic, 4);
  append_u32_le(out, rows);
  append_u32_le(out, cols);
  append_u32_le(out, rate);
  for (double v : values) append_f32_le(out, static_cast<float>(v));
  write_all(path, out);
}

std::filesystem::path dat_path(const std::filesystem::path& header_path,
                               const std::string& file) {
  return header_path.parent_path() / file;
}

EcgRecord load_wfdb(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  std::string name;
  int num_leads = 0;
  int rate = 0;
  long num_samples = 0;
  if (!(in >> name >> num_leads >> rate >> num_samples) || num_leads < 1 ||
      num_samples < 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "malformed record line in " + path.string());
  }
  std::vector<std::string> leads;
  std::vector<double> gains;
  std::string data_file;
  for (int l = 0; l < num_leads; ++l) {
    std::string file;
    int fmt = 0;
    double gain = 0.0;
    std::string lead;
    if (!(in >> file >> fmt >> gain >> lead) || fmt != 16 || gain <= 0.0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "malformed signal line " + std::to_string(l) + " in " +
                      path.string());
    }
    if (l == 0) data_file = file;
    if (file != data_file) {
      throw Error(ErrorCode::kShapeMismatch, "leads span several data files");
    }
    leads.push_back(lead);
    gains.push_back(gain);
  }
  const std::string bytes = read_all(dat_path(path, data_file));
  const std::size_t expected = 2ull * num_leads * num_samples;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                "header declares " + std::to_string(num_leads) + "x" +
                    std::to_string(num_samples) + " samples but data file has " +
                    std::to_string(bytes.size()) + " bytes");
  }
  const auto L = static_cast<std::size_t>(num_leads);
  const auto T = static_cast<std::size_t>(num_samples);
  Tensor signal({L, T});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t at = 2 * (t * L + l);
      const auto lo = static_cast<std::uint8_t>(bytes[at]);
      const auto hi = static_cast<std::uint8_t>(bytes[at + 1]);
      const auto adc = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(lo | (hi << 8)));
      signal.at(l, t) = adc / gains[l];
    }
  }
  return EcgRecord(std::move(signal), rate, std::move(leads));
}

void save_wfdb(const EcgRecord& record, const std::filesystem::path& path) {
  const std::string name = path.stem().string();
  const std::string data_file = name + ".dat";
  std::string header = name + " " + std::to_string(record.num_leads()) + " " +
                       std::to_string(record.sampling_rate()) + " " +
                       std::to_string(record.num_samples()) + "\n";
  for (const auto& lead : record.lead_names()) {
    header += data_file + " 16 1000 " + lead + "\n";
  }
  std::string data;
  data.reserve(2 * record.signal().size());
  for (std::size_t t = 0; t < record.num_samples(); ++t) {
    for (std::size_t l = 0; l < record.num_leads(); ++l) {
      double adc = std::round(record.value(l, t) * kWfdbGain);
      adc = std::clamp(adc, -32768.0, 32767.0);
      const auto raw = static_cast<std::uint16_t>(static_cast<std::int16_t>(adc));
      data.push_back(static_cast<char>(raw & 0xFF));
      data.push_back(static_cast<char>(raw >> 8));
    }
  }
  write_all(path, header);
  write_all(dat_path(path, data_file), data);
}

}  // namespace

std::optional<EcgFormat> format_from_extension(
    const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return EcgFormat::kCsv;
  if (ext == ".bin") return EcgFormat::kBinaryFloat32;
  if (ext == ".hea") return EcgFormat::kWfdbLike;
  return std::nullopt;
}

EcgRecord load_ecg(const std::filesystem::path& path, EcgFormat format) {
  switch (format) {
    case EcgFormat::kCsv:
      return load_csv(path);
    case EcgFormat::kBinaryFloat32: {
      BinaryPayload p = read_binary(path);
      return EcgRecord(Tensor({p.rows, p.cols}, std::move(p.values)),
                       static_cast<int>(p.rate));
    }
    case EcgFormat::kWfdbLike:
      return load_wfdb(path);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown ECG format");
}

void save_ecg(const EcgRecord& record, const std::filesystem::path& path,
              EcgFormat format) {
  switch (format) {
    case EcgFormat::kCsv:
      save_csv(record, path);
      return;
    case EcgFormat::kBinaryFloat32:
      write_binary(path, static_cast<std::uint32_t>(record.num_leads()),
                   static_cast<std::uint32_t>(record.num_samples()),
                   static_cast<std::uint32_t>(record.sampling_rate()),
                   record.signal().values());
      return;
    case EcgFormat::kWfdbLike:
      save_wfdb(record, path);
      return;
  }
}

void save_array_f32(const Tensor& array, const std::filesystem::path& path,
                    int sampling_rate) {
  std::size_t rows = 1;
  std::size_t cols = array.size();
  if (array.rank() == 2) {
    rows = array.dim(0);
    cols = array.dim(1);
  } else if (array.rank() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "array files hold rank-1 or rank-2 data, got " +
                    shape_string(array.shape()));
  }
  write_binary(path, static_cast<std::uint32_t>(rows),
               static_cast<std::uint32_t>(cols),
               static_cast<std::uint32_t>(sampling_rate), array.values());
}

Tensor load_array_f32(const std::filesystem::path& path) {
  BinaryPayload p = read_binary(path);
  return Tensor({p.rows, p.cols}, std::move(p.values));
}

}  // namespace ecgx
