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

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ecgx/core/hash.hpp"
#include "ecgx/error.hpp"
#include "ecgx/wrapper/wrapped_model.hpp"

namespace ecgx {
namespace {

constexpr char kMagic[4] = {'E', 'X', 'C', 'K'};
constexpr const char* kFormat = "ecgx-checkpoint-1";

}  // namespace

void save_checkpoint(WrappedModel& model, const std::filesystem::path& path) {
  const nlohmann::json header = {
      {"format", kFormat},
      {"task", task_kind_name(model.task().kind())},
      {"num_outputs", model.task().num_outputs()},
      {"preprocess", model.input_adapter().name()},
      {"postprocess", output_transform_name(model.output_transform())},
      {"layers", model.layer_names()},
      {"architecture", model.network().architecture()},
      {"metadata", model.metadata()}};
  const std::string text = header.dump();
  std::string bytes(kMagic, 4);
  append_u32_le(bytes, static_cast<std::uint32_t>(text.size()));
  bytes += text;
  for (double v : model.network().flat_parameters()) append_f64_le(bytes, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

WrappedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kModelLoadFailed, "cannot open " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw Error(ErrorCode::kModelLoadFailed,
                path.string() + " is not a checkpoint");
  }
  const std::uint32_t header_len = read_u32_le(bytes.data() + 4);
  if (bytes.size() < 8ull + header_len) {
    throw Error(ErrorCode::kModelLoadFailed, "truncated checkpoint header");
  }
  try {
    const auto header = nlohmann::json::parse(bytes.substr(8, header_len));
    if (header.at("format") != kFormat) {
      throw Error(ErrorCode::kModelLoadFailed, "unsupported checkpoint format");
    }
    const TaskType task =
        make_task(task_kind_from_name(header.at("task").get<std::string>()),
                  header.at("num_outputs").get<std::size_t>());
    nn::Network network =
        nn::Network::from_architecture(header.at("architecture"));
    const std::size_t payload = bytes.size() - 8 - header_len;
    if (payload % 8 != 0 || payload / 8 != network.num_parameters()) {
      throw Error(ErrorCode::kModelLoadFailed,
                  "checkpoint holds " + std::to_string(payload / 8) +
                      " values, architecture needs " +
                      std::to_string(network.num_parameters()));
    }
    std::vector<double> values(payload / 8);
    std::memcpy(values.data(), bytes.data() + 8 + header_len, payload);
    network.set_flat_parameters(values);
    WrappedModel model(
        std::move(network), task,
        header.at("layers").get<std::vector<std::string>>(),
        InputAdapter::from_name(header.at("preprocess").get<std::string>()),
        output_transform_from_name(header.at("postprocess").get<std::string>()));
    model.set_metadata(header.value("metadata", nlohmann::json::object()));
    model.set_model_id(sha256_hex(bytes));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kModelLoadFailed,
                std::string("bad checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kModelLoadFailed) throw;
    throw Error(ErrorCode::kModelLoadFailed, e.what());
  }
}

}  // namespace ecgx
