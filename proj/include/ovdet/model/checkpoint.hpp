#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "ovdet/core/jsonl.hpp"
#include "ovdet/model/model.hpp"

namespace ovdet {

constexpr char kCheckpointMagic[8] = {'O', 'V', 'D', 'E', 'T', 'C', 'K', '1'};

// Single-file archive: magic, JSON metadata block (model config,
// dictionary hash, training step, ...), then the raw parameter arrays in
// registry order.
inline void save_checkpoint(const std::string& path, const DualEncoderModel& model,
                            const json& meta) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  json header;
  header["config"] = model.config().to_json();
  header["meta"] = meta;
  json params = json::array();
  for (const auto& p : model.registry().params())
    params.push_back({{"name", p.name}, {"shape", p.var->value.shape}});
  header["params"] = params;

  std::string hs = header.dump();
  uint64_t hlen = hs.size();
  out.write(kCheckpointMagic, 8);
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& p : model.registry().params())
    out.write(reinterpret_cast<const char*>(p.var->value.v.data()),
              static_cast<std::streamsize>(p.var->value.v.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
  ModelConfig config;
  json meta;
  std::map<std::string, nn::Tensor> tensors;
};

inline LoadedCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  json header = json::parse(hs);

  LoadedCheckpoint ck;
  ck.config = ModelConfig::from_json(header.at("config"));
  ck.meta = header.value("meta", json::object());
  for (const auto& p : header.at("params")) {
    std::string name = p.at("name").get<std::string>();
    std::vector<int> shape = p.at("shape").get<std::vector<int>>();
    nn::Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    ck.tensors[name] = std::move(t);
  }
  return ck;
}

// Rebuilds the model from the stored config and fills every parameter.
inline std::unique_ptr<DualEncoderModel> load_model(const LoadedCheckpoint& ck) {
  auto model = std::make_unique<DualEncoderModel>(ck.config, 0);
  for (const auto& p : model->registry().params()) {
    auto it = ck.tensors.find(p.name);
    if (it == ck.tensors.end())
      throw std::runtime_error("checkpoint missing parameter " + p.name);
    if (it->second.shape != p.var->value.shape)
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    p.var->value = it->second;
  }
  return model;
}

inline std::unique_ptr<DualEncoderModel> load_model(const std::string& path, json* meta_out = nullptr) {
  auto ck = read_checkpoint(path);
  if (meta_out) *meta_out = ck.meta;
  return load_model(ck);
}

}  // namespace ovdet
