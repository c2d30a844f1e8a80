#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rgnet/errors.hpp"
#include "rgnet/trainer.hpp"

namespace rgnet {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

using nlohmann::json;

constexpr std::array<char, 4> kMagic = {'R', 'G', 'C', 'K'};
constexpr std::size_t kPrefixBytes = 4 + 4 + 8;

struct Archive {
  json header;
  std::vector<float> payload;
};

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kPrefixBytes || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw CheckpointError(path.string() + " is not a checkpoint (bad magic)");
  }
  std::uint32_t version;
  std::uint64_t header_size;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&header_size, bytes.data() + 8, 8);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  if (bytes.size() < kPrefixBytes + header_size) throw CheckpointError("checkpoint header is truncated");
  Archive ar;
  try {
    ar.header = json::parse(bytes.substr(kPrefixBytes, header_size));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const auto body = bytes.size() - kPrefixBytes - header_size;
  if (body % sizeof(float) != 0) throw CheckpointError("checkpoint payload is truncated");
  ar.payload.resize(body / sizeof(float));
  std::memcpy(ar.payload.data(), bytes.data() + kPrefixBytes + header_size, body);
  return ar;
}

CheckpointInfo info_from_header(const json& header) {
  CheckpointInfo info;
  try {
    info.config = config_from_json(header.at("config"));
    info.epoch = header.at("epoch").get<std::int64_t>();
    info.step = header.at("step").get<std::int64_t>();
    info.rng_state = header.at("rng_state").get<std::string>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header is incomplete: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config is invalid: ") + e.what());
  }
  return info;
}

std::string shape_text(const std::vector<std::int64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? ", " : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, RGNetModel& model, const CheckpointInfo& info,
                     bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw CheckpointError("refusing to overwrite existing checkpoint " + path.string());
  }
  json params = json::array();
  std::vector<float> payload;
  for (const auto& item : model->named_parameters(true)) {
    const auto t = item.value().detach().to(torch::kFloat32).contiguous();
    if (!torch::isfinite(t).all().item<bool>()) {
      throw CheckpointError("parameter " + item.key() + " holds non-finite values");
    }
    params.push_back({{"name", item.key()}, {"shape", t.sizes().vec()}});
    payload.insert(payload.end(), t.data_ptr<float>(), t.data_ptr<float>() + t.numel());
  }
  const json header = {{"config", config_to_json(info.config)},
                       {"epoch", info.epoch},
                       {"step", info.step},
                       {"rng_state", info.rng_state},
                       {"parameters", params}};
  const auto text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t header_size = text.size();
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&header_size), sizeof header_size);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  return info_from_header(read_archive(path).header);
}

void load_parameters(RGNetModel& model, const std::filesystem::path& path) {
  const auto ar = read_archive(path);
  std::map<std::string, std::pair<std::vector<std::int64_t>, std::size_t>> stored;
  std::size_t offset = 0;
  try {
    for (const auto& p : ar.header.at("parameters")) {
      auto shape = p.at("shape").get<std::vector<std::int64_t>>();
      std::size_t numel = 1;
      for (auto d : shape) numel *= static_cast<std::size_t>(d);
      stored[p.at("name").get<std::string>()] = {shape, offset};
      offset += numel;
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint parameter manifest is malformed: ") + e.what());
  }
  if (offset != ar.payload.size()) throw CheckpointError("checkpoint payload size does not match its manifest");

  torch::NoGradGuard no_grad;
  auto named = model->named_parameters(true);
  for (const auto& item : named) {
    const auto it = stored.find(item.key());
    if (it == stored.end()) throw CheckpointError("checkpoint has no parameter " + item.key());
    const auto& [shape, at] = it->second;
    if (shape != item.value().sizes().vec()) {
      throw CheckpointError("shape mismatch for " + item.key() + ": checkpoint " + shape_text(shape) + ", model " +
                            shape_text(item.value().sizes().vec()));
    }
    const auto src = torch::from_blob(const_cast<float*>(ar.payload.data() + at), shape, torch::kFloat32);
    if (!torch::isfinite(src).all().item<bool>()) throw CheckpointError("non-finite values in " + item.key());
    item.value().copy_(src);
  }
  if (stored.size() != named.size()) throw CheckpointError("checkpoint holds parameters the model does not have");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  auto info = read_checkpoint_info(path);
  RGNetModel model(info.config.train.model);
  load_parameters(model, path);
  model->eval();
  return {model, std::move(info)};
}

}  // namespace rgnet
