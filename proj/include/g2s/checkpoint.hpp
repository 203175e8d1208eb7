#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "g2s/config.hpp"
#include "g2s/model.hpp"

namespace g2s {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: "G2SCKPT\0", u32 version, u64 header size, JSON header (config,
// vocabularies, parameter names and shapes, metadata), raw little-endian
// doubles in header order, u64 FNV-1a checksum of everything before it.
void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& config,
                     const nlohmann::json& meta = nlohmann::json::object());

struct LoadedCheckpoint {
  TrainConfig config;
  nlohmann::json meta;
  std::unique_ptr<Model> model;
};

// All-or-nothing: throws CheckpointError on any format, checksum, version or
// shape problem and never returns a partially loaded model.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace g2s
