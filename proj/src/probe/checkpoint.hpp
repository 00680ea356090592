#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "probe/model.hpp"

namespace orthoprobe::probe {

inline constexpr std::string_view kCheckpointMagic = "OPCKPT1\n";

/// Single-file checkpoint: magic, u64 LE manifest length, JSON manifest,
/// zero padding to an 8-byte boundary, then raw f64 LE parameter blocks.
/// Block offsets in the manifest are relative to the start of that data
/// section. `extra` is merged into the manifest (seed, config, ...).
std::string encode_checkpoint(const ProbeModel& model, const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  ProbeModel model;
  nlohmann::json manifest;
};

LoadedCheckpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const ProbeModel& model, const std::string& path,
                     const nlohmann::json& extra = nlohmann::json::object());
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace orthoprobe::probe
