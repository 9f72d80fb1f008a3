#pragma once

#include <filesystem>

#include "nmla/train.hpp"

namespace nmla {

// JSON document:
//   {"format": "nmla-checkpoint", "version": 1,
//    "config": {...TrainConfig...},
//    "model": {"upsample_factor": 3,
//              "tensors": {"embed": {"rows": r, "cols": c, "data": [row-major...]}, ...}},
//    "adam": {"step": k, "first_moment": {...}, "second_moment": {...}},
//    "progress": {"pretrain_steps_done": a, "finetune_steps_done": b}}
// Doubles are written with round-trip precision, so save/load is lossless.
struct Checkpoint {
  TrainConfig config;
  TrainState state;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// TrainConfig as a JSON string, and back; used by the CLI config files.
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json_text);

}  // namespace nmla
