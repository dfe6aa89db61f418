#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "forcediff/data/channel_spec.hpp"
#include "forcediff/data/scaler.hpp"
#include "forcediff/denoiser/unet.hpp"
#include "forcediff/diffusion/schedule.hpp"

namespace forcediff::denoiser {

// Everything needed to score new data with a trained model.
struct Checkpoint {
  DenoiserParams<float> params;
  data::ChannelSpec channels;
  diffusion::DiffusionConfig diffusion;
  data::Scaler scaler;
  std::uint64_t seed = 0;
};

// Layout: the line "forcediff-checkpoint", one line of JSON metadata, then
// per parameter a line "<name> <rank> <extents...>" followed by its values
// as little-endian float32.
inline constexpr int kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& checkpoint);
// Throws DataError on unknown versions, shape mismatches, or truncation.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace forcediff::denoiser
