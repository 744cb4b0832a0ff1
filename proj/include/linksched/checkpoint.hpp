#pragma once

#include <filesystem>
#include <string>

#include "linksched/embednn.hpp"

namespace linksched {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container: magic "LSCKPT\0\0", version, architecture, batch-norm
// constants, training-config hash, then every tensor as (rows, cols, row-major
// little-endian float64). Round trips are bit-exact.
std::string serialize_checkpoint(const ModelParams& model);
ModelParams deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& model);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace linksched
