#pragma once

#include <filesystem>
#include <iosfwd>

#include "tsc/neural/qnet.hpp"

namespace tsc::nn {

/// Binary parameter file: 8-byte magic, u32 version, then per tensor
/// (u32 name length, name bytes, u32 rank, u64 dims..., f64 row-major values),
/// little-endian, until end of file.
inline constexpr char kCheckpointMagic[8] = {'T', 'S', 'C', 'Q', 'N', 'E', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const QNetworkParams& params);
void save_checkpoint(const std::filesystem::path& path, const QNetworkParams& params);

/// Throws LoadError on bad magic/version, unknown or missing tensors, or any
/// dimension that does not match the network architecture.
QNetworkParams read_checkpoint(std::istream& in);
QNetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace tsc::nn
