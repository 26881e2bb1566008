#pragma once

#include "geokernel/integrate.hpp"

#include <filesystem>
#include <string>

namespace geokernel {

// Binary trajectory file, all fields little-endian:
//   "GKD1", u32 version, u32 manifold kind, u32 dim, f64 radius,
//   u32 distance convention, f64 interaction cap, u64 N, u64 K, u64 L, u64 M,
//   f64 T, u64 seed, then u32 type[N], f64 time[L], and per (m, l) the
//   positions and velocities as N x amb f64 each (amb = 3 on the sphere,
//   dim otherwise).
inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(const TrajectoryDataset& ds);
TrajectoryDataset decode_dataset(const std::string& bytes);

void write_dataset(const TrajectoryDataset& ds, const std::filesystem::path& path);
TrajectoryDataset read_dataset(const std::filesystem::path& path);

// Whole-file helpers shared by the command implementations.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace geokernel
