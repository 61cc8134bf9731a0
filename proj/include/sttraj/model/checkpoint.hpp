#pragma once

#include "sttraj/model/model.hpp"
#include "sttraj/model/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>

namespace sttraj::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingState {
  std::uint64_t epoch = 0;  // completed epochs
  std::uint64_t seed = 0;   // root of every random stream used in training
  SgdState optimizer;
  double best_loss = std::numeric_limits<double>::infinity();
};

/// Little-endian container:
///   "STTC" | u32 version | u32 len + model config (key=value lines)
///   | u64 epoch | u64 seed | f64 best_loss | u32 tensor count
///   | per tensor: u32 name len + UTF-8 name | u32 rank | u32 dims[rank] | f64 data
///   | u64 FNV-1a checksum of all preceding bytes
/// Optimizer velocities are stored as tensors named "velocity/<param>".
void write_checkpoint(std::ostream& out, const Model& model, const TrainingState& state);
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainingState& state);

struct LoadedCheckpoint {
  Model model;
  TrainingState state;
};

/// Throws IntegrityError for bad magic, truncation, checksum mismatch or a
/// tensor set that does not match the model; VersionError for other versions.
LoadedCheckpoint read_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sttraj::model
