#pragma once

#include <cstdint>
#include <filesystem>

#include "tkgc/config.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/training.hpp"

namespace tkgc {

// Binary layout, all integers and floats little-endian:
//   "TKGCCKPT" | u32 version | u32 dtype (1 = float64)
//   u64 config length | config text (RunConfig::to_text)
//   u64 |E| | u64 |R| base | u64 |T|
//   u64 epochs_done | u64 best_epoch | f64 best_valid_mrr | u64 adam step
//   4 tensor groups (params, best params, adam m, adam v), each:
//     u32 count, then per tensor: u32 name length | name | u64 rows | u64 cols | data
// The sampling RNG needs no stored state: every stream is derived from
// (config.seed, epoch, position).
struct Checkpoint {
  RunConfig config;
  VocabSizes vocab;
  TrainState state;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Throws Error on a bad magic, an unsupported version or dtype, or a shape
// that disagrees with the stored config and vocabulary.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tkgc
