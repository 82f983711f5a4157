#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "zpr/corpus.hpp"
#include "zpr/model.hpp"
#include "zpr/rng.hpp"
#include "zpr/training.hpp"

namespace zpr {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class FeatureVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Model model;  // values and Adagrad accumulators
  Vocabulary vocabulary;
  Phase phase = Phase::kPretrain;
  int epoch = 0;
  RngStream rng;
  std::string feature_version{kFeatureVersion};
};

// Layout: 8-byte magic, u64 header length, JSON header, then for every
// parameter in store order two length-prefixed sections (values, Adagrad
// accumulators) of little-endian doubles, then a u64 FNV-1a checksum of
// everything before it.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
// Throws ChecksumError on corruption and FeatureVersionError when the
// checkpoint was written with a different feature list.
Checkpoint load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes, std::size_t len);

}  // namespace zpr
