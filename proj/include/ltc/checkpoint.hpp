#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ltc/textcnn.hpp"

namespace ltc {

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr char kMagic[9] = "LTCCKPT\0";

  ExtractorParams extractor;
  HeadParams head;
  std::uint64_t vocab_hash = 0;
  std::uint64_t config_hash = 0;  // ModelConfig::architecture_hash of the shapes
};

Checkpoint make_checkpoint(ExtractorParams extractor, HeadParams head, std::uint64_t vocab_hash);

struct CheckpointExpectations {
  std::optional<std::uint64_t> vocab_hash;
  std::optional<std::uint64_t> config_hash;
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Rebuilds the parameters and verifies the stored config hash against the
// tensor shapes, then against `expect`. The embedding is marked trainable.
Checkpoint load_checkpoint(std::istream& in, const CheckpointExpectations& expect = {});
Checkpoint load_checkpoint(const std::filesystem::path& path, const CheckpointExpectations& expect = {});

}  // namespace ltc
