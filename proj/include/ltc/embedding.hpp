#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "ltc/tensor.hpp"
#include "ltc/vocab.hpp"

namespace ltc {

// V x E word vectors. Row Vocabulary::kPad is always zero.
struct EmbeddingTable {
  Matrix matrix;
  std::size_t dim = 0;
  bool trainable = true;
  // Fraction of non-reserved vocabulary rows that came from a vector file.
  double coverage = 0.0;

  std::size_t vocab_size() const { return matrix.rows; }
  void zero_pad_row();
};

// Every non-pad row uniform in [-0.5/E, 0.5/E].
EmbeddingTable random_embedding(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

// Reads `token v1 ... vE` lines. Rows for vocabulary tokens are copied from
// the file (first occurrence wins); the rest keep their random initialization.
EmbeddingTable load_vectors(std::istream& in, const Vocabulary& vocab, std::size_t dim,
                            std::uint64_t seed);
EmbeddingTable load_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                            std::size_t dim, std::uint64_t seed);

}  // namespace ltc
