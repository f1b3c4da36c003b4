#include "ltc/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <vector>

#include "ltc/errors.hpp"
#include "ltc/rng.hpp"

namespace ltc {

void EmbeddingTable::zero_pad_row() {
  for (auto& x : matrix.row(Vocabulary::kPad)) x = 0.0;
}

EmbeddingTable random_embedding(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw ArgumentError("embedding dimension must be at least 1");
  EmbeddingTable table;
  table.dim = dim;
  table.matrix = Matrix(vocab.size(), dim);
  Rng rng(seed, Stream::kEmbeddingInit);
  const double half = 0.5 / static_cast<double>(dim);
  for (auto& x : table.matrix.data) x = rng.uniform(-half, half);
  table.zero_pad_row();
  return table;
}

EmbeddingTable load_vectors(std::istream& in, const Vocabulary& vocab, std::size_t dim,
                            std::uint64_t seed) {
  EmbeddingTable table = random_embedding(vocab, dim, seed);
  std::vector<bool> seen(vocab.size(), false);
  std::size_t covered = 0;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(' ') == std::string::npos) continue;

    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end && *p == ' ') ++p;
    const char* tok_end = p;
    while (tok_end < end && *tok_end != ' ') ++tok_end;
    const std::string_view token(p, static_cast<std::size_t>(tok_end - p));

    values.clear();
    p = tok_end;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ')) {
        throw FormatError(line_no, "malformed number in vector for '" + std::string(token) + "'");
      }
      if (!std::isfinite(v)) throw FormatError(line_no, "non-finite vector component");
      values.push_back(v);
      p = next;
    }
    if (values.size() != dim) {
      throw FormatError(line_no, "expected " + std::to_string(dim) + " components, found " +
                                     std::to_string(values.size()));
    }
    if (!vocab.contains(token)) continue;
    const auto id = static_cast<std::size_t>(vocab.id(token));
    if (seen[id]) continue;
    seen[id] = true;
    ++covered;
    std::copy(values.begin(), values.end(), table.matrix.row(id).begin());
  }
  table.zero_pad_row();
  const std::size_t eligible = vocab.size() - 2;
  table.coverage = eligible == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(eligible);
  return table;
}

EmbeddingTable load_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                            std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vector file " + path.string());
  return load_vectors(in, vocab, dim, seed);
}

}  // namespace ltc
