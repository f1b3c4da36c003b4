#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ltc/textcnn.hpp"

namespace ltc::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ltc_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Small random model used by gradient and checkpoint tests: V=8, E=4, F=2,
// D=3, S=3 with widths {2,3,4}.
struct TinyModel {
  ExtractorParams extractor;
  HeadParams head;
  std::vector<EncodedDoc> docs;
};

inline TinyModel tiny_model(bool trainable_embedding, std::uint64_t seed = 5) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  TinyModel m;
  EmbeddingTable table;
  table.dim = 4;
  table.trainable = trainable_embedding;
  table.matrix = Matrix(8, 4);
  for (auto& v : table.matrix.data) v = u(gen);
  table.zero_pad_row();
  m.extractor.embedding = table;
  for (std::size_t w : {2, 3, 4}) {
    ConvBank bank;
    bank.width = w;
    bank.weight = Matrix(2, w * 4);
    for (auto& v : bank.weight.data) v = u(gen);
    bank.bias = {u(gen) * 0.2, u(gen) * 0.2};
    m.extractor.convs.push_back(bank);
  }
  m.extractor.projection = Matrix(3, 6);
  for (auto& v : m.extractor.projection.data) v = u(gen);
  m.extractor.projection_bias = {u(gen), u(gen), u(gen)};
  m.head.weight = Matrix(3, 3);
  for (auto& v : m.head.weight.data) v = u(gen);
  m.head.bias = {u(gen), u(gen), u(gen)};
  // Distinct tokens per position keep max-pool argmaxes away from ties.
  m.docs = {
      {{2, 5, 3, 7, 4, 0, 0}, 0},
      {{6, 1, 2, 2, 7, 3, 5}, 1},
      {{3, 4, 0, 0, 0, 0, 0}, 2},
      {{7, 6, 5, 4, 3, 2, 0}, 1},
  };
  return m;
}

}  // namespace ltc::testing
