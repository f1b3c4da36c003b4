#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ltc/corpus.hpp"
#include "ltc/text.hpp"
#include "ltc/vocab.hpp"

namespace ltc {

struct PreprocessConfig {
  std::size_t min_freq = 2;
  std::size_t max_len = 64;
};

// A split after cleaning, segmentation, stopword removal and encoding. The
// vocabulary is built from the training half only.
struct PreparedData {
  std::vector<std::string> labels;
  Vocabulary vocab;
  std::vector<EncodedDoc> train;
  std::vector<EncodedDoc> eval;
  std::vector<std::size_t> train_counts;

  std::size_t num_classes() const { return labels.size(); }
  std::vector<std::size_t> train_labels() const;
  std::vector<std::size_t> eval_labels() const;
};

PreparedData prepare(const CorpusSplit& split, const Stopwords& stopwords, const PreprocessConfig& config);

}  // namespace ltc
