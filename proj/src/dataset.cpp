#include "ltc/dataset.hpp"

#include "ltc/errors.hpp"

namespace ltc {

namespace {

std::vector<std::size_t> labels_of(const std::vector<EncodedDoc>& docs) {
  std::vector<std::size_t> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.label);
  return out;
}

}  // namespace

std::vector<std::size_t> PreparedData::train_labels() const { return labels_of(train); }
std::vector<std::size_t> PreparedData::eval_labels() const { return labels_of(eval); }

PreparedData prepare(const CorpusSplit& split, const Stopwords& stopwords, const PreprocessConfig& config) {
  if (split.train.labels() != split.eval.labels()) throw ContractViolation("train and eval label orders differ");
  PreparedData data;
  data.labels = split.train.labels();
  data.train_counts = split.train.class_counts();

  std::vector<TokenSeq> train_tokens;
  train_tokens.reserve(split.train.size());
  for (const auto& d : split.train.documents()) train_tokens.push_back(preprocess_text(d.text, stopwords));
  data.vocab = build_vocab(train_tokens, config.min_freq);

  for (std::size_t i = 0; i < train_tokens.size(); ++i) {
    const auto& doc = split.train.documents()[i];
    data.train.push_back(encode(train_tokens[i], data.vocab, config.max_len, split.train.label_id(doc.label)));
  }
  for (const auto& doc : split.eval.documents()) {
    data.eval.push_back(encode(preprocess_text(doc.text, stopwords), data.vocab, config.max_len,
                               split.eval.label_id(doc.label)));
  }
  return data;
}

}  // namespace ltc
