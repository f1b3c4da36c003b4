#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ltc {

struct Document {
  std::size_t id = 0;
  std::string text;
  std::string label;

  bool operator==(const Document&) const = default;
};

// Documents plus the ordered label set. Label order is first appearance unless
// an explicit order is supplied, so class ids stay stable when lines are
// appended to a corpus file.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;
  explicit LabeledCorpus(std::vector<Document> docs);
  // Uses `labels` as the class order; every document label must be in it.
  LabeledCorpus(std::vector<Document> docs, std::vector<std::string> labels);

  const std::vector<Document>& documents() const { return docs_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::size_t>& class_counts() const { return counts_; }
  std::size_t num_classes() const { return labels_.size(); }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

  // Throws ContractViolation for unknown labels.
  std::size_t label_id(std::string_view label) const;
  std::size_t count(std::string_view label) const { return counts_[label_id(label)]; }

 private:
  void index_labels();

  std::vector<Document> docs_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct CorpusSplit {
  LabeledCorpus train;
  LabeledCorpus eval;
  std::uint64_t seed = 0;
};

// Parses `label<TAB>text` lines. Blank lines are skipped; ids are assigned in
// line order starting at 0.
LabeledCorpus parse_tsv(std::istream& in);
LabeledCorpus load_tsv(const std::filesystem::path& path);

void write_tsv(const LabeledCorpus& corpus, std::ostream& out);
void write_tsv(const LabeledCorpus& corpus, const std::filesystem::path& path);

// Per-class sizes of the synthetic generator: class i (by descending size)
// gets max(1, round(head_count / (i+1)^zipf_exponent)) documents.
std::vector<std::size_t> longtail_counts(std::size_t n_classes, std::size_t head_count,
                                         double zipf_exponent);

// Deterministic mixed CJK/Latin corpus with Zipf-distributed class sizes.
LabeledCorpus synth_longtail(std::size_t n_classes, std::size_t head_count,
                             double zipf_exponent, std::uint64_t seed);

// Production cleaning threshold: classes with fewer documents are dropped
// when the filter is enabled.
inline constexpr std::size_t kDefaultMinClassCount = 1000;

// Removes classes with fewer than `min_count` documents. The dropped labels
// and their counts are returned through `dropped`.
LabeledCorpus drop_rare_classes(const LabeledCorpus& corpus, std::size_t min_count,
                                std::vector<std::pair<std::string, std::size_t>>* dropped = nullptr);

// Stratified split: each class sends max(1, round(eval_fraction * m_i))
// documents to eval (never all of them). Both halves keep the input label
// order and document order.
CorpusSplit split(const LabeledCorpus& corpus, double eval_fraction, std::uint64_t seed);

}  // namespace ltc
