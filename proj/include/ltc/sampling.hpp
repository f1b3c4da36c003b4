#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltc {

enum class SamplerKind { kIbs, kCbs, kSrs, kPbs };

std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler(std::string_view name);  // "ibs", "cbs", "srs", "pbs"

// Class probabilities of the four strategies.
//   IBS: m_i / sum m_j
//   CBS: 1 / S
//   SRS: sqrt(m_i) / sum sqrt(m_j)
//   PBS: (t/T) CBS + (1 - t/T) IBS
std::vector<double> ibs_probs(std::span<const std::size_t> class_counts);
std::vector<double> cbs_probs(std::size_t num_classes);
std::vector<double> srs_probs(std::span<const std::size_t> class_counts);
std::vector<double> pbs_probs(std::span<const std::size_t> class_counts, std::size_t t, std::size_t T);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kIbs;
  // Number of training epochs; PBS moves from IBS at the first epoch to CBS
  // at the last one along a uniform grid.
  std::size_t total_epochs = 1;
  std::uint64_t seed = 0;
};

// The strategy vector in force during (0-based) `epoch`.
std::vector<double> epoch_probs(const SamplerSpec& spec, std::span<const std::size_t> class_counts,
                                std::size_t epoch);

// Training indices grouped by class, each group in seeded random order.
class ClassIndex {
 public:
  ClassIndex(std::span<const std::size_t> labels, std::size_t num_classes, std::uint64_t seed);

  const std::vector<std::vector<std::size_t>>& per_class() const { return per_class_; }
  const std::vector<std::size_t>& class_counts() const { return counts_; }
  std::size_t num_classes() const { return per_class_.size(); }
  std::size_t total() const { return total_; }

 private:
  std::vector<std::vector<std::size_t>> per_class_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct EpochPlan {
  std::size_t epoch = 0;
  std::vector<std::vector<std::size_t>> batches;

  bool operator==(const EpochPlan&) const = default;
};

// Builds one epoch of index batches. With no explicit batch count the epoch
// has ceil(N/B) batches: IBS is then a single shuffled pass over all indices
// (last batch possibly short); the other strategies draw B * ceil(N/B)
// indices by picking a class from the strategy vector and then the next
// document from that class's cursor, reshuffling the class on wraparound.
// With an explicit count every strategy draws exactly B * K indices.
EpochPlan plan_epoch(const ClassIndex& index, const SamplerSpec& spec, std::size_t epoch,
                     std::size_t batch_size, std::optional<std::size_t> batches_per_epoch = {});

}  // namespace ltc
