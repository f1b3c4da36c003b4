#include "ltc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltc/errors.hpp"
#include "ltc/rng.hpp"

namespace ltc {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kIbs: return "ibs";
    case SamplerKind::kCbs: return "cbs";
    case SamplerKind::kSrs: return "srs";
    case SamplerKind::kPbs: return "pbs";
  }
  return "?";
}

SamplerKind parse_sampler(std::string_view name) {
  if (name == "ibs") return SamplerKind::kIbs;
  if (name == "cbs") return SamplerKind::kCbs;
  if (name == "srs") return SamplerKind::kSrs;
  if (name == "pbs") return SamplerKind::kPbs;
  throw ArgumentError("unknown sampler '" + std::string(name) + "' (expected ibs|cbs|srs|pbs)");
}

namespace {

void require_nonempty(std::span<const std::size_t> counts) {
  if (counts.empty()) throw ArgumentError("no classes");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw EmptyClassError("class " + std::to_string(i) + " has no samples");
  }
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

std::vector<double> ibs_probs(std::span<const std::size_t> class_counts) {
  require_nonempty(class_counts);
  return normalized(std::vector<double>(class_counts.begin(), class_counts.end()));
}

std::vector<double> cbs_probs(std::size_t num_classes) {
  if (num_classes == 0) throw ArgumentError("class-balanced sampling needs at least one class");
  return std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes));
}

std::vector<double> srs_probs(std::span<const std::size_t> class_counts) {
  require_nonempty(class_counts);
  std::vector<double> w(class_counts.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sqrt(static_cast<double>(class_counts[i]));
  return normalized(std::move(w));
}

std::vector<double> pbs_probs(std::span<const std::size_t> class_counts, std::size_t t, std::size_t T) {
  if (T < 1) throw ArgumentError("PBS needs T >= 1");
  if (t > T) throw ArgumentError("PBS epoch t exceeds T");
  auto p = ibs_probs(class_counts);
  if (t == 0) return p;
  const auto cbs = cbs_probs(class_counts.size());
  if (t == T) return cbs;
  const double mix = static_cast<double>(t) / static_cast<double>(T);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = mix * cbs[i] + (1.0 - mix) * p[i];
  return p;
}

std::vector<double> epoch_probs(const SamplerSpec& spec, std::span<const std::size_t> class_counts,
                                std::size_t epoch) {
  switch (spec.kind) {
    case SamplerKind::kIbs: return ibs_probs(class_counts);
    case SamplerKind::kCbs: return cbs_probs(class_counts.size());
    case SamplerKind::kSrs: return srs_probs(class_counts);
    case SamplerKind::kPbs: {
      if (spec.total_epochs < 1) throw ArgumentError("PBS needs total_epochs >= 1");
      if (epoch >= spec.total_epochs) throw ArgumentError("epoch beyond PBS schedule");
      // Grid linspace(0, 1, epochs): epoch e gets mixing weight e / (epochs - 1).
      if (spec.total_epochs == 1) return pbs_probs(class_counts, 0, 1);
      return pbs_probs(class_counts, epoch, spec.total_epochs - 1);
    }
  }
  throw ArgumentError("unknown sampler kind");
}

ClassIndex::ClassIndex(std::span<const std::size_t> labels, std::size_t num_classes, std::uint64_t seed)
    : per_class_(num_classes), counts_(num_classes, 0), total_(labels.size()) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ContractViolation("label id out of range");
    per_class_[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (per_class_[c].empty()) throw EmptyClassError("class " + std::to_string(c) + " has no training samples");
    counts_[c] = per_class_[c].size();
    Rng rng(seed, Stream::kClassIndex, {c});
    rng.shuffle(std::span<std::size_t>(per_class_[c]));
  }
}

EpochPlan plan_epoch(const ClassIndex& index, const SamplerSpec& spec, std::size_t epoch,
                     std::size_t batch_size, std::optional<std::size_t> batches_per_epoch) {
  if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
  if (batches_per_epoch && *batches_per_epoch < 1) throw ArgumentError("batches per epoch must be at least 1");
  const std::size_t n = index.total();
  const std::size_t default_batches = (n + batch_size - 1) / batch_size;

  std::vector<std::size_t> draws;
  if (spec.kind == SamplerKind::kIbs) {
    const std::size_t want = batches_per_epoch ? *batches_per_epoch * batch_size : n;
    std::vector<std::size_t> pass;
    pass.reserve(n);
    for (const auto& members : index.per_class()) pass.insert(pass.end(), members.begin(), members.end());
    std::sort(pass.begin(), pass.end());
    draws.reserve(want);
    for (std::uint64_t round = 0; draws.size() < want; ++round) {
      Rng rng(spec.seed, Stream::kIbsShuffle, {epoch, round});
      rng.shuffle(std::span<std::size_t>(pass));
      const std::size_t take = std::min(pass.size(), want - draws.size());
      draws.insert(draws.end(), pass.begin(), pass.begin() + static_cast<std::ptrdiff_t>(take));
    }
  } else {
    const std::size_t want = batch_size * (batches_per_epoch ? *batches_per_epoch : default_batches);
    const auto probs = epoch_probs(spec, index.class_counts(), epoch);
    std::vector<double> cdf(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cdf.begin());

    auto queues = index.per_class();
    std::vector<std::size_t> cursor(queues.size(), 0);
    std::vector<std::uint64_t> reshuffles(queues.size(), 0);
    for (std::size_t c = 0; c < queues.size(); ++c) {
      Rng rng(spec.seed, Stream::kClassCursor, {epoch, c, 0});
      rng.shuffle(std::span<std::size_t>(queues[c]));
    }

    Rng pick(spec.seed, Stream::kClassPick, {epoch});
    draws.reserve(want);
    for (std::size_t k = 0; k < want; ++k) {
      const double u = pick.uniform01();
      std::size_t c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (c >= cdf.size()) c = cdf.size() - 1;
      if (cursor[c] == queues[c].size()) {
        Rng rng(spec.seed, Stream::kClassCursor, {epoch, c, ++reshuffles[c]});
        rng.shuffle(std::span<std::size_t>(queues[c]));
        cursor[c] = 0;
      }
      draws.push_back(queues[c][cursor[c]++]);
    }
  }

  EpochPlan plan;
  plan.epoch = epoch;
  for (std::size_t i = 0; i < draws.size(); i += batch_size) {
    const std::size_t end = std::min(draws.size(), i + batch_size);
    plan.batches.emplace_back(draws.begin() + static_cast<std::ptrdiff_t>(i),
                              draws.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

}  // namespace ltc
