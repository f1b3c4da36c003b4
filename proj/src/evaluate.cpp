#include "ltc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "ltc/errors.hpp"

namespace ltc {

EvalReport evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                std::size_t num_classes) {
  if (truth.size() != predicted.size()) throw ContractViolation("one prediction per document required");
  if (truth.empty()) throw ContractViolation("empty evaluation set");
  EvalReport r;
  r.n_eval = truth.size();
  r.per_class_count.assign(num_classes, 0);
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes) throw ContractViolation("true label out of range");
    if (predicted[i] >= num_classes) {
      throw ContractViolation("predictor returned class " + std::to_string(predicted[i]) + " of " +
                              std::to_string(num_classes));
    }
    r.confusion[truth[i]][predicted[i]]++;
    r.per_class_count[truth[i]]++;
  }
  std::size_t trace = 0;
  r.per_class_accuracy.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < num_classes; ++c) {
    trace += r.confusion[c][c];
    if (r.per_class_count[c] > 0) {
      r.per_class_accuracy[c] =
          static_cast<double>(r.confusion[c][c]) / static_cast<double>(r.per_class_count[c]);
    }
  }
  r.overall_accuracy = static_cast<double>(trace) / static_cast<double>(r.n_eval);
  return r;
}

EvalReport evaluate(const Predictor& predict, std::span<const EncodedDoc> docs, std::size_t num_classes) {
  std::vector<std::size_t> truth, predicted;
  truth.reserve(docs.size());
  predicted.reserve(docs.size());
  for (const auto& d : docs) {
    truth.push_back(d.label);
    predicted.push_back(predict(d));
  }
  return evaluate_predictions(truth, predicted, num_classes);
}

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::kMuch: return "much";
    case Bucket::kMedium: return "medium";
    case Bucket::kLess: return "less";
    case Bucket::kNone: return "none";
  }
  return "?";
}

BucketSpec tercile_buckets(std::span<const std::size_t> train_counts) {
  const std::size_t S = train_counts.size();
  std::vector<std::size_t> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return train_counts[a] > train_counts[b]; });
  BucketSpec spec;
  spec.assignment.assign(S, Bucket::kNone);
  for (std::size_t rank = 0; rank < S; ++rank) spec.assignment[order[rank]] = static_cast<Bucket>(3 * rank / S);
  return spec;
}

BucketSpec explicit_buckets(const std::vector<std::string>& labels, const std::vector<std::string>& much,
                            const std::vector<std::string>& medium, const std::vector<std::string>& less) {
  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) ids.emplace(labels[i], i);
  BucketSpec spec;
  spec.assignment.assign(labels.size(), Bucket::kNone);
  auto assign = [&](const std::vector<std::string>& members, Bucket b) {
    for (const auto& label : members) {
      auto it = ids.find(label);
      if (it == ids.end()) throw ArgumentError("bucket label '" + label + "' is not a class");
      if (spec.assignment[it->second] != Bucket::kNone) throw ArgumentError("label '" + label + "' in two buckets");
      spec.assignment[it->second] = b;
    }
  };
  assign(much, Bucket::kMuch);
  assign(medium, Bucket::kMedium);
  assign(less, Bucket::kLess);
  return spec;
}

BucketAccuracy bucket_report(const EvalReport& report, const BucketSpec& buckets) {
  if (buckets.assignment.size() != report.per_class_accuracy.size()) {
    throw ContractViolation("bucket spec does not cover every class");
  }
  std::array<double, 3> sum{};
  std::array<std::size_t, 3> n{};
  for (std::size_t c = 0; c < buckets.assignment.size(); ++c) {
    const auto b = buckets.assignment[c];
    const double acc = report.per_class_accuracy[c];
    if (b == Bucket::kNone || std::isnan(acc)) continue;
    sum[static_cast<std::size_t>(b)] += acc;
    n[static_cast<std::size_t>(b)]++;
  }
  auto mean = [&](std::size_t k) -> std::optional<double> {
    if (n[k] == 0) return std::nullopt;
    return sum[k] / static_cast<double>(n[k]);
  };
  return BucketAccuracy{mean(0), mean(1), mean(2)};
}

}  // namespace ltc
