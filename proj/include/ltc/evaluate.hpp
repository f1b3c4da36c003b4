#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltc/vocab.hpp"

namespace ltc {

struct EvalReport {
  double overall_accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // NaN for classes absent from eval
  std::vector<std::size_t> per_class_count;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t n_eval = 0;
};

using Predictor = std::function<std::size_t(const EncodedDoc&)>;

// One pass over `docs`. Throws ContractViolation when the predictor returns
// a class id >= num_classes.
EvalReport evaluate(const Predictor& predict, std::span<const EncodedDoc> docs, std::size_t num_classes);

// Same report from precomputed predictions.
EvalReport evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                std::size_t num_classes);

enum class Bucket { kMuch = 0, kMedium = 1, kLess = 2, kNone = 3 };

std::string_view to_string(Bucket b);

struct BucketSpec {
  std::vector<Bucket> assignment;  // per class id
};

// Classes ranked by training count (descending, ties by class id) and cut
// into terciles: rank r goes to bucket floor(3 r / S).
BucketSpec tercile_buckets(std::span<const std::size_t> train_counts);

// Explicit per-bucket label lists. Labels not listed belong to no bucket.
// Throws ArgumentError for unknown or repeated labels.
BucketSpec explicit_buckets(const std::vector<std::string>& labels, const std::vector<std::string>& much,
                            const std::vector<std::string>& medium, const std::vector<std::string>& less);

// Unweighted mean of member classes' accuracies; absent for an empty bucket.
struct BucketAccuracy {
  std::optional<double> much;
  std::optional<double> medium;
  std::optional<double> less;
};

BucketAccuracy bucket_report(const EvalReport& report, const BucketSpec& buckets);

}  // namespace ltc
