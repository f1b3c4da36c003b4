#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ltc/checkpoint.hpp"
#include "ltc/dataset.hpp"
#include "ltc/metric.hpp"
#include "ltc/stage_one.hpp"

namespace ltc {

enum class Stage2Method { kCrt, kNcm };
enum class MeanMode { kBatch, kRunning, kDecay };
enum class Distance { kEuclidean, kMahalanobis, kCosine };

std::string_view to_string(Stage2Method m);
std::string_view to_string(MeanMode m);
std::string_view to_string(Distance d);
Stage2Method parse_stage2_method(std::string_view s);
MeanMode parse_mean_mode(std::string_view s);
Distance parse_distance(std::string_view s);

struct StageTwoConfig {
  Stage2Method method = Stage2Method::kCrt;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::optional<std::size_t> batches_per_epoch;
  std::uint64_t seed = 0;

  // CRT
  LrSchedule lr{5e-5, 5, 0.1};
  AdamConfig adam;
  double head_init_scale = 0.05;

  // NCM
  MeanMode mean_mode = MeanMode::kBatch;
  double decay_alpha = 0.9;  // read only in decay mode
  Distance distance = Distance::kEuclidean;
  std::size_t metric_dim = 0;  // 0 means D
  MetricFitConfig metric;
};

struct CrtResult {
  HeadParams head;
  std::vector<EpochRecord> log;
};

// Classifier re-training: the backbone is frozen, the head re-initialized
// uniform in [-head_init_scale, head_init_scale] and trained with
// class-balanced batches over the frozen features.
CrtResult crt_stage2(const Checkpoint& stage1, const PreparedData& data, const StageTwoConfig& config,
                     const EpochCallback& on_epoch = {});

struct ClassStats {
  Matrix means;                      // S x D
  std::vector<std::size_t> counts;   // samples seen per class
  std::optional<Matrix> metric;      // m x D, Mahalanobis only
  Distance distance = Distance::kEuclidean;

  std::size_t num_classes() const { return means.rows; }
  bool usable(std::size_t c) const { return counts[c] > 0; }
};

// mu <- n/(n+1) mu + 1/(n+1) phi
void running_mean_update(std::span<double> mean, std::size_t n, std::span<const double> phi);
// mu <- alpha mu + (1 - alpha) batch_mean
void decay_mean_update(std::span<double> mean, double alpha, std::span<const double> batch_mean);

// Class means of precomputed features. Batch mode is the exact mean; running
// mode folds samples one at a time in the given order; decay mode walks
// shuffled batches for config.epochs passes and blends each class's batch
// mean into its estimate (the first batch mean seeds the estimate).
ClassStats class_means(const Matrix& features, std::span<const std::size_t> labels, std::size_t num_classes,
                       const StageTwoConfig& config);

// Extracts training features with the frozen stage-1 backbone, computes class
// means and, for Mahalanobis distance, fits the metric.
ClassStats ncm_fit(const Checkpoint& stage1, const PreparedData& data, const StageTwoConfig& config,
                   MetricFitResult* metric_log = nullptr);

// Distance of `feature` to class mean `cls` under stats.distance; for cosine
// this is 1 - cosine similarity.
double ncm_distance(const ClassStats& stats, std::size_t cls, std::span<const double> feature);

// Nearest usable class mean; ties go to the lowest class id.
std::size_t ncm_predict(const ClassStats& stats, std::span<const double> feature);

// Linear head with rows W^T W mu_y and biases -0.5 mu_y^T W^T W mu_y (W = I
// without a metric), so its argmax equals the nearest-mean argmin. Unusable
// classes get a bias of -infinity.
HeadParams ncm_as_head(const ClassStats& stats);

void save_class_stats(const ClassStats& stats, std::uint64_t vocab_hash, const std::filesystem::path& path);
ClassStats load_class_stats(const std::filesystem::path& path, std::optional<std::uint64_t> vocab_hash = {});

}  // namespace ltc
