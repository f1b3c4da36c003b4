#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ltc/checkpoint.hpp"
#include "ltc/dataset.hpp"
#include "ltc/optimizer.hpp"
#include "ltc/sampling.hpp"

namespace ltc {

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 64;
  std::optional<std::size_t> batches_per_epoch;  // default ceil(N / batch_size)
  LrSchedule lr;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t stage = 1;
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> eval_accuracy;
  double lr = 0.0;
  std::vector<std::size_t> class_draws;  // documents drawn per class this epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct StageOneResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> log;
  SamplerSpec sampler;
};

// Accuracy of extractor + head over encoded documents.
double accuracy(const ExtractorParams& extractor, const HeadParams& head, const std::vector<EncodedDoc>& docs);

// Joint training of backbone and head for config.epochs epochs, with batches
// from plan_epoch under `sampler`. Eval accuracy is recorded per epoch when
// the data has an eval half.
StageOneResult stage1_train(const PreparedData& data, const SamplerSpec& sampler, const ModelConfig& model,
                            const TrainConfig& config, EmbeddingTable embedding,
                            const EpochCallback& on_epoch = {});

}  // namespace ltc
