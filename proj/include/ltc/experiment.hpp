#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "ltc/corpus.hpp"
#include "ltc/dataset.hpp"
#include "ltc/embedding.hpp"
#include "ltc/sampling.hpp"
#include "ltc/stage_one.hpp"
#include "ltc/stage_two.hpp"
#include "ltc/textcnn.hpp"

namespace ltc {

// Every knob of a two-stage run. Serialized verbatim to config.json.
struct ExperimentConfig {
  std::string corpus_path;
  std::size_t min_count = 0;  // 0 disables the rare-class filter
  double eval_fraction = 0.2;
  std::string stopwords_zh;  // empty: shipped list
  std::string stopwords_en;
  PreprocessConfig preprocess;
  std::string vectors_path;  // empty: random embedding
  ModelConfig model;         // vocab_size / num_classes filled from data
  SamplerKind sampler = SamplerKind::kIbs;
  TrainConfig train;
  StageTwoConfig stage2;
  std::uint64_t seed = 0;

  // Copies `seed` into every sub-config that carries one.
  void propagate_seed();
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Corpus after the optional rare-class filter. Dropped classes are reported
// through `dropped`.
LabeledCorpus load_experiment_corpus(const ExperimentConfig& config,
                                     std::vector<std::pair<std::string, std::size_t>>* dropped = nullptr);

Stopwords experiment_stopwords(const ExperimentConfig& config);

// Split, preprocess and encode according to the config.
PreparedData prepare_experiment(const LabeledCorpus& corpus, const ExperimentConfig& config);

// Model config with vocabulary and class counts filled in.
ModelConfig experiment_model(const ExperimentConfig& config, const PreparedData& data);

// Pretrained vectors when configured, otherwise a seeded random table.
EmbeddingTable experiment_embedding(const ExperimentConfig& config, const PreparedData& data);

nlohmann::json to_json(const EpochRecord& record);

}  // namespace ltc
