#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltc/evaluate.hpp"
#include "ltc/experiment.hpp"

namespace ltc {

// "baseline" is the jointly trained stage-1 head, i.e. no second stage.
enum class Classifier { kBaseline, kCrt, kNcm };

std::string_view to_string(Classifier c);
Classifier parse_classifier(std::string_view s);

struct BucketLabels {
  std::vector<std::string> much, medium, less;
};

struct GridConfig {
  ExperimentConfig base;
  std::vector<SamplerKind> samplers;
  std::vector<Classifier> classifiers;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
  std::optional<BucketLabels> bucket_labels;  // default: training-count terciles
};

struct GridCell {
  SamplerKind sampler = SamplerKind::kIbs;
  Classifier classifier = Classifier::kCrt;
  std::uint64_t seed = 0;
  double overall = 0.0;
  BucketAccuracy buckets;
  double runtime_seconds = 0.0;
  std::optional<std::string> error;
};

struct GridResult {
  std::vector<GridCell> cells;  // sampler-major, then seed, then classifier
};

// Runs stage 1 once per (sampler, seed) and every requested classifier on
// top of it. A failing cell records its error and the grid carries on.
// Independent (sampler, seed) units run on up to `jobs` threads.
GridResult run_grid(const LabeledCorpus& corpus, const GridConfig& config);

// Overall accuracy, samplers x classifiers: mean over seeds, then per-seed
// values.
std::string format_accuracy_table(const GridResult& result);
// much / medium / less per (sampler, classifier), averaged over seeds.
std::string format_bucket_table(const GridResult& result);

// One JSON object per cell: sampler, classifier, seed, overall, much,
// medium, less, runtime_seconds (and error when the cell failed).
void write_grid_jsonl(const GridResult& result, std::ostream& out);

}  // namespace ltc
