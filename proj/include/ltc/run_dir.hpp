#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ltc/evaluate.hpp"
#include "ltc/experiment.hpp"
#include "ltc/grid.hpp"

namespace ltc {

// Layout of run/<name>/.
struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path log() const { return dir / "log.jsonl"; }
  std::filesystem::path vocab() const { return dir / "vocab.tsv"; }
  std::filesystem::path stage1() const { return dir / "stage1.ckpt"; }
  std::filesystem::path stage2() const { return dir / "stage2.ckpt"; }
  std::filesystem::path ncm_stats() const { return dir / "ncm_stats.bin"; }
  std::filesystem::path eval() const { return dir / "eval.json"; }
};

// Stage 1: writes config.json, vocab.tsv, stage1.ckpt and a fresh log.jsonl.
// Progress lines go to `progress`.
void run_train(const ExperimentConfig& config, const std::filesystem::path& dir, std::ostream& progress);

// Stage 2 on an existing run: CRT writes stage2.ckpt (frozen backbone plus
// retrained head), NCM writes ncm_stats.bin. The stage-2 section of
// config.json is replaced and stage-2 records in log.jsonl are rewritten.
void run_stage2(const std::filesystem::path& dir, const StageTwoConfig& stage2, std::ostream& progress);

struct EvalOutcome {
  Classifier classifier = Classifier::kBaseline;
  std::vector<std::string> labels;
  EvalReport report;
  BucketAccuracy buckets;
};

// Evaluates a run on its eval split. Without an explicit classifier the
// stage-2 artifact named in config.json is used when present, the stage-1
// head otherwise. Writes eval.json.
EvalOutcome run_eval(const std::filesystem::path& dir, std::optional<Classifier> classifier,
                     const std::optional<BucketLabels>& bucket_labels);

std::string format_eval(const EvalOutcome& outcome);

}  // namespace ltc
