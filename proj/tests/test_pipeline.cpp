#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ltc/checkpoint.hpp"
#include "ltc/corpus.hpp"
#include "ltc/errors.hpp"
#include "ltc/grid.hpp"
#include "ltc/run_dir.hpp"
#include "support.hpp"

using namespace ltc;
using ltc::testing::read_bytes;
using ltc::testing::TempDir;

namespace {

ExperimentConfig run_config(const std::filesystem::path& corpus) {
  ExperimentConfig c;
  c.corpus_path = corpus.string();
  c.preprocess = {1, 12};
  c.model.embed_dim = 6;
  c.model.num_filters = 3;
  c.model.feature_dim = 6;
  c.model.max_len = 12;
  c.sampler = SamplerKind::kSrs;
  c.train.epochs = 2;
  c.train.batch_size = 16;
  c.train.lr.base = 5e-3;
  c.stage2.epochs = 2;
  c.stage2.batch_size = 16;
  c.stage2.lr.base = 5e-3;
  c.seed = 19;
  return c;
}

std::string strip_runtime(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    j.erase("runtime_seconds");
    out << j.dump() << '\n';
  }
  return out.str();
}

bool same_backbone(const Checkpoint& a, const Checkpoint& b) {
  const auto ta = extractor_tensors(a.extractor);
  const auto tb = extractor_tensors(b.extractor);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].dims != tb[i].dims ||
        std::memcmp(ta[i].data.data(), tb[i].data.data(), ta[i].data.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("experiment config survives JSON") {
    ExperimentConfig c = run_config("x.tsv");
    c.stage2.method = Stage2Method::kNcm;
    c.stage2.mean_mode = MeanMode::kDecay;
    c.stage2.decay_alpha = 0.75;
    c.stage2.distance = Distance::kCosine;
    c.train.batches_per_epoch = 7;
    c.model.trainable_embedding = false;
    c.min_count = 12;
    const auto back = experiment_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.stage2.decay_alpha == 0.75);
    CHECK(back.train.batches_per_epoch == std::optional<std::size_t>(7));
    CHECK(!back.model.trainable_embedding);
  }

  TEST_CASE("run directory lifecycle") {
    TempDir tmp("run");
    const auto corpus_path = tmp / "corpus.tsv";
    write_tsv(synth_longtail(4, 60, 1.0, 3), corpus_path);
    const auto cfg = run_config(corpus_path);
    const RunPaths a{tmp / "a"}, b{tmp / "b"};
    std::ostringstream progress;
    run_train(cfg, a.dir, progress);
    run_train(cfg, b.dir, progress);
    for (const auto& p : {a.config(), a.log(), a.vocab(), a.stage1()}) CHECK(std::filesystem::exists(p));
    CHECK(read_bytes(a.stage1()) == read_bytes(b.stage1()));
    CHECK(read_bytes(a.vocab()) == read_bytes(b.vocab()));
    CHECK(read_bytes(a.log()) == read_bytes(b.log()));
    CHECK(progress.str().find("stage 1 epoch 2") != std::string::npos);

    const auto stage1 = load_checkpoint(a.stage1());

    SUBCASE("classifier re-training keeps the backbone and reruns bit-identically") {
      StageTwoConfig s2 = cfg.stage2;
      s2.method = Stage2Method::kCrt;
      run_stage2(a.dir, s2, progress);
      run_stage2(b.dir, s2, progress);
      CHECK(read_bytes(a.stage2()) == read_bytes(b.stage2()));
      CHECK(same_backbone(load_checkpoint(a.stage2()), stage1));
      const auto cfg_json = nlohmann::json::parse(read_bytes(a.config()));
      CHECK(cfg_json["stage2_completed"] == true);
      CHECK(cfg_json["stage2"]["method"] == "crt");

      std::size_t stage2_lines = 0, lines = 0;
      std::istringstream log(read_bytes(a.log()));
      std::string line;
      while (std::getline(log, line)) {
        ++lines;
        stage2_lines += nlohmann::json::parse(line)["stage"] == 2;
      }
      CHECK(lines == 4);
      CHECK(stage2_lines == 2);
      // Rerunning stage 2 replaces its records instead of appending.
      run_stage2(a.dir, s2, progress);
      std::istringstream log2(read_bytes(a.log()));
      std::size_t again = 0;
      while (std::getline(log2, line)) ++again;
      CHECK(again == 4);

      const auto outcome = run_eval(a.dir, std::nullopt, std::nullopt);
      CHECK(outcome.classifier == Classifier::kCrt);
      CHECK(std::filesystem::exists(a.eval()));
      const auto baseline = run_eval(a.dir, Classifier::kBaseline, std::nullopt);
      CHECK(baseline.classifier == Classifier::kBaseline);
      CHECK_THROWS_AS(run_eval(a.dir, Classifier::kNcm, std::nullopt), DataError);
      CHECK(format_eval(outcome).find("overall") != std::string::npos);
    }

    SUBCASE("nearest-mean stage writes class statistics") {
      StageTwoConfig s2 = cfg.stage2;
      s2.method = Stage2Method::kNcm;
      s2.mean_mode = MeanMode::kRunning;
      run_stage2(a.dir, s2, progress);
      run_stage2(b.dir, s2, progress);
      CHECK(read_bytes(a.ncm_stats()) == read_bytes(b.ncm_stats()));
      CHECK(read_bytes(a.stage1()) == read_bytes(b.stage1()));
      CHECK(same_backbone(load_checkpoint(a.stage1()), stage1));
      const auto labels = run_eval(a.dir, Classifier::kNcm, BucketLabels{{"QAAA"}, {"QAAB"}, {"QAAD"}});
      CHECK(labels.buckets.much.has_value());
      CHECK(labels.buckets.less.has_value());
      const auto j = nlohmann::json::parse(read_bytes(a.eval()));
      CHECK(j["classifier"] == "ncm");
      CHECK(j.contains("confusion"));
    }

    SUBCASE("edited corpus is detected") {
      std::ofstream(corpus_path, std::ios::app) << "QAAA\tbrand new words appear here\n";
      StageTwoConfig s2 = cfg.stage2;
      CHECK_THROWS_AS(run_stage2(a.dir, s2, progress), HashMismatchError);
    }
  }

  TEST_CASE("grid output is reproducible apart from runtimes") {
    const auto corpus = synth_longtail(3, 40, 1.0, 8);
    GridConfig g;
    g.base = run_config("unused");
    g.base.train.epochs = 1;
    g.base.stage2.epochs = 1;
    g.samplers = {SamplerKind::kIbs, SamplerKind::kPbs};
    g.classifiers = {Classifier::kBaseline, Classifier::kCrt, Classifier::kNcm};
    g.seeds = {4, 5};
    std::ostringstream a, b;
    write_grid_jsonl(run_grid(corpus, g), a);
    g.jobs = 2;
    write_grid_jsonl(run_grid(corpus, g), b);
    CHECK(strip_runtime(a.str()) == strip_runtime(b.str()));
    CHECK(!strip_runtime(a.str()).empty());
  }
}
