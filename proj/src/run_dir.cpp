#include "ltc/run_dir.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ltc/errors.hpp"

namespace ltc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_log(const fs::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

std::vector<json> read_log(const fs::path& path) {
  std::vector<json> records;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(json::parse(line));
  }
  return records;
}

std::string progress_line(const EpochRecord& r) {
  std::ostringstream s;
  s << "stage " << r.stage << " epoch " << r.epoch << "  loss " << std::fixed << std::setprecision(5) << r.mean_loss
    << "  train_acc " << std::setprecision(4) << r.train_accuracy;
  if (r.eval_accuracy) s << "  eval_acc " << *r.eval_accuracy;
  s << "  lr " << std::scientific << std::setprecision(1) << r.lr;
  return s.str();
}

struct LoadedRun {
  json raw;
  ExperimentConfig config;
  PreparedData data;
  Checkpoint stage1;
};

LoadedRun load_run(const RunPaths& paths) {
  LoadedRun run;
  run.raw = read_json(paths.config());
  run.config = experiment_from_json(run.raw);
  run.data = prepare_experiment(load_experiment_corpus(run.config), run.config);
  const Vocabulary saved = Vocabulary::load(paths.vocab());
  if (!(saved == run.data.vocab)) {
    throw HashMismatchError("corpus no longer reproduces the run vocabulary (was the corpus file edited?)");
  }
  CheckpointExpectations expect;
  expect.vocab_hash = saved.hash();
  expect.config_hash = experiment_model(run.config, run.data).architecture_hash();
  run.stage1 = load_checkpoint(paths.stage1(), expect);
  return run;
}

}  // namespace

void run_train(const ExperimentConfig& config_in, const fs::path& dir, std::ostream& progress) {
  ExperimentConfig config = config_in;
  config.propagate_seed();
  if (!config.corpus_path.empty()) config.corpus_path = fs::absolute(config.corpus_path).string();
  const RunPaths paths{dir};
  fs::create_directories(dir);

  std::vector<std::pair<std::string, std::size_t>> dropped;
  const LabeledCorpus corpus = load_experiment_corpus(config, &dropped);
  for (const auto& [label, n] : dropped) {
    progress << "dropped class " << label << " (" << n << " documents < min-count " << config.min_count << ")\n";
  }
  const PreparedData data = prepare_experiment(corpus, config);
  const ModelConfig model = experiment_model(config, data);
  EmbeddingTable embedding = experiment_embedding(config, data);
  if (!config.vectors_path.empty()) progress << "vector coverage " << embedding.coverage << '\n';
  progress << "classes " << data.num_classes() << "  train " << data.train.size() << "  eval " << data.eval.size()
           << "  vocab " << data.vocab.size() << '\n';

  json cfg = to_json(config);
  cfg["stage2_completed"] = false;
  write_json(paths.config(), cfg);
  data.vocab.save(paths.vocab());

  std::vector<json> log;
  const auto result = stage1_train(data, SamplerSpec{config.sampler, config.train.epochs, config.seed}, model,
                                   config.train, std::move(embedding), [&](const EpochRecord& r) {
                                     progress << progress_line(r) << '\n';
                                     log.push_back(to_json(r));
                                   });
  save_checkpoint(result.checkpoint, paths.stage1());
  write_log(paths.log(), log);
  fs::remove(paths.stage2());
  fs::remove(paths.ncm_stats());
  fs::remove(paths.eval());
}

void run_stage2(const fs::path& dir, const StageTwoConfig& stage2_in, std::ostream& progress) {
  const RunPaths paths{dir};
  LoadedRun run = load_run(paths);
  StageTwoConfig stage2 = stage2_in;
  stage2.seed = run.config.seed;
  run.config.stage2 = stage2;

  std::vector<json> log;
  for (auto& r : read_log(paths.log())) {
    if (r.value("stage", 1) == 1) log.push_back(std::move(r));
  }

  fs::remove(paths.stage2());
  fs::remove(paths.ncm_stats());
  fs::remove(paths.eval());
  if (stage2.method == Stage2Method::kCrt) {
    auto crt = crt_stage2(run.stage1, run.data, stage2, [&](const EpochRecord& r) {
      progress << progress_line(r) << '\n';
      log.push_back(to_json(r));
    });
    Checkpoint out = run.stage1;
    out.head = std::move(crt.head);
    save_checkpoint(out, paths.stage2());
  } else {
    MetricFitResult metric;
    const ClassStats stats = ncm_fit(run.stage1, run.data, stage2, &metric);
    std::size_t usable = 0;
    for (std::size_t c = 0; c < stats.num_classes(); ++c) usable += stats.usable(c) ? 1 : 0;
    progress << "ncm: " << usable << " usable class means (" << to_string(stage2.mean_mode) << ", "
             << to_string(stage2.distance) << ")\n";
    json rec = {{"stage", 2}, {"method", "ncm"}, {"usable_classes", usable}};
    if (stage2.distance == Distance::kMahalanobis) {
      rec["metric_log_likelihood"] = metric.log_likelihood;
      progress << "metric log-likelihood " << metric.log_likelihood.front() << " -> " << metric.log_likelihood.back()
               << '\n';
    }
    log.push_back(rec);
    save_class_stats(stats, run.stage1.vocab_hash, paths.ncm_stats());
  }
  json cfg = to_json(run.config);
  cfg["stage2_completed"] = true;
  write_json(paths.config(), cfg);
  write_log(paths.log(), log);
}

EvalOutcome run_eval(const fs::path& dir, std::optional<Classifier> classifier,
                     const std::optional<BucketLabels>& bucket_labels) {
  const RunPaths paths{dir};
  const LoadedRun run = load_run(paths);
  if (!classifier) {
    classifier = Classifier::kBaseline;
    if (run.raw.value("stage2_completed", false)) {
      classifier = run.config.stage2.method == Stage2Method::kCrt ? Classifier::kCrt : Classifier::kNcm;
    }
  }

  EvalOutcome out;
  out.classifier = *classifier;
  out.labels = run.data.labels;
  const auto& extractor = run.stage1.extractor;
  Predictor predict;
  HeadParams head = run.stage1.head;
  std::optional<ClassStats> stats;
  switch (*classifier) {
    case Classifier::kBaseline:
      break;
    case Classifier::kCrt: {
      CheckpointExpectations expect{run.stage1.vocab_hash, run.stage1.config_hash};
      const Checkpoint s2 = load_checkpoint(paths.stage2(), expect);
      if (extractor_tensors(s2.extractor).size() != extractor_tensors(extractor).size()) {
        throw DataError("stage-2 checkpoint backbone differs from stage 1");
      }
      head = s2.head;
      break;
    }
    case Classifier::kNcm:
      stats = load_class_stats(paths.ncm_stats(), run.stage1.vocab_hash);
      break;
  }
  if (stats) {
    predict = [&](const EncodedDoc& d) { return ncm_predict(*stats, extract_features(extractor, d)); };
  } else {
    predict = [&](const EncodedDoc& d) { return argmax(logits(head, extract_features(extractor, d))); };
  }
  out.report = evaluate(predict, run.data.eval, run.data.num_classes());
  const BucketSpec buckets = bucket_labels ? explicit_buckets(run.data.labels, bucket_labels->much,
                                                              bucket_labels->medium, bucket_labels->less)
                                           : tercile_buckets(run.data.train_counts);
  out.buckets = bucket_report(out.report, buckets);

  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  json per_class = json::object();
  for (std::size_t c = 0; c < out.labels.size(); ++c) {
    const double acc = out.report.per_class_accuracy[c];
    per_class[out.labels[c]] = std::isnan(acc) ? json(nullptr) : json(acc);
  }
  write_json(paths.eval(), {{"classifier", std::string(to_string(out.classifier))},
                            {"overall", out.report.overall_accuracy},
                            {"n_eval", out.report.n_eval},
                            {"much", opt(out.buckets.much)},
                            {"medium", opt(out.buckets.medium)},
                            {"less", opt(out.buckets.less)},
                            {"per_class", per_class},
                            {"confusion", out.report.confusion}});
  return out;
}

std::string format_eval(const EvalOutcome& o) {
  std::ostringstream s;
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string("-");
    std::ostringstream t;
    t << std::fixed << std::setprecision(4) << *v;
    return t.str();
  };
  s << "classifier " << to_string(o.classifier) << "  n_eval " << o.report.n_eval << "\n";
  s << "overall " << fmt(o.report.overall_accuracy) << "  much " << fmt(o.buckets.much) << "  medium "
    << fmt(o.buckets.medium) << "  less " << fmt(o.buckets.less) << "\n";
  for (std::size_t c = 0; c < o.labels.size(); ++c) {
    const double acc = o.report.per_class_accuracy[c];
    s << "  " << std::left << std::setw(12) << o.labels[c] << std::right << std::setw(6)
      << o.report.per_class_count[c] << "  " << (std::isnan(acc) ? std::string("-") : fmt(acc)) << '\n';
  }
  return s.str();
}

}  // namespace ltc
