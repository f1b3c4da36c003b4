// Command-line front end: gen-corpus, preprocess, train, stage2, eval, grid.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ltc/errors.hpp"
#include "ltc/grid.hpp"
#include "ltc/run_dir.hpp"

namespace {

using namespace ltc;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "much:A,B;medium:C;less:D"
BucketLabels parse_bucket_labels(const std::string& spec) {
  BucketLabels b;
  for (const auto& part : split_list(spec, ';')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ArgumentError("bucket spec '" + part + "' lacks ':'");
    const std::string name = part.substr(0, colon);
    auto labels = split_list(part.substr(colon + 1), ',');
    if (name == "much") b.much = std::move(labels);
    else if (name == "medium") b.medium = std::move(labels);
    else if (name == "less") b.less = std::move(labels);
    else throw ArgumentError("unknown bucket '" + name + "'");
  }
  return b;
}

struct StringOpts {
  std::string sampler = "ibs";
  std::string method = "crt";
  std::string mean_mode = "batch";
  std::string distance = "euclidean";
  std::size_t batches_per_epoch = 0;
  std::size_t stage2_batches_per_epoch = 0;
  bool freeze_embedding = false;
};

void add_data_options(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--corpus", c.corpus_path, "TSV corpus (label<TAB>text)")->required()->check(CLI::ExistingFile);
  app->add_option("--min-count", c.min_count,
                  "Drop classes with fewer documents (0 disables; 1000 is the production cleaning rule)")
      ->capture_default_str();
  app->add_option("--eval-fraction", c.eval_fraction, "Stratified eval share per class")->capture_default_str();
  app->add_option("--stopwords-zh", c.stopwords_zh, "Chinese stopword file")->check(CLI::ExistingFile);
  app->add_option("--stopwords-en", c.stopwords_en, "English stopword file")->check(CLI::ExistingFile);
  app->add_option("--min-freq", c.preprocess.min_freq, "Vocabulary frequency threshold")->capture_default_str();
  app->add_option("--max-len", c.preprocess.max_len, "Encoded sequence length")->capture_default_str();
  app->add_option("--seed", c.seed, "Seed for split, initialization and sampling")->capture_default_str();
}

void add_model_options(CLI::App* app, ExperimentConfig& c, StringOpts& s) {
  app->add_option("--vectors", c.vectors_path, "Word vectors, one 'token v1 .. vE' per line")
      ->check(CLI::ExistingFile);
  app->add_option("--embed-dim", c.model.embed_dim)->capture_default_str();
  app->add_option("--filters", c.model.num_filters, "Filters per width")->capture_default_str();
  app->add_option("--filter-widths", c.model.filter_widths)->delimiter(',')->capture_default_str();
  app->add_option("--feature-dim", c.model.feature_dim)->capture_default_str();
  app->add_flag("--freeze-embedding", s.freeze_embedding, "Keep word vectors fixed during stage 1");
  app->add_option("--sampler", s.sampler, "Stage-1 sampler")
      ->check(CLI::IsMember({"ibs", "cbs", "srs", "pbs"}))
      ->capture_default_str();
  app->add_option("--epochs", c.train.epochs)->capture_default_str();
  app->add_option("--batch-size", c.train.batch_size)->capture_default_str();
  app->add_option("--batches-per-epoch", s.batches_per_epoch, "0: ceil(N / batch size)")->capture_default_str();
  app->add_option("--lr", c.train.lr.base)->capture_default_str();
  app->add_option("--lr-decay-after", c.train.lr.decay_after, "Epochs at the base rate")->capture_default_str();
  app->add_option("--lr-decay-factor", c.train.lr.decay_factor)->capture_default_str();
}

void add_stage2_options(CLI::App* app, StageTwoConfig& c, StringOpts& s, bool with_method) {
  if (with_method) {
    app->add_option("--method", s.method)->check(CLI::IsMember({"crt", "ncm"}))->capture_default_str();
  }
  app->add_option("--stage2-epochs", c.epochs)->capture_default_str();
  app->add_option("--stage2-batch-size", c.batch_size)->capture_default_str();
  app->add_option("--stage2-batches-per-epoch", s.stage2_batches_per_epoch)->capture_default_str();
  app->add_option("--stage2-lr", c.lr.base)->capture_default_str();
  app->add_option("--head-init-scale", c.head_init_scale)->capture_default_str();
  app->add_option("--mean-mode", s.mean_mode)->check(CLI::IsMember({"batch", "running", "decay"}))->capture_default_str();
  app->add_option("--decay-alpha", c.decay_alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--distance", s.distance)
      ->check(CLI::IsMember({"euclidean", "mahalanobis", "cosine"}))
      ->capture_default_str();
  app->add_option("--metric-dim", c.metric_dim, "0: feature dimension")->capture_default_str();
  app->add_option("--metric-epochs", c.metric.epochs)->capture_default_str();
}

void apply(ExperimentConfig& c, const StringOpts& s) {
  c.sampler = parse_sampler(s.sampler);
  c.model.trainable_embedding = !s.freeze_embedding;
  if (s.batches_per_epoch > 0) c.train.batches_per_epoch = s.batches_per_epoch;
  c.stage2.method = parse_stage2_method(s.method);
  c.stage2.mean_mode = parse_mean_mode(s.mean_mode);
  c.stage2.distance = parse_distance(s.distance);
  if (s.stage2_batches_per_epoch > 0) c.stage2.batches_per_epoch = s.stage2_batches_per_epoch;
  c.propagate_seed();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled two-stage training for long-tailed text classification"};
  app.set_config("--config", "", "TOML/INI file of flag values in [<command>] sections; command-line flags win");
  app.fallthrough();
  app.require_subcommand(1);

  // gen-corpus
  std::size_t n_classes = 20, head_count = 2000;
  double zipf = 1.25;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic long-tailed corpus");
  gen->add_option("--classes", n_classes)->capture_default_str();
  gen->add_option("--head-count", head_count)->capture_default_str();
  gen->add_option("--zipf", zipf, "Zipf exponent of class sizes")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out)->required();

  // preprocess
  ExperimentConfig pre_cfg;
  std::string vocab_out, tokens_out;
  auto* pre = app.add_subcommand("preprocess", "Clean, segment and build the vocabulary of a corpus");
  add_data_options(pre, pre_cfg);
  pre->add_option("--vocab-out", vocab_out, "Write id<TAB>token lines")->required();
  pre->add_option("--tokens-out", tokens_out, "Write label<TAB>space-joined tokens of the training split");

  // train
  ExperimentConfig train_cfg;
  StringOpts train_str;
  std::string train_dir;
  auto* train = app.add_subcommand("train", "Stage 1: feature learning under a sampler");
  add_data_options(train, train_cfg);
  add_model_options(train, train_cfg, train_str);
  train->add_option("--run-dir", train_dir, "Output run directory")->required();

  // stage2
  StageTwoConfig s2_cfg;
  StringOpts s2_str;
  std::string s2_dir;
  auto* stage2 = app.add_subcommand("stage2", "Stage 2: CRT or NCM over the frozen backbone");
  stage2->add_option("--run-dir", s2_dir)->required()->check(CLI::ExistingDirectory);
  add_stage2_options(stage2, s2_cfg, s2_str, true);

  // eval
  std::string eval_dir, eval_classifier, eval_buckets;
  auto* eval = app.add_subcommand("eval", "Evaluate a run with much/medium/less buckets");
  eval->add_option("--run-dir", eval_dir)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--classifier", eval_classifier, "baseline|crt|ncm (default: latest stage)")
      ->check(CLI::IsMember({"baseline", "crt", "ncm"}));
  eval->add_option("--bucket-labels", eval_buckets, "Explicit buckets, e.g. 'much:MXLC;medium:OBCN;less:PICN'");

  // grid
  ExperimentConfig grid_cfg;
  StringOpts grid_str;
  std::string grid_out, grid_buckets;
  std::vector<std::string> grid_samplers{"ibs", "cbs", "srs", "pbs"}, grid_classifiers{"crt", "ncm"};
  std::vector<std::uint64_t> grid_seeds{0};
  std::size_t jobs = 1;
  auto* grid = app.add_subcommand("grid", "Sampler x classifier experiment grid");
  add_data_options(grid, grid_cfg);
  add_model_options(grid, grid_cfg, grid_str);
  add_stage2_options(grid, grid_cfg.stage2, grid_str, false);
  grid->add_option("--samplers", grid_samplers)->delimiter(',')->capture_default_str();
  grid->add_option("--classifiers", grid_classifiers)->delimiter(',')->capture_default_str();
  grid->add_option("--seeds", grid_seeds)->delimiter(',')->capture_default_str();
  grid->add_option("--jobs", jobs, "Concurrent (sampler, seed) units")->capture_default_str();
  grid->add_option("--bucket-labels", grid_buckets, "Explicit buckets, e.g. 'much:A;medium:B;less:C'");
  grid->add_option("--out-dir", grid_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      write_tsv(synth_longtail(n_classes, head_count, zipf, gen_seed), std::filesystem::path(gen_out));
      const auto counts = longtail_counts(n_classes, head_count, zipf);
      std::cout << "wrote " << gen_out << " (" << n_classes << " classes, imbalance " << counts.front() << ":"
                << counts.back() << ")\n";
    } else if (*pre) {
      pre_cfg.propagate_seed();
      std::vector<std::pair<std::string, std::size_t>> dropped;
      const auto corpus = load_experiment_corpus(pre_cfg, &dropped);
      for (const auto& [label, n] : dropped) std::cout << "dropped class " << label << " (" << n << ")\n";
      const auto data = prepare_experiment(corpus, pre_cfg);
      data.vocab.save(std::filesystem::path(vocab_out));
      if (!tokens_out.empty()) {
        std::ofstream out(tokens_out, std::ios::binary);
        for (const auto& d : data.train) {
          out << data.labels[d.label] << '\t';
          const auto tokens = decode(d.ids, data.vocab);
          for (std::size_t i = 0; i < tokens.size(); ++i) out << (i ? " " : "") << tokens[i];
          out << '\n';
        }
      }
      std::cout << "vocabulary " << data.vocab.size() << " entries -> " << vocab_out << '\n';
    } else if (*train) {
      apply(train_cfg, train_str);
      run_train(train_cfg, train_dir, std::cout);
    } else if (*stage2) {
      ExperimentConfig tmp;
      tmp.stage2 = s2_cfg;
      apply(tmp, s2_str);
      run_stage2(s2_dir, tmp.stage2, std::cout);
    } else if (*eval) {
      std::optional<Classifier> which;
      if (!eval_classifier.empty()) which = parse_classifier(eval_classifier);
      std::optional<BucketLabels> buckets;
      if (!eval_buckets.empty()) buckets = parse_bucket_labels(eval_buckets);
      std::cout << format_eval(run_eval(eval_dir, which, buckets));
    } else if (*grid) {
      apply(grid_cfg, grid_str);
      GridConfig g;
      g.base = grid_cfg;
      for (const auto& s : grid_samplers) g.samplers.push_back(parse_sampler(s));
      for (const auto& c : grid_classifiers) g.classifiers.push_back(parse_classifier(c));
      g.seeds = grid_seeds;
      g.jobs = jobs;
      if (!grid_buckets.empty()) g.bucket_labels = parse_bucket_labels(grid_buckets);
      const auto corpus = load_experiment_corpus(grid_cfg);
      const auto result = run_grid(corpus, g);
      std::filesystem::create_directories(grid_out);
      const std::filesystem::path dir(grid_out);
      {
        std::ofstream out(dir / "grid_results.jsonl", std::ios::binary);
        write_grid_jsonl(result, out);
      }
      const std::string tables = format_accuracy_table(result) + "\n" + format_bucket_table(result);
      std::ofstream(dir / "grid_tables.txt", std::ios::binary) << tables;
      std::cout << tables;
      for (const auto& c : result.cells) {
        if (c.error) std::cerr << "cell " << to_string(c.sampler) << "+" << to_string(c.classifier) << " seed " << c.seed
                               << " failed: " << *c.error << '\n';
      }
    }
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
