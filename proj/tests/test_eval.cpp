#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ltc/corpus.hpp"
#include "ltc/errors.hpp"
#include "ltc/evaluate.hpp"
#include "ltc/grid.hpp"
#include "ltc/stage_one.hpp"
#include "ltc/stage_two.hpp"

using namespace ltc;

namespace {

std::vector<EncodedDoc> docs_with_labels(const std::vector<std::size_t>& labels) {
  std::vector<EncodedDoc> docs;
  for (std::size_t i = 0; i < labels.size(); ++i) docs.push_back({{static_cast<TokenId>(i)}, labels[i]});
  return docs;
}

ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.preprocess = {1, 12};
  c.model.embed_dim = 6;
  c.model.num_filters = 3;
  c.model.feature_dim = 6;
  c.model.max_len = 12;
  c.train.epochs = 2;
  c.train.batch_size = 16;
  c.train.lr.base = 5e-3;
  c.stage2.epochs = 2;
  c.stage2.batch_size = 16;
  c.stage2.lr.base = 5e-3;
  return c;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("perfect and constant predictors") {
    const auto docs = docs_with_labels({0, 1, 0, 1, 2, 2});
    const auto perfect = evaluate([&](const EncodedDoc& d) { return d.label; }, docs, 3);
    CHECK(perfect.overall_accuracy == 1.0);
    CHECK(perfect.n_eval == 6);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(perfect.confusion[i][j] == (i == j ? 2u : 0u));
    }
    const auto balanced = docs_with_labels({0, 1, 0, 1});
    const auto constant = evaluate([](const EncodedDoc&) { return std::size_t{1}; }, balanced, 2);
    CHECK(constant.overall_accuracy == 0.5);
    CHECK(constant.per_class_accuracy == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("hand-built ten-document confusion") {
    // truth:     0 0 0 0 1 1 1 2 2 2
    // predicted: 0 0 1 2 1 1 0 2 2 2
    const std::vector<std::size_t> truth{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    const std::vector<std::size_t> pred{0, 0, 1, 2, 1, 1, 0, 2, 2, 2};
    const auto r = evaluate_predictions(truth, pred, 4);
    CHECK(r.n_eval == 10);
    CHECK(r.overall_accuracy == doctest::Approx(0.7));
    CHECK(r.per_class_accuracy[0] == doctest::Approx(0.5));
    CHECK(r.per_class_accuracy[1] == doctest::Approx(2.0 / 3.0));
    CHECK(r.per_class_accuracy[2] == doctest::Approx(1.0));
    CHECK(std::isnan(r.per_class_accuracy[3]));
    CHECK(r.per_class_count == std::vector<std::size_t>{4, 3, 3, 0});
    CHECK(r.confusion[0] == std::vector<std::size_t>{2, 1, 1, 0});
    CHECK(r.confusion[1] == std::vector<std::size_t>{1, 2, 0, 0});
    CHECK(r.confusion[2] == std::vector<std::size_t>{0, 0, 3, 0});
  }

  TEST_CASE("report invariants on random predictions") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t S = 2 + gen() % 6, n = 1 + gen() % 200;
      std::vector<std::size_t> truth(n), pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = gen() % S;
        pred[i] = gen() % S;
      }
      const auto r = evaluate_predictions(truth, pred, S);
      std::size_t trace = 0;
      for (std::size_t c = 0; c < S; ++c) {
        std::size_t row = 0;
        for (auto v : r.confusion[c]) row += v;
        CHECK(row == r.per_class_count[c]);
        trace += r.confusion[c][c];
      }
      CHECK(r.overall_accuracy == doctest::Approx(static_cast<double>(trace) / static_cast<double>(n)));

      // Permuting document order changes nothing.
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), gen);
      std::vector<std::size_t> t2(n), p2(n);
      for (std::size_t i = 0; i < n; ++i) {
        t2[i] = truth[order[i]];
        p2[i] = pred[order[i]];
      }
      const auto r2 = evaluate_predictions(t2, p2, S);
      CHECK(r2.confusion == r.confusion);
      CHECK(r2.overall_accuracy == r.overall_accuracy);
    }
  }

  TEST_CASE("out-of-range prediction is a contract violation") {
    const auto docs = docs_with_labels({0, 1});
    CHECK_THROWS_AS(evaluate([](const EncodedDoc&) { return std::size_t{5}; }, docs, 2), ContractViolation);
  }

  TEST_CASE("bucket accuracy is an unweighted class mean") {
    EvalReport r;
    r.per_class_accuracy = {1.0, 0.0};
    r.per_class_count = {100, 1};
    BucketSpec one{{Bucket::kMuch, Bucket::kMuch}};
    const auto b = bucket_report(r, one);
    CHECK(*b.much == 0.5);
    CHECK(!b.medium.has_value());
    CHECK(!b.less.has_value());
  }

  TEST_CASE("terciles follow training counts") {
    const auto counts = longtail_counts(9, 900, 1.0);
    auto shuffled = counts;
    std::reverse(shuffled.begin(), shuffled.end());  // class 0 is now the smallest
    const auto spec = tercile_buckets(shuffled);
    for (std::size_t c = 0; c < 9; ++c) {
      const Bucket want = c >= 6 ? Bucket::kMuch : c >= 3 ? Bucket::kMedium : Bucket::kLess;
      CHECK(spec.assignment[c] == want);
    }
    CHECK(tercile_buckets(std::vector<std::size_t>{5, 5, 5}).assignment ==
          std::vector<Bucket>{Bucket::kMuch, Bucket::kMedium, Bucket::kLess});
    const auto two = tercile_buckets(std::vector<std::size_t>{9, 1});
    CHECK(two.assignment == std::vector<Bucket>{Bucket::kMuch, Bucket::kMedium});
  }

  TEST_CASE("head bucket holds the largest generated classes") {
    const auto corpus = synth_longtail(20, 2000, 1.25, 4);
    const auto spec = tercile_buckets(corpus.class_counts());
    std::size_t min_much = SIZE_MAX, max_rest = 0;
    for (std::size_t c = 0; c < 20; ++c) {
      if (spec.assignment[c] == Bucket::kMuch) min_much = std::min(min_much, corpus.class_counts()[c]);
      else max_rest = std::max(max_rest, corpus.class_counts()[c]);
    }
    CHECK(min_much > max_rest);
    std::size_t head_ranks = 0;
    for (std::size_t r = 0; r < 20; ++r) head_ranks += (3 * r) / 20 == 0;
    CHECK(std::count(spec.assignment.begin(), spec.assignment.end(), Bucket::kMuch) == static_cast<long>(head_ranks));
  }

  TEST_CASE("explicit buckets and relabel invariance") {
    const std::vector<std::string> labels{"MXLC", "OBCN", "PICN", "OTHER"};
    const auto spec = explicit_buckets(labels, {"MXLC"}, {"OBCN"}, {"PICN"});
    CHECK(spec.assignment == std::vector<Bucket>{Bucket::kMuch, Bucket::kMedium, Bucket::kLess, Bucket::kNone});
    CHECK_THROWS_AS(explicit_buckets(labels, {"NOPE"}, {}, {}), ArgumentError);
    CHECK_THROWS_AS(explicit_buckets(labels, {"MXLC"}, {"MXLC"}, {}), ArgumentError);

    const std::vector<std::size_t> truth{0, 0, 1, 1, 2, 3, 3};
    const std::vector<std::size_t> pred{0, 1, 1, 1, 0, 3, 2};
    const auto base = bucket_report(evaluate_predictions(truth, pred, 4), spec);

    // Same data with class ids permuted; membership follows label strings.
    const std::vector<std::size_t> perm{2, 3, 0, 1};  // old id -> new id
    std::vector<std::string> relabeled(4);
    for (std::size_t c = 0; c < 4; ++c) relabeled[perm[c]] = labels[c];
    std::vector<std::size_t> t2, p2;
    for (auto t : truth) t2.push_back(perm[t]);
    for (auto p : pred) p2.push_back(perm[p]);
    const auto spec2 = explicit_buckets(relabeled, {"MXLC"}, {"OBCN"}, {"PICN"});
    const auto moved = bucket_report(evaluate_predictions(t2, p2, 4), spec2);
    CHECK(*moved.much == *base.much);
    CHECK(*moved.medium == *base.medium);
    CHECK(*moved.less == *base.less);
    CHECK(*base.much == 0.5);
    CHECK(*base.medium == 1.0);
    CHECK(*base.less == 0.0);
  }

  TEST_CASE("one-cell grid matches a direct run") {
    const auto corpus = synth_longtail(4, 60, 1.0, 6);
    GridConfig g;
    g.base = tiny_experiment();
    g.samplers = {SamplerKind::kCbs};
    g.classifiers = {Classifier::kCrt};
    g.seeds = {5};
    const auto grid = run_grid(corpus, g);
    REQUIRE(grid.cells.size() == 1);
    REQUIRE(!grid.cells[0].error);

    ExperimentConfig ec = g.base;
    ec.seed = 5;
    ec.sampler = SamplerKind::kCbs;
    ec.propagate_seed();
    const auto data = prepare_experiment(corpus, ec);
    const auto s1 = stage1_train(data, {SamplerKind::kCbs, ec.train.epochs, 5}, experiment_model(ec, data), ec.train,
                                 experiment_embedding(ec, data));
    const auto crt = crt_stage2(s1.checkpoint, data, ec.stage2);
    const auto report = evaluate(
        [&](const EncodedDoc& d) { return argmax(logits(crt.head, extract_features(s1.checkpoint.extractor, d))); },
        data.eval, data.num_classes());
    const auto buckets = bucket_report(report, tercile_buckets(data.train_counts));
    CHECK(grid.cells[0].overall == report.overall_accuracy);
    CHECK(grid.cells[0].buckets.much == buckets.much);
    CHECK(grid.cells[0].buckets.less == buckets.less);
  }

  TEST_CASE("full strategy grid shape, seeds and reproducibility") {
    const auto corpus = synth_longtail(3, 40, 1.0, 2);
    GridConfig g;
    g.base = tiny_experiment();
    g.base.train.epochs = 1;
    g.base.stage2.epochs = 1;
    g.samplers = {SamplerKind::kIbs, SamplerKind::kCbs, SamplerKind::kSrs, SamplerKind::kPbs};
    g.classifiers = {Classifier::kCrt, Classifier::kNcm};
    g.seeds = {1, 2};
    const auto a = run_grid(corpus, g);
    CHECK(a.cells.size() == 16);
    for (const auto& c : a.cells) CHECK(!c.error);

    g.jobs = 3;
    const auto b = run_grid(corpus, g);
    REQUIRE(b.cells.size() == a.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      CHECK(a.cells[i].sampler == b.cells[i].sampler);
      CHECK(a.cells[i].classifier == b.cells[i].classifier);
      CHECK(a.cells[i].seed == b.cells[i].seed);
      CHECK(a.cells[i].overall == b.cells[i].overall);
      CHECK(a.cells[i].buckets.less == b.cells[i].buckets.less);
    }

    const auto table = format_accuracy_table(a);
    for (const char* name : {"ibs", "cbs", "srs", "pbs", "crt", "ncm"}) CHECK(table.find(name) != std::string::npos);
    const auto buckets = format_bucket_table(a);
    CHECK(buckets.find("much") != std::string::npos);
    CHECK(buckets.find("pbs") != std::string::npos);

    std::ostringstream out;
    write_grid_jsonl(a, out);
    std::istringstream lines(out.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      for (const char* key : {"sampler", "classifier", "seed", "overall", "much", "medium", "less", "runtime_seconds"}) {
        CHECK(j.contains(key));
      }
      ++n;
    }
    CHECK(n == 16);
  }

  TEST_CASE("two seeds report the mean and each seed") {
    const auto corpus = synth_longtail(3, 40, 1.0, 2);
    GridConfig g;
    g.base = tiny_experiment();
    g.base.train.epochs = 1;
    g.samplers = {SamplerKind::kIbs};
    g.classifiers = {Classifier::kNcm};
    g.seeds = {1, 2};
    const auto r = run_grid(corpus, g);
    REQUIRE(r.cells.size() == 2);
    const double mean = (r.cells[0].overall + r.cells[1].overall) / 2;
    std::ostringstream m;
    m.precision(4);
    m << std::fixed << mean;
    const auto table = format_accuracy_table(r);
    CHECK(table.find(m.str()) != std::string::npos);
    for (const auto& c : r.cells) {
      std::ostringstream s;
      s.precision(4);
      s << std::fixed << c.overall;
      CHECK(table.find(s.str()) != std::string::npos);
    }
  }

  TEST_CASE("failing cells are recorded and the grid continues") {
    const auto corpus = synth_longtail(3, 40, 1.0, 2);
    GridConfig g;
    g.base = tiny_experiment();
    g.base.train.epochs = 1;
    g.base.stage2.distance = Distance::kMahalanobis;
    g.base.stage2.metric_dim = 99;  // larger than the feature dimension
    g.samplers = {SamplerKind::kIbs};
    g.classifiers = {Classifier::kNcm, Classifier::kBaseline};
    g.seeds = {1};
    const auto r = run_grid(corpus, g);
    REQUIRE(r.cells.size() == 2);
    CHECK(r.cells[0].error.has_value());
    CHECK(!r.cells[1].error.has_value());
    std::ostringstream out;
    write_grid_jsonl(r, out);
    CHECK(out.str().find("\"error\"") != std::string::npos);
  }
}
