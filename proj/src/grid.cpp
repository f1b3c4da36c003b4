#include "ltc/grid.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <algorithm>
#include <ostream>
#include <sstream>
#include <thread>

#include "ltc/errors.hpp"

namespace ltc {

using nlohmann::json;

std::string_view to_string(Classifier c) {
  switch (c) {
    case Classifier::kBaseline: return "baseline";
    case Classifier::kCrt: return "crt";
    case Classifier::kNcm: return "ncm";
  }
  return "?";
}

Classifier parse_classifier(std::string_view s) {
  if (s == "baseline") return Classifier::kBaseline;
  if (s == "crt") return Classifier::kCrt;
  if (s == "ncm") return Classifier::kNcm;
  throw ArgumentError("unknown classifier '" + std::string(s) + "' (expected baseline|crt|ncm)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<GridCell> run_unit(const LabeledCorpus& corpus, const GridConfig& config, SamplerKind sampler,
                               std::uint64_t seed) {
  std::vector<GridCell> cells;
  for (auto c : config.classifiers) cells.push_back(GridCell{sampler, c, seed, 0.0, {}, 0.0, std::nullopt});

  ExperimentConfig ec = config.base;
  ec.seed = seed;
  ec.sampler = sampler;
  ec.propagate_seed();

  const auto t0 = Clock::now();
  std::optional<PreparedData> data;
  std::optional<StageOneResult> stage1;
  try {
    data = prepare_experiment(corpus, ec);
    stage1 = stage1_train(*data, SamplerSpec{sampler, ec.train.epochs, seed}, experiment_model(ec, *data), ec.train,
                          experiment_embedding(ec, *data));
  } catch (const std::exception& e) {
    for (auto& cell : cells) cell.error = std::string("stage 1: ") + e.what();
    return cells;
  }
  const double stage1_seconds = seconds_since(t0);

  const BucketSpec buckets =
      config.bucket_labels
          ? explicit_buckets(data->labels, config.bucket_labels->much, config.bucket_labels->medium,
                             config.bucket_labels->less)
          : tercile_buckets(data->train_counts);
  const auto& ckpt = stage1->checkpoint;
  const Matrix eval_features = extract_all(ckpt.extractor, data->eval);
  const auto truth = data->eval_labels();

  for (auto& cell : cells) {
    const auto t1 = Clock::now();
    try {
      std::vector<std::size_t> predicted(truth.size());
      switch (cell.classifier) {
        case Classifier::kBaseline:
          for (std::size_t i = 0; i < truth.size(); ++i) predicted[i] = argmax(logits(ckpt.head, eval_features.row(i)));
          break;
        case Classifier::kCrt: {
          StageTwoConfig s2 = ec.stage2;
          s2.method = Stage2Method::kCrt;
          const auto crt = crt_stage2(ckpt, *data, s2);
          for (std::size_t i = 0; i < truth.size(); ++i) predicted[i] = argmax(logits(crt.head, eval_features.row(i)));
          break;
        }
        case Classifier::kNcm: {
          StageTwoConfig s2 = ec.stage2;
          s2.method = Stage2Method::kNcm;
          const auto stats = ncm_fit(ckpt, *data, s2);
          for (std::size_t i = 0; i < truth.size(); ++i) predicted[i] = ncm_predict(stats, eval_features.row(i));
          break;
        }
      }
      const EvalReport report = evaluate_predictions(truth, predicted, data->num_classes());
      cell.overall = report.overall_accuracy;
      cell.buckets = bucket_report(report, buckets);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.runtime_seconds = stage1_seconds + seconds_since(t1);
  }
  return cells;
}

std::string fmt(std::optional<double> v) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

std::vector<SamplerKind> samplers_of(const GridResult& r) {
  std::vector<SamplerKind> out;
  for (const auto& c : r.cells) {
    if (std::find(out.begin(), out.end(), c.sampler) == out.end()) out.push_back(c.sampler);
  }
  return out;
}

std::vector<Classifier> classifiers_of(const GridResult& r) {
  std::vector<Classifier> out;
  for (const auto& c : r.cells) {
    if (std::find(out.begin(), out.end(), c.classifier) == out.end()) out.push_back(c.classifier);
  }
  return out;
}

template <typename Get>
std::optional<double> mean_over_seeds(const GridResult& r, SamplerKind s, Classifier c, Get get) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& cell : r.cells) {
    if (cell.sampler != s || cell.classifier != c || cell.error) continue;
    if (auto v = get(cell)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

GridResult run_grid(const LabeledCorpus& corpus, const GridConfig& config) {
  if (config.samplers.empty() || config.classifiers.empty() || config.seeds.empty()) {
    throw ArgumentError("grid needs at least one sampler, classifier and seed");
  }
  struct Unit {
    SamplerKind sampler;
    std::uint64_t seed;
  };
  std::vector<Unit> units;
  for (auto s : config.samplers) {
    for (auto seed : config.seeds) units.push_back({s, seed});
  }
  std::vector<std::vector<GridCell>> outputs(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      outputs[i] = run_unit(corpus, config, units[i].sampler, units[i].seed);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, units.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  GridResult result;
  for (auto& o : outputs) result.cells.insert(result.cells.end(), o.begin(), o.end());
  return result;
}

std::string format_accuracy_table(const GridResult& r) {
  const auto samplers = samplers_of(r);
  const auto classifiers = classifiers_of(r);
  std::ostringstream out;
  out << std::left << std::setw(10) << "sampler";
  for (auto c : classifiers) out << std::setw(12) << to_string(c);
  out << "per-seed\n";
  for (auto s : samplers) {
    out << std::setw(10) << to_string(s);
    std::string per_seed;
    for (auto c : classifiers) {
      out << std::setw(12) << fmt(mean_over_seeds(r, s, c, [](const GridCell& g) -> std::optional<double> {
        return g.overall;
      }));
      per_seed += std::string(per_seed.empty() ? "" : "  ") + std::string(to_string(c)) + ":";
      for (const auto& cell : r.cells) {
        if (cell.sampler == s && cell.classifier == c) {
          per_seed += " " + (cell.error ? std::string("ERR") : fmt(cell.overall));
        }
      }
    }
    out << per_seed << '\n';
  }
  return out.str();
}

std::string format_bucket_table(const GridResult& r) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "method" << std::setw(10) << "much" << std::setw(10) << "medium"
      << std::setw(10) << "less" << '\n';
  for (auto s : samplers_of(r)) {
    for (auto c : classifiers_of(r)) {
      const std::string name = std::string(to_string(s)) + "+" + std::string(to_string(c));
      out << std::setw(20) << name
          << std::setw(10) << fmt(mean_over_seeds(r, s, c, [](const GridCell& g) { return g.buckets.much; }))
          << std::setw(10) << fmt(mean_over_seeds(r, s, c, [](const GridCell& g) { return g.buckets.medium; }))
          << std::setw(10) << fmt(mean_over_seeds(r, s, c, [](const GridCell& g) { return g.buckets.less; }))
          << '\n';
    }
  }
  return out.str();
}

void write_grid_jsonl(const GridResult& r, std::ostream& out) {
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  for (const auto& c : r.cells) {
    json j = {{"sampler", std::string(to_string(c.sampler))},
              {"classifier", std::string(to_string(c.classifier))},
              {"seed", c.seed},
              {"overall", c.error ? json(nullptr) : json(c.overall)},
              {"much", opt(c.buckets.much)},
              {"medium", opt(c.buckets.medium)},
              {"less", opt(c.buckets.less)},
              {"runtime_seconds", c.runtime_seconds}};
    if (c.error) j["error"] = *c.error;
    out << j.dump() << '\n';
  }
}

}  // namespace ltc
