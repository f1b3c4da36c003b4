#include "ltc/stage_two.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ltc/errors.hpp"
#include "ltc/rng.hpp"
#include "ltc/tensor_io.hpp"

namespace ltc {

std::string_view to_string(Stage2Method m) { return m == Stage2Method::kCrt ? "crt" : "ncm"; }

std::string_view to_string(MeanMode m) {
  switch (m) {
    case MeanMode::kBatch: return "batch";
    case MeanMode::kRunning: return "running";
    case MeanMode::kDecay: return "decay";
  }
  return "?";
}

std::string_view to_string(Distance d) {
  switch (d) {
    case Distance::kEuclidean: return "euclidean";
    case Distance::kMahalanobis: return "mahalanobis";
    case Distance::kCosine: return "cosine";
  }
  return "?";
}

Stage2Method parse_stage2_method(std::string_view s) {
  if (s == "crt") return Stage2Method::kCrt;
  if (s == "ncm") return Stage2Method::kNcm;
  throw ArgumentError("unknown stage-2 method '" + std::string(s) + "' (expected crt|ncm)");
}

MeanMode parse_mean_mode(std::string_view s) {
  if (s == "batch") return MeanMode::kBatch;
  if (s == "running") return MeanMode::kRunning;
  if (s == "decay") return MeanMode::kDecay;
  throw ArgumentError("unknown mean mode '" + std::string(s) + "' (expected batch|running|decay)");
}

Distance parse_distance(std::string_view s) {
  if (s == "euclidean") return Distance::kEuclidean;
  if (s == "mahalanobis") return Distance::kMahalanobis;
  if (s == "cosine") return Distance::kCosine;
  throw ArgumentError("unknown distance '" + std::string(s) + "' (expected euclidean|mahalanobis|cosine)");
}

CrtResult crt_stage2(const Checkpoint& stage1, const PreparedData& data, const StageTwoConfig& config,
                     const EpochCallback& on_epoch) {
  if (config.epochs < 1) throw ArgumentError("epochs must be at least 1");
  const ExtractorParams& extractor = stage1.extractor;
  const Matrix train_features = extract_all(extractor, data.train);
  const Matrix eval_features = extract_all(extractor, data.eval);
  const auto labels = data.train_labels();
  const auto eval_labels = data.eval_labels();

  CrtResult result;
  result.head = init_head(data.num_classes(), extractor.feature_dim(), config.head_init_scale, config.seed);
  OptimizerState opt;
  opt.adam = config.adam;
  opt.schedule = config.lr;

  const ClassIndex index(labels, data.num_classes(), config.seed);
  const SamplerSpec spec{SamplerKind::kCbs, config.epochs, config.seed};
  // The backbone is frozen; the optimizer only sees head gradients.
  ExtractorParams unused;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const EpochPlan plan = plan_epoch(index, spec, e, config.batch_size, config.batches_per_epoch);
    EpochRecord rec;
    rec.stage = 2;
    rec.epoch = e + 1;
    rec.lr = config.lr.at(rec.epoch);
    rec.class_draws.assign(data.num_classes(), 0);
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0;
    for (const auto& batch : plan.batches) {
      for (auto i : batch) rec.class_draws[labels[i]]++;
      BatchResult r = head_loss_and_grads(result.head, train_features, labels, batch);
      if (!std::isfinite(r.loss)) {
        throw NumericError("stage 2 (crt), epoch " + std::to_string(rec.epoch) + ": non-finite loss");
      }
      loss_sum += r.loss * static_cast<double>(batch.size());
      seen += batch.size();
      correct += r.correct;
      optimizer_step(opt, unused, result.head, r.grads, rec.epoch, true);
    }
    rec.mean_loss = loss_sum / static_cast<double>(seen);
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (!data.eval.empty()) {
      std::size_t ok = 0;
      for (std::size_t i = 0; i < eval_features.rows; ++i) {
        if (argmax(logits(result.head, eval_features.row(i))) == eval_labels[i]) ++ok;
      }
      rec.eval_accuracy = static_cast<double>(ok) / static_cast<double>(eval_features.rows);
    }
    if (on_epoch) on_epoch(rec);
    result.log.push_back(std::move(rec));
  }
  return result;
}

void running_mean_update(std::span<double> mean, std::size_t n, std::span<const double> phi) {
  const double keep = static_cast<double>(n) / static_cast<double>(n + 1);
  const double take = 1.0 / static_cast<double>(n + 1);
  for (std::size_t k = 0; k < mean.size(); ++k) mean[k] = keep * mean[k] + take * phi[k];
}

void decay_mean_update(std::span<double> mean, double alpha, std::span<const double> batch_mean) {
  for (std::size_t k = 0; k < mean.size(); ++k) mean[k] = alpha * mean[k] + (1.0 - alpha) * batch_mean[k];
}

ClassStats class_means(const Matrix& features, std::span<const std::size_t> labels, std::size_t num_classes,
                       const StageTwoConfig& config) {
  if (labels.size() != features.rows) throw ContractViolation("one label per feature row required");
  const std::size_t D = features.cols;
  ClassStats stats;
  stats.means = Matrix(num_classes, D);
  stats.counts.assign(num_classes, 0);
  stats.distance = config.distance;
  for (auto y : labels) {
    if (y >= num_classes) throw ContractViolation("label id out of range");
  }

  switch (config.mean_mode) {
    case MeanMode::kBatch: {
      for (std::size_t i = 0; i < features.rows; ++i) {
        axpy(1.0, features.row(i).data(), stats.means.row(labels[i]).data(), D);
        stats.counts[labels[i]]++;
      }
      for (std::size_t c = 0; c < num_classes; ++c) {
        if (stats.counts[c] == 0) continue;
        for (auto& v : stats.means.row(c)) v /= static_cast<double>(stats.counts[c]);
      }
      break;
    }
    case MeanMode::kRunning: {
      for (std::size_t i = 0; i < features.rows; ++i) {
        const auto y = labels[i];
        running_mean_update(stats.means.row(y), stats.counts[y], features.row(i));
        stats.counts[y]++;
      }
      break;
    }
    case MeanMode::kDecay: {
      if (!(config.decay_alpha > 0.0 && config.decay_alpha < 1.0)) {
        throw ArgumentError("decay_alpha must lie in (0, 1)");
      }
      if (config.batch_size < 1) throw ArgumentError("batch size must be at least 1");
      std::vector<std::size_t> order(features.rows);
      std::iota(order.begin(), order.end(), 0);
      std::vector<bool> seeded(num_classes, false);
      Matrix batch_sum(num_classes, D);
      std::vector<std::size_t> batch_n(num_classes);
      Vector batch_mean(D);
      for (std::size_t e = 0; e < std::max<std::size_t>(1, config.epochs); ++e) {
        Rng rng(config.seed, Stream::kNcmBatches, {e});
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
          std::fill(batch_sum.data.begin(), batch_sum.data.end(), 0.0);
          std::fill(batch_n.begin(), batch_n.end(), 0);
          const std::size_t end = std::min(order.size(), start + config.batch_size);
          for (std::size_t k = start; k < end; ++k) {
            const auto i = order[k];
            axpy(1.0, features.row(i).data(), batch_sum.row(labels[i]).data(), D);
            batch_n[labels[i]]++;
          }
          for (std::size_t c = 0; c < num_classes; ++c) {
            if (batch_n[c] == 0) continue;
            for (std::size_t d = 0; d < D; ++d) batch_mean[d] = batch_sum(c, d) / static_cast<double>(batch_n[c]);
            if (!seeded[c]) {
              std::copy(batch_mean.begin(), batch_mean.end(), stats.means.row(c).begin());
              seeded[c] = true;
            } else {
              decay_mean_update(stats.means.row(c), config.decay_alpha, batch_mean);
            }
            if (e == 0) stats.counts[c] += batch_n[c];
          }
        }
      }
      break;
    }
  }
  return stats;
}

ClassStats ncm_fit(const Checkpoint& stage1, const PreparedData& data, const StageTwoConfig& config,
                   MetricFitResult* metric_log) {
  const Matrix features = extract_all(stage1.extractor, data.train);
  const auto labels = data.train_labels();
  ClassStats stats = class_means(features, labels, data.num_classes(), config);
  for (const auto v : stats.means.data) {
    if (!std::isfinite(v)) throw NumericError("non-finite class mean");
  }
  if (config.distance == Distance::kMahalanobis) {
    const std::size_t m = config.metric_dim == 0 ? features.cols : config.metric_dim;
    MetricFitResult fit = metric_fit(features, labels, stats.means, stats.counts, m, config.metric);
    stats.metric = fit.metric;
    if (metric_log) *metric_log = std::move(fit);
  }
  return stats;
}

double ncm_distance(const ClassStats& stats, std::size_t cls, std::span<const double> feature) {
  const auto mu = stats.means.row(cls);
  if (feature.size() != mu.size()) throw ContractViolation("feature dimension mismatch");
  switch (stats.distance) {
    case Distance::kEuclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < mu.size(); ++k) {
        const double d = feature[k] - mu[k];
        s += d * d;
      }
      return s;
    }
    case Distance::kMahalanobis:
      if (!stats.metric) throw StateError("Mahalanobis distance requested without a fitted metric");
      return metric_distance(*stats.metric, feature, mu);
    case Distance::kCosine: {
      const double nx = std::sqrt(dot(feature, feature));
      const double nm = std::sqrt(dot(mu, mu));
      if (nx == 0.0 || nm == 0.0) return 1.0;
      return 1.0 - dot(feature, mu) / (nx * nm);
    }
  }
  throw ContractViolation("unknown distance");
}

std::size_t ncm_predict(const ClassStats& stats, std::span<const double> feature) {
  std::size_t best = stats.num_classes();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < stats.num_classes(); ++c) {
    if (!stats.usable(c)) continue;
    const double d = ncm_distance(stats, c, feature);
    if (best == stats.num_classes() || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  if (best == stats.num_classes()) throw StateError("no usable class for nearest-mean prediction");
  return best;
}

HeadParams ncm_as_head(const ClassStats& stats) {
  const std::size_t S = stats.num_classes(), D = stats.means.cols;
  HeadParams head;
  head.weight = Matrix(S, D);
  head.bias.assign(S, 0.0);
  for (std::size_t c = 0; c < S; ++c) {
    if (!stats.usable(c)) {
      head.bias[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto mu = stats.means.row(c);
    auto w = head.weight.row(c);
    switch (stats.distance) {
      case Distance::kEuclidean:
        std::copy(mu.begin(), mu.end(), w.begin());
        break;
      case Distance::kMahalanobis: {
        if (!stats.metric) throw StateError("Mahalanobis head requested without a fitted metric");
        const Matrix& W = *stats.metric;
        for (std::size_t k = 0; k < W.rows; ++k) axpy(dot(W.row(k), mu), W.row(k).data(), w.data(), D);
        break;
      }
      case Distance::kCosine: {
        // argmax of cosine similarity does not depend on |x|.
        const double n = std::sqrt(dot(mu, mu));
        if (n > 0.0) {
          for (std::size_t k = 0; k < D; ++k) w[k] = mu[k] / n;
        }
        continue;
      }
    }
    head.bias[c] = -0.5 * dot(w, mu);
  }
  return head;
}

namespace {
constexpr std::string_view kStatsMagic{"LTCNCMS\0", 8};
constexpr std::uint32_t kStatsVersion = 1;
}  // namespace

void save_class_stats(const ClassStats& stats, std::uint64_t vocab_hash, const std::filesystem::path& path) {
  TensorFile f;
  f.magic = std::string(kStatsMagic);
  f.version = kStatsVersion;
  f.vocab_hash = vocab_hash;
  f.tensors.push_back({"means", {stats.means.rows, stats.means.cols}, stats.means.data});
  f.tensors.push_back({"counts", {stats.counts.size()}, {stats.counts.begin(), stats.counts.end()}});
  f.tensors.push_back({"distance", {1}, {static_cast<double>(stats.distance)}});
  if (stats.metric) f.tensors.push_back({"metric", {stats.metric->rows, stats.metric->cols}, stats.metric->data});
  write_tensor_file(f, path);
}

ClassStats load_class_stats(const std::filesystem::path& path, std::optional<std::uint64_t> vocab_hash) {
  const TensorFile f = read_tensor_file(path, kStatsMagic, kStatsVersion);
  if (vocab_hash && *vocab_hash != f.vocab_hash) throw HashMismatchError("class statistics built for another vocabulary");
  const auto* means = f.find("means");
  const auto* counts = f.find("counts");
  const auto* distance = f.find("distance");
  if (!means || !counts || !distance || means->dims.size() != 2 || counts->data.size() != means->dims[0] ||
      distance->data.size() != 1) {
    throw DataError("malformed class statistics file");
  }
  ClassStats s;
  s.means = Matrix(means->dims[0], means->dims[1]);
  s.means.data = means->data;
  for (double c : counts->data) s.counts.push_back(static_cast<std::size_t>(c));
  const int d = static_cast<int>(distance->data[0]);
  if (d < 0 || d > 2) throw DataError("unknown distance code in class statistics");
  s.distance = static_cast<Distance>(d);
  if (const auto* metric = f.find("metric")) {
    if (metric->dims.size() != 2 || metric->dims[1] != s.means.cols) throw DataError("malformed metric tensor");
    Matrix w(metric->dims[0], metric->dims[1]);
    w.data = metric->data;
    s.metric = std::move(w);
  }
  return s;
}

}  // namespace ltc
