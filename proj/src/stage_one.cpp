#include "ltc/stage_one.hpp"

#include <cmath>

#include "ltc/errors.hpp"

namespace ltc {

double accuracy(const ExtractorParams& extractor, const HeadParams& head, const std::vector<EncodedDoc>& docs) {
  if (docs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& d : docs) {
    if (argmax(logits(head, extract_features(extractor, d))) == d.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(docs.size());
}

StageOneResult stage1_train(const PreparedData& data, const SamplerSpec& sampler, const ModelConfig& model,
                            const TrainConfig& config, EmbeddingTable embedding, const EpochCallback& on_epoch) {
  if (data.num_classes() < 2) throw DataError("training needs at least two classes");
  if (data.train.empty()) throw EmptyCorpusError("no training documents");
  if (config.epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (model.num_classes != data.num_classes() || model.vocab_size != data.vocab.size()) {
    throw ContractViolation("model config does not match prepared data");
  }

  SamplerSpec spec = sampler;
  spec.total_epochs = config.epochs;
  const auto labels = data.train_labels();
  const ClassIndex index(labels, data.num_classes(), spec.seed);

  ExtractorParams extractor = init_extractor(model, std::move(embedding), config.seed);
  HeadParams head = init_head(data.num_classes(), model.feature_dim,
                              1.0 / std::sqrt(static_cast<double>(model.feature_dim)), config.seed);
  OptimizerState opt;
  opt.adam = config.adam;
  opt.schedule = config.lr;

  StageOneResult result;
  result.sampler = spec;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const EpochPlan plan = plan_epoch(index, spec, e, config.batch_size, config.batches_per_epoch);
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.lr = config.lr.at(rec.epoch);
    rec.class_draws.assign(data.num_classes(), 0);
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0;
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      const auto& batch = plan.batches[b];
      for (auto i : batch) rec.class_draws[labels[i]]++;
      BatchResult r;
      try {
        r = loss_and_grads(extractor, head, data.train, batch, true);
      } catch (const NumericError& err) {
        throw NumericError("stage 1, epoch " + std::to_string(rec.epoch) + ", batch " + std::to_string(b) +
                           ": " + err.what());
      }
      loss_sum += r.loss * static_cast<double>(batch.size());
      seen += batch.size();
      correct += r.correct;
      optimizer_step(opt, extractor, head, r.grads, rec.epoch, false);
    }
    rec.mean_loss = loss_sum / static_cast<double>(seen);
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (!data.eval.empty()) rec.eval_accuracy = accuracy(extractor, head, data.eval);
    if (on_epoch) on_epoch(rec);
    result.log.push_back(std::move(rec));
  }
  result.checkpoint = make_checkpoint(std::move(extractor), std::move(head), data.vocab.hash());
  return result;
}

}  // namespace ltc
