#include "ltc/experiment.hpp"

#include "ltc/errors.hpp"

namespace ltc {

using nlohmann::json;

void ExperimentConfig::propagate_seed() {
  train.seed = seed;
  stage2.seed = seed;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data"] = {{"corpus", c.corpus_path},
               {"min_count", c.min_count},
               {"eval_fraction", c.eval_fraction},
               {"stopwords_zh", c.stopwords_zh},
               {"stopwords_en", c.stopwords_en},
               {"min_freq", c.preprocess.min_freq},
               {"max_len", c.preprocess.max_len},
               {"vectors", c.vectors_path}};
  j["model"] = {{"embed_dim", c.model.embed_dim},
                {"filter_widths", c.model.filter_widths},
                {"num_filters", c.model.num_filters},
                {"feature_dim", c.model.feature_dim},
                {"trainable_embedding", c.model.trainable_embedding}};
  j["stage1"] = {{"sampler", std::string(to_string(c.sampler))},
                 {"epochs", c.train.epochs},
                 {"batch_size", c.train.batch_size},
                 {"batches_per_epoch", c.train.batches_per_epoch ? json(*c.train.batches_per_epoch) : json(nullptr)},
                 {"lr", c.train.lr.base},
                 {"lr_decay_after", c.train.lr.decay_after},
                 {"lr_decay_factor", c.train.lr.decay_factor}};
  const auto& s = c.stage2;
  j["stage2"] = {{"method", std::string(to_string(s.method))},
                 {"epochs", s.epochs},
                 {"batch_size", s.batch_size},
                 {"batches_per_epoch", s.batches_per_epoch ? json(*s.batches_per_epoch) : json(nullptr)},
                 {"lr", s.lr.base},
                 {"lr_decay_after", s.lr.decay_after},
                 {"lr_decay_factor", s.lr.decay_factor},
                 {"head_init_scale", s.head_init_scale},
                 {"mean_mode", std::string(to_string(s.mean_mode))},
                 {"decay_alpha", s.decay_alpha},
                 {"distance", std::string(to_string(s.distance))},
                 {"metric_dim", s.metric_dim},
                 {"metric_epochs", s.metric.epochs}};
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  try {
    ExperimentConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& d = j.at("data");
    c.corpus_path = d.at("corpus").get<std::string>();
    c.min_count = d.at("min_count").get<std::size_t>();
    c.eval_fraction = d.at("eval_fraction").get<double>();
    c.stopwords_zh = d.at("stopwords_zh").get<std::string>();
    c.stopwords_en = d.at("stopwords_en").get<std::string>();
    c.preprocess.min_freq = d.at("min_freq").get<std::size_t>();
    c.preprocess.max_len = d.at("max_len").get<std::size_t>();
    c.vectors_path = d.at("vectors").get<std::string>();
    const auto& m = j.at("model");
    c.model.embed_dim = m.at("embed_dim").get<std::size_t>();
    c.model.filter_widths = m.at("filter_widths").get<std::vector<std::size_t>>();
    c.model.num_filters = m.at("num_filters").get<std::size_t>();
    c.model.feature_dim = m.at("feature_dim").get<std::size_t>();
    c.model.trainable_embedding = m.at("trainable_embedding").get<bool>();
    const auto& s1 = j.at("stage1");
    c.sampler = parse_sampler(s1.at("sampler").get<std::string>());
    c.train.epochs = s1.at("epochs").get<std::size_t>();
    c.train.batch_size = s1.at("batch_size").get<std::size_t>();
    if (!s1.at("batches_per_epoch").is_null()) c.train.batches_per_epoch = s1.at("batches_per_epoch").get<std::size_t>();
    c.train.lr = {s1.at("lr").get<double>(), s1.at("lr_decay_after").get<std::size_t>(),
                  s1.at("lr_decay_factor").get<double>()};
    const auto& s2 = j.at("stage2");
    c.stage2.method = parse_stage2_method(s2.at("method").get<std::string>());
    c.stage2.epochs = s2.at("epochs").get<std::size_t>();
    c.stage2.batch_size = s2.at("batch_size").get<std::size_t>();
    if (!s2.at("batches_per_epoch").is_null()) c.stage2.batches_per_epoch = s2.at("batches_per_epoch").get<std::size_t>();
    c.stage2.lr = {s2.at("lr").get<double>(), s2.at("lr_decay_after").get<std::size_t>(),
                   s2.at("lr_decay_factor").get<double>()};
    c.stage2.head_init_scale = s2.at("head_init_scale").get<double>();
    c.stage2.mean_mode = parse_mean_mode(s2.at("mean_mode").get<std::string>());
    c.stage2.decay_alpha = s2.at("decay_alpha").get<double>();
    c.stage2.distance = parse_distance(s2.at("distance").get<std::string>());
    c.stage2.metric_dim = s2.at("metric_dim").get<std::size_t>();
    c.stage2.metric.epochs = s2.at("metric_epochs").get<std::size_t>();
    c.propagate_seed();
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run configuration: ") + e.what());
  }
}

LabeledCorpus load_experiment_corpus(const ExperimentConfig& config,
                                     std::vector<std::pair<std::string, std::size_t>>* dropped) {
  LabeledCorpus corpus = load_tsv(config.corpus_path);
  if (config.min_count > 0) corpus = drop_rare_classes(corpus, config.min_count, dropped);
  return corpus;
}

Stopwords experiment_stopwords(const ExperimentConfig& config) {
  Stopwords sw = Stopwords::defaults();
  if (!config.stopwords_zh.empty()) sw.cjk = load_stopwords(config.stopwords_zh);
  if (!config.stopwords_en.empty()) sw.latin = load_stopwords(config.stopwords_en);
  return sw;
}

PreparedData prepare_experiment(const LabeledCorpus& corpus, const ExperimentConfig& config) {
  return prepare(split(corpus, config.eval_fraction, config.seed), experiment_stopwords(config), config.preprocess);
}

ModelConfig experiment_model(const ExperimentConfig& config, const PreparedData& data) {
  ModelConfig m = config.model;
  m.vocab_size = data.vocab.size();
  m.num_classes = data.num_classes();
  m.max_len = config.preprocess.max_len;
  return m;
}

EmbeddingTable experiment_embedding(const ExperimentConfig& config, const PreparedData& data) {
  if (config.vectors_path.empty()) return random_embedding(data.vocab, config.model.embed_dim, config.seed);
  return load_vectors(config.vectors_path, data.vocab, config.model.embed_dim, config.seed);
}

json to_json(const EpochRecord& r) {
  json j = {{"stage", r.stage},
            {"epoch", r.epoch},
            {"loss", r.mean_loss},
            {"train_accuracy", r.train_accuracy},
            {"lr", r.lr},
            {"class_draws", r.class_draws}};
  j["eval_accuracy"] = r.eval_accuracy ? json(*r.eval_accuracy) : json(nullptr);
  return j;
}

}  // namespace ltc
