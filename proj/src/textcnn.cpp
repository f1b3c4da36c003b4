#include "ltc/textcnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ltc/errors.hpp"
#include "ltc/rng.hpp"

namespace ltc {

std::uint64_t ModelConfig::architecture_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(vocab_size);
  feed(embed_dim);
  feed(filter_widths.size());
  for (auto w : filter_widths) feed(w);
  feed(num_filters);
  feed(feature_dim);
  feed(num_classes);
  return h;
}

void ModelConfig::validate() const {
  if (vocab_size < 2) throw ArgumentError("vocab_size must cover the reserved ids");
  if (embed_dim < 1 || num_filters < 1 || feature_dim < 1) throw ArgumentError("model dimensions must be positive");
  if (num_classes < 1) throw ArgumentError("num_classes must be positive");
  if (filter_widths.empty()) throw ArgumentError("at least one filter width is required");
  for (std::size_t i = 0; i < filter_widths.size(); ++i) {
    if (filter_widths[i] < 1) throw ArgumentError("filter widths must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (filter_widths[i] == filter_widths[j]) throw ArgumentError("filter widths must be distinct");
    }
  }
  if (max_len < 1) throw ArgumentError("max_len must be at least 1");
}

std::size_t ExtractorParams::max_width() const {
  std::size_t w = 1;
  for (const auto& c : convs) w = std::max(w, c.width);
  return w;
}

namespace {

void glorot(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
  for (auto& x : m.data) x = rng.uniform(-limit, limit);
}

}  // namespace

ExtractorParams init_extractor(const ModelConfig& config, EmbeddingTable embedding, std::uint64_t seed) {
  config.validate();
  if (embedding.vocab_size() != config.vocab_size || embedding.dim != config.embed_dim) {
    throw ContractViolation("embedding table does not match model config");
  }
  ExtractorParams p;
  p.embedding = std::move(embedding);
  p.embedding.trainable = config.trainable_embedding;
  p.embedding.zero_pad_row();
  Rng rng(seed, Stream::kExtractorInit);
  for (auto w : config.filter_widths) {
    ConvBank bank;
    bank.width = w;
    bank.weight = Matrix(config.num_filters, w * config.embed_dim);
    bank.bias.assign(config.num_filters, 0.0);
    glorot(bank.weight, rng);
    p.convs.push_back(std::move(bank));
  }
  p.projection = Matrix(config.feature_dim, config.pooled_dim());
  glorot(p.projection, rng);
  p.projection_bias.assign(config.feature_dim, 0.0);
  return p;
}

HeadParams init_head(std::size_t num_classes, std::size_t feature_dim, double scale, std::uint64_t seed) {
  HeadParams h;
  h.weight = Matrix(num_classes, feature_dim);
  h.bias.assign(num_classes, 0.0);
  Rng rng(seed, Stream::kHeadInit);
  for (auto& x : h.weight.data) x = rng.uniform(-scale, scale);
  for (auto& x : h.bias) x = rng.uniform(-scale, scale);
  return h;
}

ModelConfig infer_config(const ExtractorParams& extractor, const HeadParams& head) {
  ModelConfig c;
  c.vocab_size = extractor.embedding.vocab_size();
  c.embed_dim = extractor.embedding.dim;
  c.filter_widths.clear();
  for (const auto& b : extractor.convs) c.filter_widths.push_back(b.width);
  c.num_filters = extractor.convs.empty() ? 0 : extractor.convs.front().weight.rows;
  c.feature_dim = extractor.projection.rows;
  c.num_classes = head.weight.rows;
  c.trainable_embedding = extractor.embedding.trainable;
  return c;
}

std::vector<TensorView> extractor_tensors(ExtractorParams& p) {
  std::vector<TensorView> out;
  out.push_back({"embedding", p.embedding.matrix.data, {p.embedding.matrix.rows, p.embedding.matrix.cols}});
  for (auto& b : p.convs) {
    const std::string prefix = "conv" + std::to_string(b.width);
    out.push_back({prefix + ".weight", b.weight.data, {b.weight.rows, b.weight.cols}});
    out.push_back({prefix + ".bias", b.bias, {b.bias.size()}});
  }
  out.push_back({"projection.weight", p.projection.data, {p.projection.rows, p.projection.cols}});
  out.push_back({"projection.bias", p.projection_bias, {p.projection_bias.size()}});
  return out;
}

std::vector<ConstTensorView> extractor_tensors(const ExtractorParams& p) {
  std::vector<ConstTensorView> out;
  for (auto& t : extractor_tensors(const_cast<ExtractorParams&>(p))) out.push_back({t.name, t.data, t.dims});
  return out;
}

std::vector<TensorView> head_tensors(HeadParams& h) {
  return {{"head.weight", h.weight.data, {h.weight.rows, h.weight.cols}},
          {"head.bias", h.bias, {h.bias.size()}}};
}

std::vector<ConstTensorView> head_tensors(const HeadParams& h) {
  std::vector<ConstTensorView> out;
  for (auto& t : head_tensors(const_cast<HeadParams&>(h))) out.push_back({t.name, t.data, t.dims});
  return out;
}

namespace {

// Forward state of one document, kept for backpropagation.
struct DocForward {
  std::size_t seq_len = 0;      // padded to at least the widest filter
  std::size_t content_len = 0;  // one past the last non-pad position
  std::vector<double> input;    // seq_len x E
  Vector pooled;                // F * banks
  std::vector<std::size_t> arg;  // argmax position per pooled unit
  std::vector<bool> active;      // pre-activation at argmax > 0
  Vector feature;
};

void forward_doc(const ExtractorParams& p, std::span<const TokenId> ids, DocForward& f) {
  const std::size_t E = p.embed_dim();
  const std::size_t V = p.embedding.vocab_size();
  f.seq_len = std::max(ids.size(), p.max_width());
  f.content_len = 0;
  f.input.assign(f.seq_len * E, 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= V) throw ContractViolation("token id out of vocabulary range");
    if (id == Vocabulary::kPad) continue;
    f.content_len = i + 1;
    const auto row = p.embedding.matrix.row(static_cast<std::size_t>(id));
    std::copy(row.begin(), row.end(), f.input.begin() + static_cast<std::ptrdiff_t>(i * E));
  }

  const std::size_t F = p.convs.empty() ? 0 : p.convs.front().weight.rows;
  const std::size_t pooled_dim = F * p.convs.size();
  f.pooled.assign(pooled_dim, 0.0);
  f.arg.assign(pooled_dim, 0);
  f.active.assign(pooled_dim, false);

  for (std::size_t b = 0; b < p.convs.size(); ++b) {
    const auto& bank = p.convs[b];
    const std::size_t w = bank.width;
    const std::size_t positions = f.seq_len - w + 1;
    // Windows starting at or after content_len see only zero rows, so their
    // pre-activation is exactly the bias.
    const std::size_t live = std::min(positions, f.content_len);
    for (std::size_t k = 0; k < F; ++k) {
      const double* wk = bank.weight.row(k).data();
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_pos = 0;
      for (std::size_t pos = 0; pos < live; ++pos) {
        const double pre = bank.bias[k] + dot(wk, f.input.data() + pos * E, w * E);
        if (pre > best) {
          best = pre;
          best_pos = pos;
        }
      }
      if (live < positions && bank.bias[k] > best) {
        best = bank.bias[k];
        best_pos = live;
      }
      const std::size_t u = b * F + k;
      f.arg[u] = best_pos;
      f.active[u] = best > 0.0;
      f.pooled[u] = best > 0.0 ? best : 0.0;
    }
  }

  f.feature.assign(p.projection.rows, 0.0);
  for (std::size_t d = 0; d < p.projection.rows; ++d) {
    f.feature[d] = p.projection_bias[d] + dot(p.projection.row(d).data(), f.pooled.data(), pooled_dim);
  }
}

void backward_doc(const ExtractorParams& p, std::span<const TokenId> ids, const DocForward& f,
                  std::span<const double> dfeature, ExtractorParams& g) {
  const std::size_t E = p.embed_dim();
  const std::size_t D = p.projection.rows;
  const std::size_t pooled_dim = f.pooled.size();
  Vector dpooled(pooled_dim, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    const double gd = dfeature[d];
    if (gd == 0.0) continue;
    g.projection_bias[d] += gd;
    axpy(gd, f.pooled.data(), g.projection.row(d).data(), pooled_dim);
    axpy(gd, p.projection.row(d).data(), dpooled.data(), pooled_dim);
  }

  const bool embed_grads = p.embedding.trainable;
  const std::size_t F = p.convs.empty() ? 0 : p.convs.front().weight.rows;
  for (std::size_t b = 0; b < p.convs.size(); ++b) {
    const auto& bank = p.convs[b];
    auto& gbank = g.convs[b];
    const std::size_t w = bank.width;
    for (std::size_t k = 0; k < F; ++k) {
      const std::size_t u = b * F + k;
      if (!f.active[u]) continue;
      const double gu = dpooled[u];
      const std::size_t pos = f.arg[u];
      gbank.bias[k] += gu;
      axpy(gu, f.input.data() + pos * E, gbank.weight.row(k).data(), w * E);
      if (!embed_grads) continue;
      for (std::size_t r = 0; r < w; ++r) {
        const std::size_t t = pos + r;
        if (t >= ids.size() || ids[t] == Vocabulary::kPad) continue;
        axpy(gu, bank.weight.row(k).data() + r * E,
             g.embedding.matrix.row(static_cast<std::size_t>(ids[t])).data(), E);
      }
    }
  }
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

void check_head(const HeadParams& head, std::size_t feature_dim) {
  if (head.weight.cols != feature_dim || head.bias.size() != head.weight.rows) {
    throw ContractViolation("head shape does not match feature dimension");
  }
}

[[noreturn]] void numeric_failure(std::span<const std::size_t> batch, double loss, const Vector& z) {
  double max_abs = 0.0;
  for (double v : z) max_abs = std::max(max_abs, std::fabs(v));
  std::ostringstream msg;
  msg << "non-finite loss " << loss << " (batch of " << batch.size() << ", first index "
      << (batch.empty() ? 0 : batch.front()) << ", max |logit| " << max_abs << ")";
  throw NumericError(msg.str());
}

}  // namespace

Vector extract_features(const ExtractorParams& params, std::span<const TokenId> ids) {
  DocForward f;
  forward_doc(params, ids, f);
  return std::move(f.feature);
}

Matrix extract_all(const ExtractorParams& params, std::span<const EncodedDoc> docs) {
  Matrix out(docs.size(), params.feature_dim());
  DocForward f;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    forward_doc(params, docs[i].ids, f);
    std::copy(f.feature.begin(), f.feature.end(), out.row(i).begin());
  }
  return out;
}

Vector logits(const HeadParams& head, std::span<const double> feature) {
  check_head(head, feature.size());
  Vector z(head.weight.rows);
  for (std::size_t s = 0; s < z.size(); ++s) z[s] = head.bias[s] + dot(head.weight.row(s), feature);
  return z;
}

Vector softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += (p[i] = std::exp(z[i] - m));
  for (auto& x : p) x /= total;
  return p;
}

std::size_t argmax(std::span<const double> z) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

Gradients zero_gradients(const ExtractorParams& extractor, const HeadParams& head, bool with_extractor) {
  Gradients g;
  g.has_extractor = with_extractor;
  if (with_extractor) {
    g.extractor = extractor;
    for (auto& t : extractor_tensors(g.extractor)) std::fill(t.data.begin(), t.data.end(), 0.0);
  }
  g.head.weight = Matrix(head.weight.rows, head.weight.cols);
  g.head.bias.assign(head.bias.size(), 0.0);
  return g;
}

BatchResult loss_and_grads(const ExtractorParams& extractor, const HeadParams& head,
                           std::span<const EncodedDoc> docs, std::span<const std::size_t> batch,
                           bool extractor_grads) {
  if (batch.empty()) throw ContractViolation("empty batch");
  check_head(head, extractor.feature_dim());
  BatchResult r;
  r.grads = zero_gradients(extractor, head, extractor_grads);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t S = head.num_classes();
  const std::size_t D = extractor.feature_dim();
  DocForward f;
  Vector dfeature(D);
  double total = 0.0;
  for (std::size_t idx : batch) {
    const auto& doc = docs[idx];
    if (doc.label >= S) throw ContractViolation("label id out of range");
    forward_doc(extractor, doc.ids, f);
    const Vector z = logits(head, f.feature);
    const double lse = log_sum_exp(z);
    const double loss = lse - z[doc.label];
    if (!std::isfinite(loss)) numeric_failure(batch, loss, z);
    total += loss;
    if (argmax(z) == doc.label) ++r.correct;

    std::fill(dfeature.begin(), dfeature.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const double dz = (std::exp(z[s] - lse) - (s == doc.label ? 1.0 : 0.0)) * inv_b;
      r.grads.head.bias[s] += dz;
      axpy(dz, f.feature.data(), r.grads.head.weight.row(s).data(), D);
      axpy(dz, head.weight.row(s).data(), dfeature.data(), D);
    }
    if (extractor_grads) backward_doc(extractor, doc.ids, f, dfeature, r.grads.extractor);
  }
  r.loss = total * inv_b;
  if (!std::isfinite(r.loss)) numeric_failure(batch, r.loss, {});
  if (extractor_grads) r.grads.extractor.embedding.zero_pad_row();
  return r;
}

double batch_loss(const ExtractorParams& extractor, const HeadParams& head,
                  std::span<const EncodedDoc> docs, std::span<const std::size_t> batch) {
  double total = 0.0;
  for (std::size_t idx : batch) {
    const Vector z = logits(head, extract_features(extractor, docs[idx]));
    total += log_sum_exp(z) - z[docs[idx].label];
  }
  return total / static_cast<double>(batch.size());
}

BatchResult head_loss_and_grads(const HeadParams& head, const Matrix& features,
                                std::span<const std::size_t> labels, std::span<const std::size_t> batch) {
  if (batch.empty()) throw ContractViolation("empty batch");
  check_head(head, features.cols);
  BatchResult r;
  r.grads.head.weight = Matrix(head.weight.rows, head.weight.cols);
  r.grads.head.bias.assign(head.bias.size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t S = head.num_classes();
  double total = 0.0;
  for (std::size_t idx : batch) {
    const auto feature = features.row(idx);
    const std::size_t y = labels[idx];
    if (y >= S) throw ContractViolation("label id out of range");
    const Vector z = logits(head, feature);
    const double lse = log_sum_exp(z);
    const double loss = lse - z[y];
    if (!std::isfinite(loss)) numeric_failure(batch, loss, z);
    total += loss;
    if (argmax(z) == y) ++r.correct;
    for (std::size_t s = 0; s < S; ++s) {
      const double dz = (std::exp(z[s] - lse) - (s == y ? 1.0 : 0.0)) * inv_b;
      r.grads.head.bias[s] += dz;
      axpy(dz, feature.data(), r.grads.head.weight.row(s).data(), features.cols);
    }
  }
  r.loss = total * inv_b;
  return r;
}

}  // namespace ltc
