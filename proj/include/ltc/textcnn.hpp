#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltc/embedding.hpp"
#include "ltc/tensor.hpp"
#include "ltc/vocab.hpp"

namespace ltc {

// TextCNN backbone plus linear softmax head. Defaults are sized for desk-scale
// training in double precision.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::vector<std::size_t> filter_widths{2, 3, 4};
  std::size_t num_filters = 32;
  std::size_t feature_dim = 128;
  std::size_t num_classes = 0;
  std::size_t max_len = 64;
  bool trainable_embedding = true;

  std::size_t pooled_dim() const { return num_filters * filter_widths.size(); }
  // FNV-1a over the tensor shapes (everything recoverable from a checkpoint).
  std::uint64_t architecture_hash() const;
  void validate() const;
};

struct ConvBank {
  std::size_t width = 0;
  Matrix weight;  // F x (width * E), row f is filter f laid out position-major
  Vector bias;    // F
};

struct ExtractorParams {
  EmbeddingTable embedding;
  std::vector<ConvBank> convs;
  Matrix projection;  // D x pooled
  Vector projection_bias;

  std::size_t embed_dim() const { return embedding.dim; }
  std::size_t feature_dim() const { return projection.rows; }
  std::size_t max_width() const;
};

struct HeadParams {
  Matrix weight;  // S x D
  Vector bias;    // S

  std::size_t num_classes() const { return weight.rows; }
};

// Conv filters and projection use Glorot-uniform weights and zero biases.
ExtractorParams init_extractor(const ModelConfig& config, EmbeddingTable embedding, std::uint64_t seed);
// W, b uniform in [-scale, scale].
HeadParams init_head(std::size_t num_classes, std::size_t feature_dim, double scale, std::uint64_t seed);

// Architecture recovered from the parameter shapes. max_len is not part of
// the parameters and is left at its default.
ModelConfig infer_config(const ExtractorParams& extractor, const HeadParams& head);

struct TensorView {
  std::string name;
  std::span<double> data;
  std::vector<std::size_t> dims;
};

struct ConstTensorView {
  std::string name;
  std::span<const double> data;
  std::vector<std::size_t> dims;
};

// Stable tensor order and names: "embedding", "conv<w>.weight",
// "conv<w>.bias", "projection.weight", "projection.bias".
std::vector<TensorView> extractor_tensors(ExtractorParams& p);
std::vector<ConstTensorView> extractor_tensors(const ExtractorParams& p);
// "head.weight", "head.bias".
std::vector<TensorView> head_tensors(HeadParams& h);
std::vector<ConstTensorView> head_tensors(const HeadParams& h);

// embedding -> per-width valid convolution -> ReLU -> max over time ->
// concatenation -> affine projection. Sequences shorter than the widest
// filter are treated as padded with pad ids.
Vector extract_features(const ExtractorParams& params, std::span<const TokenId> ids);
inline Vector extract_features(const ExtractorParams& params, const EncodedDoc& doc) {
  return extract_features(params, std::span<const TokenId>(doc.ids));
}

// Features of every document, one row each.
Matrix extract_all(const ExtractorParams& params, std::span<const EncodedDoc> docs);

Vector logits(const HeadParams& head, std::span<const double> feature);
Vector softmax(std::span<const double> z);
std::size_t argmax(std::span<const double> z);  // lowest index on ties

// Same shapes as the parameters. Extractor gradients are absent (empty) when
// only the head was differentiated.
struct Gradients {
  ExtractorParams extractor;
  HeadParams head;
  bool has_extractor = false;
};

Gradients zero_gradients(const ExtractorParams& extractor, const HeadParams& head, bool with_extractor);

struct BatchResult {
  double loss = 0.0;  // mean cross-entropy
  std::size_t correct = 0;
  Gradients grads;
};

// Mean cross-entropy over docs[batch[i]] and exact gradients. The pad
// embedding row is a constant and receives no gradient; a non-trainable
// embedding receives none at all. Max-pool ties route to the earliest
// position. Throws NumericError on a non-finite loss.
BatchResult loss_and_grads(const ExtractorParams& extractor, const HeadParams& head,
                           std::span<const EncodedDoc> docs, std::span<const std::size_t> batch,
                           bool extractor_grads = true);

// Forward-only mean cross-entropy, used by finite-difference checks.
double batch_loss(const ExtractorParams& extractor, const HeadParams& head,
                  std::span<const EncodedDoc> docs, std::span<const std::size_t> batch);

// Head-only loss and gradients over precomputed feature rows.
BatchResult head_loss_and_grads(const HeadParams& head, const Matrix& features,
                                std::span<const std::size_t> labels, std::span<const std::size_t> batch);

}  // namespace ltc
