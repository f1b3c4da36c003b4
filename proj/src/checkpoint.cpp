#include "ltc/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <string_view>

#include "ltc/errors.hpp"
#include "ltc/tensor_io.hpp"

namespace ltc {

namespace {

constexpr std::string_view magic() { return {Checkpoint::kMagic, 8}; }

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

const NamedTensor& require(const TensorFile& f, const std::string& name, std::size_t rank) {
  const NamedTensor* t = f.find(name);
  if (!t) throw DataError("checkpoint lacks tensor '" + name + "'");
  if (t->dims.size() != rank) throw DataError("tensor '" + name + "' has wrong rank");
  return *t;
}

Matrix to_matrix(const NamedTensor& t) {
  Matrix m(t.dims[0], t.dims[1]);
  m.data = t.data;
  return m;
}

}  // namespace

Checkpoint make_checkpoint(ExtractorParams extractor, HeadParams head, std::uint64_t vocab_hash) {
  Checkpoint c;
  c.config_hash = infer_config(extractor, head).architecture_hash();
  c.extractor = std::move(extractor);
  c.head = std::move(head);
  c.vocab_hash = vocab_hash;
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  TensorFile f;
  f.magic = std::string(magic());
  f.version = Checkpoint::kFormatVersion;
  f.config_hash = ckpt.config_hash;
  f.vocab_hash = ckpt.vocab_hash;
  auto add = [&f](const ConstTensorView& t) {
    f.tensors.push_back({t.name, {t.dims.begin(), t.dims.end()}, {t.data.begin(), t.data.end()}});
  };
  for (const auto& t : extractor_tensors(ckpt.extractor)) add(t);
  for (const auto& t : head_tensors(ckpt.head)) add(t);
  write_tensor_file(f, out);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  save_checkpoint(ckpt, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(std::istream& in, const CheckpointExpectations& expect) {
  const TensorFile f = read_tensor_file(in, magic(), Checkpoint::kFormatVersion);
  Checkpoint c;
  c.vocab_hash = f.vocab_hash;
  c.config_hash = f.config_hash;

  const auto& emb = require(f, "embedding", 2);
  c.extractor.embedding.matrix = to_matrix(emb);
  c.extractor.embedding.dim = emb.dims[1];
  c.extractor.embedding.trainable = true;
  for (const auto& t : f.tensors) {
    if (!t.name.starts_with("conv") || !t.name.ends_with(".weight")) continue;
    const std::string prefix = t.name.substr(0, t.name.size() - 7);
    ConvBank bank;
    try {
      bank.width = std::stoul(prefix.substr(4));
    } catch (const std::exception&) {
      throw DataError("bad convolution tensor name '" + t.name + "'");
    }
    if (t.dims.size() != 2 || bank.width == 0 || t.dims[1] != bank.width * c.extractor.embedding.dim) {
      throw DataError("tensor '" + t.name + "' has inconsistent shape");
    }
    bank.weight = to_matrix(t);
    const auto& bias = require(f, prefix + ".bias", 1);
    if (bias.dims[0] != bank.weight.rows) throw DataError("tensor '" + prefix + ".bias' has inconsistent shape");
    bank.bias = bias.data;
    c.extractor.convs.push_back(std::move(bank));
  }
  if (c.extractor.convs.empty()) throw DataError("checkpoint has no convolution banks");
  c.extractor.projection = to_matrix(require(f, "projection.weight", 2));
  c.extractor.projection_bias = require(f, "projection.bias", 1).data;
  c.head.weight = to_matrix(require(f, "head.weight", 2));
  c.head.bias = require(f, "head.bias", 1).data;

  const std::size_t pooled = c.extractor.convs.size() * c.extractor.convs.front().weight.rows;
  if (c.extractor.projection.cols != pooled || c.extractor.projection_bias.size() != c.extractor.projection.rows ||
      c.head.weight.cols != c.extractor.projection.rows || c.head.bias.size() != c.head.weight.rows) {
    throw DataError("checkpoint tensor shapes are inconsistent");
  }
  for (const auto& b : c.extractor.convs) {
    if (b.weight.rows != c.extractor.convs.front().weight.rows) throw DataError("filter counts differ across banks");
  }

  const std::uint64_t actual = infer_config(c.extractor, c.head).architecture_hash();
  if (actual != c.config_hash) {
    throw HashMismatchError("config hash " + hex(c.config_hash) + " does not match tensor shapes (" + hex(actual) + ")");
  }
  if (expect.config_hash && *expect.config_hash != c.config_hash) {
    throw HashMismatchError("config hash " + hex(c.config_hash) + ", expected " + hex(*expect.config_hash));
  }
  if (expect.vocab_hash && *expect.vocab_hash != c.vocab_hash) {
    throw HashMismatchError("vocab hash " + hex(c.vocab_hash) + ", expected " + hex(*expect.vocab_hash));
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const CheckpointExpectations& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return load_checkpoint(in, expect);
}

}  // namespace ltc
