#include "ltc/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "ltc/errors.hpp"

namespace ltc {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  id_to_token_.reserve(tokens.size() + 2);
  id_to_token_.emplace_back(kPadToken);
  id_to_token_.emplace_back(kUnkToken);
  for (const auto& t : tokens) {
    if (t.empty() || t == kPadToken || t == kUnkToken) {
      throw ContractViolation("invalid vocabulary token '" + t + "'");
    }
    if (!token_to_id_.emplace(t, static_cast<TokenId>(id_to_token_.size())).second) {
      throw ContractViolation("duplicate vocabulary token '" + t + "'");
    }
    id_to_token_.push_back(t);
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw ContractViolation("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    feed(std::to_string(i));
    feed("\t");
    feed(id_to_token_[i]);
    feed("\n");
  }
  return h;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) out << i << '\t' << id_to_token_[i] << '\n';
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(line_no, "expected id<TAB>token");
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw FormatError(line_no, "bad token id");
    }
    if (id != line_no - 1) throw FormatError(line_no, "ids must be dense and ordered");
    if (id >= 2) tokens.push_back(line.substr(tab + 1));
  }
  return Vocabulary(tokens);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  return load(in);
}

Vocabulary build_vocab(std::span<const TokenSeq> docs, std::size_t min_freq) {
  if (min_freq < 1) throw ArgumentError("min_freq must be at least 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : docs) {
    for (const auto& t : doc) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, n] : freq) {
    if (n >= min_freq && token != Vocabulary::kPadToken && token != Vocabulary::kUnkToken) kept.emplace_back(token, n);
  }
  if (kept.empty()) throw EmptyVocabularyError("no token reaches min_freq " + std::to_string(min_freq));
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, n] : kept) tokens.push_back(std::move(token));
  return Vocabulary(tokens);
}

EncodedDoc encode(const TokenSeq& seq, const Vocabulary& vocab, std::size_t max_len, std::size_t label) {
  if (max_len < 1) throw ArgumentError("max_len must be at least 1");
  EncodedDoc doc;
  doc.label = label;
  doc.ids.assign(max_len, Vocabulary::kPad);
  const std::size_t n = std::min(max_len, seq.size());
  for (std::size_t i = 0; i < n; ++i) {
    const TokenId id = vocab.id(seq[i]);
    doc.ids[i] = id == Vocabulary::kPad ? Vocabulary::kUnk : id;
  }
  return doc;
}

TokenSeq decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  TokenSeq out;
  for (TokenId id : ids) {
    if (id == Vocabulary::kPad) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

}  // namespace ltc
