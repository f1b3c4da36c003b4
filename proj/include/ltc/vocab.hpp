#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ltc/text.hpp"

namespace ltc {

using TokenId = std::int32_t;

// Dense token <-> id mapping with two reserved ids.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  // Appends `tokens` after the reserved entries, in the given order.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  std::size_t size() const { return id_to_token_.size(); }
  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  // FNV-1a over the `id<TAB>token` lines.
  std::uint64_t hash() const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

// Tokens with frequency >= min_freq, ordered by descending frequency and then
// lexicographically. Throws EmptyVocabularyError if nothing qualifies.
Vocabulary build_vocab(std::span<const TokenSeq> docs, std::size_t min_freq);

struct EncodedDoc {
  std::vector<TokenId> ids;
  std::size_t label = 0;

  bool operator==(const EncodedDoc&) const = default;
};

// Maps tokens to ids (unk for OOV), truncates to max_len and right-pads.
EncodedDoc encode(const TokenSeq& seq, const Vocabulary& vocab, std::size_t max_len,
                  std::size_t label = 0);

// Inverse of encode up to the first pad id.
TokenSeq decode(std::span<const TokenId> ids, const Vocabulary& vocab);

}  // namespace ltc
