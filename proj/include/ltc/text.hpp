#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ltc {

using TokenSeq = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

// NFKC-normalizes (which folds full-width Latin and digits to half-width),
// drops control and format characters, collapses whitespace runs to a single
// space and trims. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string clean(std::string_view text);

// Splits cleaned text by script. Han/kana/hangul characters become one token
// each; letter/digit runs become one lowercased token each ("CH40X" ->
// "ch40x"); whitespace and punctuation separate tokens and are dropped.
TokenSeq tokenize_mixed(std::string_view cleaned);

bool is_cjk_token(std::string_view token);

TokenSeq remove_stopwords(const TokenSeq& seq, const StopwordSet& stopwords);

// One token per line; '#' starts a comment; blank lines ignored.
StopwordSet parse_stopwords(std::istream& in);
StopwordSet load_stopwords(const std::filesystem::path& path);

// Chinese and English lists, each applied only to tokens of its script.
struct Stopwords {
  StopwordSet cjk;
  StopwordSet latin;

  static Stopwords load(const std::filesystem::path& cjk_path, const std::filesystem::path& latin_path);
  // The lists shipped in the data directory.
  static Stopwords defaults();

  TokenSeq apply(const TokenSeq& seq) const;
};

// clean -> tokenize_mixed -> stopword removal.
TokenSeq preprocess_text(std::string_view raw, const Stopwords& stopwords);

}  // namespace ltc
