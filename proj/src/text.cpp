#include "ltc/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>
#include <istream>

#include "ltc/errors.hpp"

namespace ltc {

namespace {

void append_utf8(std::string& out, UChar32 cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool err = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, cp, err);
  if (!err) out.append(buf, static_cast<std::size_t>(len));
}

template <typename Fn>
void for_each_codepoint(std::string_view s, Fn&& fn) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 cp;
    U8_NEXT(p, i, n, cp);
    fn(cp < 0 ? 0xFFFD : cp);
  }
}

bool is_cjk(UChar32 cp) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(cp, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA ||
         script == USCRIPT_HANGUL;
}

}  // namespace

std::string clean(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFKC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = nfkc->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFKC normalization failed");
  std::string utf8;
  normalized.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  for_each_codepoint(utf8, [&](UChar32 cp) {
    if (u_isUWhiteSpace(cp)) {
      pending_space = true;
      return;
    }
    const auto type = u_charType(cp);
    if (type == U_CONTROL_CHAR || type == U_FORMAT_CHAR) return;
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    append_utf8(out, cp);
  });
  return out;
}

TokenSeq tokenize_mixed(std::string_view cleaned) {
  TokenSeq tokens;
  std::string run;
  auto flush = [&] {
    if (!run.empty()) tokens.push_back(std::move(run));
    run.clear();
  };
  for_each_codepoint(cleaned, [&](UChar32 cp) {
    if (is_cjk(cp)) {
      flush();
      std::string ch;
      append_utf8(ch, cp);
      tokens.push_back(std::move(ch));
    } else if (u_isalnum(cp)) {
      append_utf8(run, u_tolower(cp));
    } else {
      flush();
    }
  });
  flush();
  return tokens;
}

bool is_cjk_token(std::string_view token) {
  bool any = false;
  bool all = true;
  for_each_codepoint(token, [&](UChar32 cp) {
    any = true;
    all = all && is_cjk(cp);
  });
  return any && all;
}

TokenSeq remove_stopwords(const TokenSeq& seq, const StopwordSet& stopwords) {
  TokenSeq out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    if (!stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    set.insert(line.substr(b, e - b + 1));
  }
  return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stopword file " + path.string());
  return parse_stopwords(in);
}

Stopwords Stopwords::load(const std::filesystem::path& cjk_path, const std::filesystem::path& latin_path) {
  return Stopwords{load_stopwords(cjk_path), load_stopwords(latin_path)};
}

Stopwords Stopwords::defaults() {
  const std::filesystem::path dir = LTC_DATA_DIR;
  return load(dir / "stopwords_zh.txt", dir / "stopwords_en.txt");
}

TokenSeq Stopwords::apply(const TokenSeq& seq) const {
  TokenSeq out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    const auto& set = is_cjk_token(t) ? cjk : latin;
    if (!set.contains(t)) out.push_back(t);
  }
  return out;
}

TokenSeq preprocess_text(std::string_view raw, const Stopwords& stopwords) {
  return stopwords.apply(tokenize_mixed(clean(raw)));
}

}  // namespace ltc
