#include "ltc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ltc/errors.hpp"
#include "ltc/rng.hpp"

namespace ltc {

LabeledCorpus::LabeledCorpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (const auto& d : docs_) {
    if (ids_.find(d.label) == ids_.end()) {
      ids_.emplace(d.label, labels_.size());
      labels_.push_back(d.label);
    }
  }
  index_labels();
}

LabeledCorpus::LabeledCorpus(std::vector<Document> docs, std::vector<std::string> labels)
    : docs_(std::move(docs)), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!ids_.emplace(labels_[i], i).second) {
      throw ContractViolation("duplicate label '" + labels_[i] + "'");
    }
  }
  index_labels();
}

void LabeledCorpus::index_labels() {
  counts_.assign(labels_.size(), 0);
  for (const auto& d : docs_) counts_[label_id(d.label)]++;
}

std::size_t LabeledCorpus::label_id(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) throw ContractViolation("unknown label '" + std::string(label) + "'");
  return it->second;
}

LabeledCorpus parse_tsv(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "missing tab between label and text");
    std::string label = line.substr(0, tab);
    std::string text = line.substr(tab + 1);
    if (label.empty()) throw ParseError(line_no, "empty label");
    if (text.find_first_not_of(" \t") == std::string::npos) throw ParseError(line_no, "empty text");
    docs.push_back(Document{docs.size(), std::move(text), std::move(label)});
  }
  if (docs.empty()) throw EmptyCorpusError("corpus has no usable lines");
  return LabeledCorpus(std::move(docs));
}

LabeledCorpus load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_tsv(in);
}

void write_tsv(const LabeledCorpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.documents()) out << d.label << '\t' << d.text << '\n';
}

void write_tsv(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  write_tsv(corpus, out);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::size_t> longtail_counts(std::size_t n_classes, std::size_t head_count,
                                         double zipf_exponent) {
  if (n_classes < 2) throw ArgumentError("n_classes must be at least 2");
  if (head_count < n_classes) throw ArgumentError("head_count must be at least n_classes");
  if (!(zipf_exponent > 0.0)) throw ArgumentError("zipf_exponent must be positive");
  std::vector<std::size_t> counts(n_classes);
  for (std::size_t i = 0; i < n_classes; ++i) {
    const double c = std::round(static_cast<double>(head_count) /
                                std::pow(static_cast<double>(i + 1), zipf_exponent));
    counts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(c));
  }
  return counts;
}

namespace {

// Characters and tokens resembling aviation notice phrasing. The pools are shared by
// all classes; each class draws a small signature from them.
constexpr std::string_view kCjkPool =
    "机场跑道滑行关闭施工灯光导航台测试使用不可因校飞禁航范围半径高度之间和田为中心含内外"
    "区域临时限制活动器无人驾驶开放暂停服务频率更改设备故障维修障碍物塔进近雷达通信天气"
    "预报标志记停坪面积雪除冰油料消防救援应急程序起降落复飞等待空域航线管制移动仪表着陆"
    "系统信标距离方位指点北南东西侧端头延长入口出口照明";

constexpr std::string_view kLatinPool[] = {
    "RWY",  "TWY",   "CLSD", "DME",      "ILS",      "VOR",      "NDB",     "APCH",
    "AD",   "FREQ",  "MHZ",  "WIP",      "OBST",     "LGT",      "PAPI",    "ALS",
    "TWR",  "ACT",   "AREA", "FL",       "SFC",      "AMSL",     "RADIUS",  "CENTERED",
    "UNMANNED", "AIRCRAFT", "ACTIVITY", "WILL", "TAKE", "PLACE", "MAINT", "TEST",
    "AVBL", "BTN",   "SNOW", "BRAKING",  "ACTION",   "CRANE",    "ERECTED", "APRON",
    "STAND", "FUEL", "RESCUE", "FIRE",   "CAT",      "GP",       "LLZ",     "SID",
    "STAR", "HOLDING", "PROC", "CHANGED", "PSN",     "HGT",      "GND",     "OPS"};

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = lead < 0x80 ? 1 : lead < 0xE0 ? 2 : lead < 0xF0 ? 3 : 4;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<std::string>& cjk_pool() {
  static const std::vector<std::string> pool = utf8_chars(kCjkPool);
  return pool;
}

struct SynthToken {
  std::string text;
  bool cjk = false;
};

struct ClassProfile {
  std::vector<SynthToken> signature;
  std::size_t confuser = 0;
};

// Per-slot probabilities of drawing from the class's own signature and from
// its confuser (a head class) signature; the remainder is background noise.
constexpr double kOwnTokenProb = 0.30;
constexpr double kConfuserTokenProb = 0.25;

std::string make_code(Rng& rng) {
  static constexpr char kLetters[] = "ABCDEFGHJKLMNPRSTUWXYZ";
  std::string code;
  switch (rng.index(3)) {
    case 0:
      code = std::to_string(100 * (1 + rng.index(99))) + (rng.index(2) ? "KM" : "M");
      break;
    case 1:
      code = std::string("CH") + std::to_string(10 + rng.index(90)) + kLetters[rng.index(22)];
      break;
    default:
      code = std::string(1, kLetters[rng.index(22)]) + kLetters[rng.index(22)] +
             std::to_string(rng.index(10)) + std::to_string(rng.index(10));
      break;
  }
  return code;
}

ClassProfile make_profile(std::uint64_t seed, std::size_t cls) {
  Rng rng(seed, Stream::kSynthClass, {cls});
  const auto& cjk = cjk_pool();
  const std::size_t n_latin = std::size(kLatinPool);
  ClassProfile p;
  for (int i = 0; i < 5; ++i) p.signature.push_back({cjk[rng.index(cjk.size())], true});
  for (int i = 0; i < 3; ++i) p.signature.push_back({std::string(kLatinPool[rng.index(n_latin)]), false});
  p.signature.push_back({make_code(rng), false});
  p.confuser = cls == 0 ? 1 : static_cast<std::size_t>(rng.index(std::min<std::size_t>(cls, 3)));
  return p;
}

std::string render(const std::vector<SynthToken>& tokens, Rng& rng) {
  std::string out;
  bool prev_cjk = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (i > 0 && !(prev_cjk && t.cjk)) out += ' ';
    out += t.text;
    prev_cjk = t.cjk;
    if (i + 1 < tokens.size() && rng.uniform01() < 0.12) {
      out += t.cjk ? "，" : ",";
      prev_cjk = false;
    }
  }
  out += prev_cjk ? "。" : ".";
  return out;
}

std::string synth_label(std::size_t cls) {
  std::string label = "Q";
  for (std::size_t k = 0, v = cls; k < 3; ++k, v /= 26) label.insert(1, 1, static_cast<char>('A' + v % 26));
  return label;
}

}  // namespace

LabeledCorpus synth_longtail(std::size_t n_classes, std::size_t head_count, double zipf_exponent,
                             std::uint64_t seed) {
  if (n_classes > 26 * 26 * 26) throw ArgumentError("n_classes too large for label scheme");
  const auto counts = longtail_counts(n_classes, head_count, zipf_exponent);
  std::vector<ClassProfile> profiles;
  profiles.reserve(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) profiles.push_back(make_profile(seed, c));

  const auto& cjk = cjk_pool();
  const std::size_t n_latin = std::size(kLatinPool);
  std::vector<Document> docs;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto& own = profiles[c].signature;
    const auto& conf = profiles[profiles[c].confuser].signature;
    const std::string label = synth_label(c);
    for (std::size_t k = 0; k < counts[c]; ++k) {
      Rng rng(seed, Stream::kSynthDoc, {c, k});
      const std::size_t len = 6 + rng.index(7);
      std::vector<SynthToken> tokens;
      tokens.reserve(len);
      for (std::size_t s = 0; s < len; ++s) {
        const double u = rng.uniform01();
        if (u < kOwnTokenProb) {
          tokens.push_back(own[rng.index(own.size())]);
        } else if (u < kOwnTokenProb + kConfuserTokenProb) {
          tokens.push_back(conf[rng.index(conf.size())]);
        } else if (rng.index(2) == 0) {
          tokens.push_back({cjk[rng.index(cjk.size())], true});
        } else {
          tokens.push_back({std::string(kLatinPool[rng.index(n_latin)]), false});
        }
      }
      docs.push_back(Document{docs.size(), render(tokens, rng), label});
    }
  }
  return LabeledCorpus(std::move(docs));
}

LabeledCorpus drop_rare_classes(const LabeledCorpus& corpus, std::size_t min_count,
                                std::vector<std::pair<std::string, std::size_t>>* dropped) {
  std::vector<std::string> kept_labels;
  for (std::size_t c = 0; c < corpus.num_classes(); ++c) {
    if (corpus.class_counts()[c] >= min_count) {
      kept_labels.push_back(corpus.labels()[c]);
    } else if (dropped) {
      dropped->emplace_back(corpus.labels()[c], corpus.class_counts()[c]);
    }
  }
  std::vector<Document> kept;
  for (const auto& d : corpus.documents()) {
    if (corpus.count(d.label) >= min_count) kept.push_back(d);
  }
  if (kept.empty()) throw EmptyCorpusError("no class has at least " + std::to_string(min_count) + " documents");
  return LabeledCorpus(std::move(kept), std::move(kept_labels));
}

CorpusSplit split(const LabeledCorpus& corpus, double eval_fraction, std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ArgumentError("eval_fraction must lie in (0, 1)");
  if (corpus.num_classes() < 2) throw StratificationError("corpus needs at least two classes");
  std::string small;
  for (std::size_t c = 0; c < corpus.num_classes(); ++c) {
    if (corpus.class_counts()[c] < 2) small += (small.empty() ? "" : ", ") + corpus.labels()[c];
  }
  if (!small.empty()) throw StratificationError("classes with fewer than 2 documents: " + small);

  std::vector<std::vector<std::size_t>> members(corpus.num_classes());
  const auto& docs = corpus.documents();
  for (std::size_t i = 0; i < docs.size(); ++i) members[corpus.label_id(docs[i].label)].push_back(i);

  std::vector<bool> to_eval(docs.size(), false);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    const double want = std::round(eval_fraction * static_cast<double>(m.size()));
    std::size_t n_eval = std::max<std::size_t>(1, static_cast<std::size_t>(want));
    n_eval = std::min(n_eval, m.size() - 1);
    Rng rng(seed, Stream::kSplit, {c});
    rng.shuffle(std::span<std::size_t>(m));
    for (std::size_t k = 0; k < n_eval; ++k) to_eval[m[k]] = true;
  }

  std::vector<Document> train, eval;
  for (std::size_t i = 0; i < docs.size(); ++i) (to_eval[i] ? eval : train).push_back(docs[i]);
  return CorpusSplit{LabeledCorpus(std::move(train), corpus.labels()),
                     LabeledCorpus(std::move(eval), corpus.labels()), seed};
}

}  // namespace ltc
