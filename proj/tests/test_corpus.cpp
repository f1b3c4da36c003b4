#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <set>
#include <numeric>
#include <sstream>

#include "ltc/corpus.hpp"
#include "ltc/errors.hpp"
#include "support.hpp"

using namespace ltc;

namespace {

std::size_t total(const LabeledCorpus& c) {
  const auto& m = c.class_counts();
  return std::accumulate(m.begin(), m.end(), std::size_t{0});
}

std::multiset<std::pair<std::size_t, std::string>> doc_multiset(const LabeledCorpus& c) {
  std::multiset<std::pair<std::size_t, std::string>> s;
  for (const auto& d : c.documents()) s.insert({d.id, d.label + "\t" + d.text});
  return s;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("table row parses into a labeled document") {
    std::istringstream in("RTLTP\t以和田机场为中心半径 100KM 范围内\n");
    const auto c = parse_tsv(in);
    REQUIRE(c.size() == 1);
    CHECK(c.documents()[0].label == "RTLTP");
    CHECK(c.documents()[0].text == "以和田机场为中心半径 100KM 范围内");
    CHECK(c.documents()[0].id == 0);
  }

  TEST_CASE("counts follow first-appearance label order") {
    std::istringstream in("B\tx\nA\ty\nB\tz\n");
    const auto c = parse_tsv(in);
    CHECK(c.labels() == std::vector<std::string>{"B", "A"});
    CHECK(c.count("B") == 2);
    CHECK(c.count("A") == 1);
    CHECK(c.num_classes() == 2);
    CHECK(total(c) == c.size());
  }

  TEST_CASE("three lines A,A,B") {
    std::istringstream in("A\tone\nA\ttwo\nB\tthree\n");
    const auto c = parse_tsv(in);
    CHECK(c.count("A") == 2);
    CHECK(c.count("B") == 1);
    CHECK(c.num_classes() == 2);
  }

  TEST_CASE("blank lines are skipped and ids stay dense") {
    std::istringstream in("\nA\tone\n\n\nB\ttwo\n");
    const auto c = parse_tsv(in);
    REQUIRE(c.size() == 2);
    CHECK(c.documents()[1].id == 1);
  }

  TEST_CASE("load errors") {
    SUBCASE("empty input") {
      std::istringstream in("");
      CHECK_THROWS_AS(parse_tsv(in), EmptyCorpusError);
    }
    SUBCASE("only blank lines") {
      std::istringstream in("\n\n");
      CHECK_THROWS_AS(parse_tsv(in), EmptyCorpusError);
    }
    SUBCASE("missing tab names the line") {
      std::istringstream in("A\tok\nno tab here\n");
      try {
        parse_tsv(in);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 2);
      }
    }
    SUBCASE("empty label") {
      std::istringstream in("\ttext\n");
      CHECK_THROWS_AS(parse_tsv(in), ParseError);
    }
    SUBCASE("empty text") {
      std::istringstream in("A\t\n");
      CHECK_THROWS_AS(parse_tsv(in), ParseError);
    }
    SUBCASE("missing file") {
      CHECK_THROWS_AS(load_tsv("/nonexistent/corpus.tsv"), IoError);
    }
  }

  TEST_CASE("tsv round trip through a file") {
    testing::TempDir dir("corpus");
    const auto c = synth_longtail(4, 20, 1.0, 3);
    write_tsv(c, dir / "c.tsv");
    const auto back = load_tsv(dir / "c.tsv");
    CHECK(back.documents() == c.documents());
    CHECK(back.labels() == c.labels());
  }

  TEST_CASE("long-tail counts") {
    CHECK(longtail_counts(3, 100, 1.0) == std::vector<std::size_t>{100, 50, 33});
    CHECK(longtail_counts(2, 2, 1.0) == std::vector<std::size_t>{2, 1});
    CHECK_THROWS_AS(longtail_counts(3, 100, 0.0), ArgumentError);
    CHECK_THROWS_AS(longtail_counts(3, 100, -1.0), ArgumentError);
    CHECK_THROWS_AS(longtail_counts(1, 100, 1.0), ArgumentError);
    CHECK_THROWS_AS(longtail_counts(5, 4, 1.0), ArgumentError);
  }

  TEST_CASE("generator reaches the production imbalance of 113 classes") {
    // Exponent that maps the head count 87078 onto a smallest class of 1002.
    const double s = std::log(87078.0 / 1002.0) / std::log(113.0);
    const auto counts = longtail_counts(113, 87078, s);
    REQUIRE(counts.size() == 113);
    CHECK(std::abs(static_cast<double>(counts.back()) - 1002.0) <= 1.0);
    const double ratio = static_cast<double>(counts.front()) / static_cast<double>(counts.back());
    CHECK(ratio == doctest::Approx(87078.0 / 1002.0).epsilon(2e-3));
    CHECK(ratio > 80.0);
  }

  TEST_CASE("synthetic corpus matches its count formula and is pure") {
    const auto a = synth_longtail(5, 40, 1.1, 9);
    const auto b = synth_longtail(5, 40, 1.1, 9);
    CHECK(a.documents() == b.documents());
    CHECK(a.class_counts() == longtail_counts(5, 40, 1.1));
    CHECK(total(a) == a.size());

    std::ostringstream sa, sb;
    write_tsv(a, sa);
    write_tsv(b, sb);
    CHECK(sa.str() == sb.str());

    const auto c = synth_longtail(5, 40, 1.1, 10);
    CHECK(c.documents() != a.documents());
  }

  TEST_CASE("synthetic texts mix CJK and Latin scripts") {
    const auto c = synth_longtail(6, 30, 1.0, 1);
    std::size_t with_cjk = 0, with_latin = 0;
    for (const auto& d : c.documents()) {
      CHECK(!d.text.empty());
      CHECK(d.text.find('\t') == std::string::npos);
      CHECK(d.text.find('\n') == std::string::npos);
      bool cjk = false, latin = false;
      for (unsigned char ch : d.text) {
        if (ch >= 0xE0) cjk = true;
        if (std::isupper(ch)) latin = true;
      }
      with_cjk += cjk;
      with_latin += latin;
    }
    CHECK(with_cjk > c.size() / 2);
    CHECK(with_latin > c.size() / 2);
  }

  TEST_CASE("rare-class filter") {
    const auto c = synth_longtail(4, 40, 1.0, 2);  // counts 40, 20, 13, 10
    std::vector<std::pair<std::string, std::size_t>> dropped;
    const auto kept = drop_rare_classes(c, 15, &dropped);
    CHECK(kept.num_classes() == 2);
    CHECK(kept.size() == 60);
    REQUIRE(dropped.size() == 2);
    CHECK(dropped[0] == std::pair<std::string, std::size_t>{c.labels()[2], 13});
    CHECK(dropped[1] == std::pair<std::string, std::size_t>{c.labels()[3], 10});
    CHECK(total(kept) == kept.size());
    CHECK(kDefaultMinClassCount == 1000);
  }

  TEST_CASE("stratified split") {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < 20; ++i) docs.push_back({i, "t" + std::to_string(i), i % 2 ? "B" : "A"});
    const LabeledCorpus c(docs);
    const auto s = split(c, 0.2, 4);
    CHECK(s.eval.count("A") == 2);
    CHECK(s.eval.count("B") == 2);
    CHECK(s.train.count("A") == 8);
    CHECK(s.train.labels() == c.labels());
    CHECK(s.eval.labels() == c.labels());

    SUBCASE("determinism") {
      const auto again = split(c, 0.2, 4);
      CHECK(again.train.documents() == s.train.documents());
      CHECK(again.eval.documents() == s.eval.documents());
    }
    SUBCASE("disjoint ids and multiset union") {
      auto u = doc_multiset(s.train);
      const auto e = doc_multiset(s.eval);
      for (const auto& x : e) CHECK(u.count(x) == 0);
      u.insert(e.begin(), e.end());
      CHECK(u == doc_multiset(c));
    }
  }

  TEST_CASE("split properties over random corpora") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto c = synth_longtail(2 + seed % 5, 10 + 3 * seed, 0.5 + 0.1 * static_cast<double>(seed % 7), seed);
      const double f = 0.1 + 0.05 * static_cast<double>(seed % 8);
      const auto s = split(c, f, seed);
      auto u = doc_multiset(s.train);
      const auto e = doc_multiset(s.eval);
      u.insert(e.begin(), e.end());
      CHECK(u == doc_multiset(c));
      CHECK(total(s.train) + total(s.eval) == c.size());
      for (std::size_t k = 0; k < c.num_classes(); ++k) {
        const std::size_t m = c.class_counts()[k];
        const std::size_t expected =
            std::min<std::size_t>(m - 1, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * m))));
        CHECK(s.eval.class_counts()[k] == expected);
        CHECK(s.train.class_counts()[k] >= 1);
      }
    }
  }

  TEST_CASE("split preconditions") {
    SUBCASE("single class") {
      std::vector<Document> docs{{0, "x", "A"}, {1, "y", "A"}};
      CHECK_THROWS_AS(split(LabeledCorpus(docs), 0.2, 0), StratificationError);
    }
    SUBCASE("class with one document names it") {
      std::vector<Document> docs{{0, "x", "A"}, {1, "y", "A"}, {2, "z", "LONER"}};
      try {
        split(LabeledCorpus(docs), 0.2, 0);
        FAIL("expected StratificationError");
      } catch (const StratificationError& e) {
        CHECK(std::string(e.what()).find("LONER") != std::string::npos);
      }
    }
  }
}
