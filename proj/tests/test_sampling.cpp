#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ltc/corpus.hpp"
#include "ltc/errors.hpp"
#include "ltc/sampling.hpp"

using namespace ltc;

namespace {

void check_vector(const std::vector<double>& got, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

// Oracles written independently of the library.
std::vector<double> oracle_ibs(const std::vector<std::size_t>& m) {
  double total = 0;
  for (auto x : m) total += static_cast<double>(x);
  std::vector<double> p;
  for (auto x : m) p.push_back(static_cast<double>(x) / total);
  return p;
}

std::vector<double> oracle_srs(const std::vector<std::size_t>& m) {
  double total = 0;
  for (auto x : m) total += std::sqrt(static_cast<double>(x));
  std::vector<double> p;
  for (auto x : m) p.push_back(std::sqrt(static_cast<double>(x)) / total);
  return p;
}

std::vector<std::size_t> labels_for(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], c);
  // Interleave so document index does not reveal the class.
  std::mt19937_64 gen(99);
  std::shuffle(labels.begin(), labels.end(), gen);
  return labels;
}

double chi_square_p(const std::vector<std::size_t>& observed, const std::vector<double>& probs) {
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * probs[i];
    const double d = static_cast<double>(observed[i]) - e;
    stat += d * d / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

std::vector<std::size_t> class_frequencies(const EpochPlan& plan, const std::vector<std::size_t>& labels,
                                           std::size_t S) {
  std::vector<std::size_t> freq(S, 0);
  for (const auto& b : plan.batches) {
    for (auto i : b) ++freq[labels[i]];
  }
  return freq;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("instance-balanced probabilities") {
    const std::vector<std::size_t> a{3, 1}, b{5, 5, 5};
    check_vector(ibs_probs(a), {0.75, 0.25});
    check_vector(ibs_probs(b), {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const std::vector<std::size_t> z{3, 0};
    CHECK_THROWS_AS(ibs_probs(z), EmptyClassError);
  }

  TEST_CASE("published head/tail counts") {
    const std::vector<std::size_t> m{87078, 1002};
    const auto ibs = ibs_probs(m);
    CHECK(ibs[0] / ibs[1] == doctest::Approx(86.9).epsilon(1e-3));
    const auto srs = srs_probs(m);
    CHECK(srs[0] / srs[1] == doctest::Approx(9.32).epsilon(1e-3));
    check_vector(srs, oracle_srs(m));
  }

  TEST_CASE("class-balanced probabilities") {
    check_vector(cbs_probs(4), {0.25, 0.25, 0.25, 0.25});
    check_vector(cbs_probs(1), {1.0});
    const auto p = cbs_probs(113);
    REQUIRE(p.size() == 113);
    for (double x : p) CHECK(std::abs(x - 1.0 / 113) <= 1e-15);
    CHECK_THROWS_AS(cbs_probs(0), ArgumentError);
  }

  TEST_CASE("square-root probabilities") {
    const std::vector<std::size_t> a{4, 1}, b{9, 9};
    check_vector(srs_probs(a), {2.0 / 3, 1.0 / 3});
    check_vector(srs_probs(b), {0.5, 0.5});
  }

  TEST_CASE("progressive mixing") {
    const std::vector<std::size_t> m{3, 1};
    CHECK(pbs_probs(m, 0, 5) == ibs_probs(m));
    CHECK(pbs_probs(m, 5, 5) == cbs_probs(2));
    // t=1, T=2: halfway between [0.75, 0.25] and [0.5, 0.5].
    const auto mid = pbs_probs(m, 1, 2);
    check_vector(mid, {0.5 * 0.5 + 0.5 * 0.75, 0.5 * 0.5 + 0.5 * 0.25});
    CHECK(mid[0] + mid[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(pbs_probs(m, 3, 2), ArgumentError);
    CHECK_THROWS_AS(pbs_probs(m, 0, 0), ArgumentError);
  }

  TEST_CASE("every strategy yields a distribution on random counts") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::size_t> m(1 + gen() % 40);
      for (auto& x : m) x = 1 + gen() % 100000;
      const std::size_t T = 1 + gen() % 20;
      const std::size_t t = gen() % (T + 1);
      for (const auto& p : {ibs_probs(m), cbs_probs(m.size()), srs_probs(m), pbs_probs(m, t, T)}) {
        double sum = 0;
        for (double x : p) {
          CHECK(x >= 0.0);
          sum += x;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
      check_vector(ibs_probs(m), oracle_ibs(m), 1e-15);
      check_vector(srs_probs(m), oracle_srs(m), 1e-15);
    }
  }

  TEST_CASE("progressive mixing is pointwise monotone") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::size_t> m(2 + gen() % 30);
      for (auto& x : m) x = 1 + gen() % 5000;
      const double avg = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
      const std::size_t T = 1 + gen() % 15;
      for (std::size_t t = 0; t < T; ++t) {
        const auto now = pbs_probs(m, t, T);
        const auto next = pbs_probs(m, t + 1, T);
        for (std::size_t i = 0; i < m.size(); ++i) {
          if (static_cast<double>(m[i]) < avg) CHECK(next[i] >= now[i] - 1e-15);
          if (static_cast<double>(m[i]) > avg) CHECK(next[i] <= now[i] + 1e-15);
        }
      }
    }
  }

  TEST_CASE("epoch schedule runs from IBS to CBS") {
    const std::vector<std::size_t> m{30, 10, 5};
    const SamplerSpec spec{SamplerKind::kPbs, 5, 0};
    CHECK(epoch_probs(spec, m, 0) == ibs_probs(m));
    CHECK(epoch_probs(spec, m, 4) == cbs_probs(3));
    check_vector(epoch_probs(spec, m, 2), pbs_probs(m, 1, 2));
    CHECK_THROWS_AS(epoch_probs(spec, m, 5), ArgumentError);
    CHECK(epoch_probs({SamplerKind::kPbs, 1, 0}, m, 0) == ibs_probs(m));
  }

  TEST_CASE("parse sampler names") {
    CHECK(parse_sampler("ibs") == SamplerKind::kIbs);
    CHECK(parse_sampler("pbs") == SamplerKind::kPbs);
    CHECK(to_string(SamplerKind::kSrs) == "srs");
    CHECK_THROWS_AS(parse_sampler("xyz"), ArgumentError);
  }

  TEST_CASE("class index partitions the training indices") {
    const std::vector<std::size_t> labels{0, 1, 0, 2, 2, 2, 1};
    const ClassIndex idx(labels, 3, 4);
    CHECK(idx.class_counts() == std::vector<std::size_t>{2, 2, 3});
    std::set<std::size_t> seen;
    for (std::size_t c = 0; c < 3; ++c) {
      for (auto i : idx.per_class()[c]) {
        CHECK(labels[i] == c);
        CHECK(seen.insert(i).second);
      }
    }
    CHECK(seen.size() == labels.size());
    CHECK_THROWS_AS(ClassIndex(labels, 4, 0), EmptyClassError);
  }

  TEST_CASE("plan shape and determinism") {
    const auto counts = longtail_counts(5, 100, 1.0);
    const auto labels = labels_for(counts);
    const ClassIndex idx(labels, counts.size(), 1);
    const std::size_t N = labels.size();
    for (auto kind : {SamplerKind::kIbs, SamplerKind::kCbs, SamplerKind::kSrs, SamplerKind::kPbs}) {
      const SamplerSpec spec{kind, 4, 77};
      const auto plan = plan_epoch(idx, spec, 2, 16);
      const std::size_t K = (N + 15) / 16;
      CHECK(plan.batches.size() == K);
      for (std::size_t b = 0; b + 1 < plan.batches.size(); ++b) CHECK(plan.batches[b].size() == 16);
      for (const auto& b : plan.batches) {
        for (auto i : b) CHECK(i < N);
      }
      CHECK(plan_epoch(idx, spec, 2, 16) == plan);
      CHECK(plan_epoch(idx, spec, 3, 16) != plan);
      const auto fixed = plan_epoch(idx, spec, 1, 10, 7);
      CHECK(fixed.batches.size() == 7);
      for (const auto& b : fixed.batches) CHECK(b.size() == 10);
    }
  }

  TEST_CASE("instance-balanced plan is one shuffled pass") {
    const std::vector<std::size_t> labels = labels_for({7, 3, 2});
    const ClassIndex idx(labels, 3, 0);
    const auto plan = plan_epoch(idx, {SamplerKind::kIbs, 1, 3}, 0, 5);
    std::vector<std::size_t> all;
    for (const auto& b : plan.batches) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(labels.size());
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);
    CHECK(plan.batches.back().size() == 2);
  }

  TEST_CASE("every class member is visited before any repeats") {
    const std::vector<std::size_t> counts{40, 9, 4, 1};
    const auto labels = labels_for(counts);
    const ClassIndex idx(labels, counts.size(), 2);
    for (auto kind : {SamplerKind::kCbs, SamplerKind::kSrs, SamplerKind::kIbs}) {
      const auto plan = plan_epoch(idx, {kind, 1, 6}, 0, 8, 50);
      std::vector<std::vector<std::size_t>> seq(counts.size());
      for (const auto& b : plan.batches) {
        for (auto i : b) seq[labels[i]].push_back(i);
      }
      for (std::size_t c = 0; c < counts.size(); ++c) {
        for (std::size_t start = 0; start < seq[c].size(); start += counts[c]) {
          const std::size_t end = std::min(seq[c].size(), start + counts[c]);
          std::set<std::size_t> block(seq[c].begin() + static_cast<std::ptrdiff_t>(start),
                                      seq[c].begin() + static_cast<std::ptrdiff_t>(end));
          CHECK(block.size() == end - start);
        }
      }
    }
  }

  TEST_CASE("realized class frequencies fit each strategy (chi-square)") {
    constexpr std::size_t kBatch = 100, kBatches = 1000;  // 10^5 draws
    for (std::size_t S : {2, 10, 50}) {
      const auto counts = longtail_counts(S, 40 * S, 1.0);
      const auto labels = labels_for(counts);
      const ClassIndex idx(labels, S, 3);
      for (std::uint64_t seed : {11, 12, 13}) {
        for (auto kind : {SamplerKind::kIbs, SamplerKind::kCbs, SamplerKind::kSrs, SamplerKind::kPbs}) {
          const SamplerSpec spec{kind, 5, seed};
          const std::size_t epoch = kind == SamplerKind::kPbs ? 2 : 0;
          const auto freq = class_frequencies(plan_epoch(idx, spec, epoch, kBatch, kBatches), labels, S);
          const auto probs = epoch_probs(spec, counts, epoch);
          const double p = chi_square_p(freq, probs);
          INFO("S=" << S << " seed=" << seed << " sampler=" << to_string(kind) << " p=" << p);
          CHECK(p > 0.01);
        }
      }
    }
  }

  TEST_CASE("two-class frequency targets") {
    const std::vector<std::size_t> counts{300, 100};
    const auto labels = labels_for(counts);
    const ClassIndex idx(labels, 2, 0);
    const auto cbs = class_frequencies(plan_epoch(idx, {SamplerKind::kCbs, 1, 1}, 0, 100, 1000), labels, 2);
    CHECK(chi_square_p(cbs, {0.5, 0.5}) > 0.01);
    CHECK(static_cast<double>(cbs[0]) / 1e5 == doctest::Approx(0.5).epsilon(0.02));
    const auto ibs = class_frequencies(plan_epoch(idx, {SamplerKind::kIbs, 1, 1}, 0, 100, 1000), labels, 2);
    CHECK(static_cast<double>(ibs[0]) / 1e5 == doctest::Approx(0.75).epsilon(0.01));
  }
}
