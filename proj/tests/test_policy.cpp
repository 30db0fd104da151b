#include <doctest.h>

#include <cmath>
#include <random>

#include "geoseq/beam_search.hpp"
#include "geoseq/errors.hpp"
#include "geoseq/features.hpp"
#include "geoseq/policy.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace geoseq;
using support::random_model;
using support::random_query;

TEST_CASE("featurize") {
  const QueryFeatures f = featurize("abcd", 4096);
  const auto has = [&](std::uint32_t id) { return std::binary_search(f.ids.begin(), f.ids.end(), id); };
  CHECK(has(static_cast<std::uint32_t>(fnv1a64("abc") % 4096)));
  CHECK(has(static_cast<std::uint32_t>(fnv1a64("bcd") % 4096)));
  CHECK(f.ids.size() <= 3);
  CHECK(f.ids.size() >= 2);
  CHECK(featurize("abcd") == featurize("abcd"));
  CHECK(featurize("No.385 A Road") == featurize("no.385 a road"));
  CHECK(featurize("").ids.size() == 1);
  CHECK(featurize("ab").ids.size() == 1);
  CHECK(std::is_sorted(f.ids.begin(), f.ids.end()));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK_THROWS_AS(featurize("x", 0), InvalidArgument);
}

TEST_CASE("next-symbol distributions are valid") {
  std::mt19937_64 rng(1);
  PolicyModel zero(64, 9);
  const auto uniform = next_distribution(zero, featurize("anything", 64), 0, kStartSymbol);
  for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 32.0).epsilon(1e-15));

  for (int t = 0; t < 200; ++t) {
    const PolicyModel m = random_model(rng, 64, 9, t < 100 ? 1.0 : 10.0);
    const QueryFeatures f = featurize(random_query(rng), 64);
    for (int pos = 0; pos < 9; ++pos) {
      const auto p = next_distribution(m, f, pos, pos == 0 ? kStartSymbol : pos);
      double sum = 0.0;
      for (double v : p) {
        REQUIRE(v > 0.0);
        sum += v;
      }
      REQUIRE(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax shift invariance, temperature and monotonicity") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> w(0.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    SymbolScores l;
    for (double& v : l) v = w(rng);
    SymbolScores shifted = l;
    for (double& v : shifted) v += 123.456;
    const auto p = softmax(l), q = softmax(shifted);
    for (int i = 0; i < kVocabSize; ++i) REQUIRE(std::abs(p[i] - q[i]) <= 1e-12);

    const auto lsm = log_softmax(l);
    const auto ref = oracle::plain_log_softmax(l);
    for (int i = 0; i < kVocabSize; ++i) REQUIRE(std::abs(lsm[i] - ref[static_cast<std::size_t>(i)]) <= 1e-12);

    SymbolScores half = l;
    for (double& v : half) v /= 2.0;
    const auto tempered = softmax(l, 2.0), direct = softmax(half);
    for (int i = 0; i < kVocabSize; ++i) REQUIRE(std::abs(tempered[i] - direct[i]) <= 1e-15);
  }

  PolicyModel m = random_model(rng, 16, 3, 1.0);
  const QueryFeatures f = featurize("monotone", 16);
  const auto before = next_distribution(m, f, 1, 7);
  m.feat_row(f.ids.front(), 1)[5] += 0.01;
  const auto after = next_distribution(m, f, 1, 7);
  CHECK(after[5] > before[5]);
}

TEST_CASE("sampling is seeded and records untempered log-probs") {
  std::mt19937_64 rng(3);
  const PolicyModel m = random_model(rng, 64, 9, 1.0);
  const QueryFeatures f = featurize("seeded query", 64);
  const Rollout a = sample_rollout(m, f, 0.7, 99);
  const Rollout b = sample_rollout(m, f, 0.7, 99);
  CHECK(a.tokens == b.tokens);
  CHECK(a.token_log_probs == b.token_log_probs);
  REQUIRE(a.tokens.size() == 9);

  double total = 0.0;
  int prev = kStartSymbol;
  for (int pos = 0; pos < 9; ++pos) {
    const auto ref = oracle::plain_log_softmax(m.logits(f, pos, prev));
    const int tok = a.tokens[static_cast<std::size_t>(pos)];
    CHECK(a.token_log_probs[static_cast<std::size_t>(pos)] == doctest::Approx(ref[static_cast<std::size_t>(tok)]).epsilon(1e-12));
    total += a.token_log_probs[static_cast<std::size_t>(pos)];
    prev = tok;
  }
  CHECK(a.total_log_prob == doctest::Approx(total).epsilon(1e-12));
  CHECK(a.text().size() == 17);
  CHECK(validate(a.text()).text() == tokens_to_string(a.tokens));

  bool differs = false;
  for (std::uint64_t s = 0; s < 20 && !differs; ++s) differs = sample_rollout(m, f, 1.0, s).tokens != a.tokens;
  CHECK(differs);
}

TEST_CASE("first-symbol sampling frequencies follow the distribution") {
  std::mt19937_64 rng(4);
  const PolicyModel m = random_model(rng, 16, 2, 0.7);
  const QueryFeatures f = featurize("freq", 16);
  const auto p = next_distribution(m, f, 0, kStartSymbol);
  std::array<int, kVocabSize> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_rollout(m, f, 1.0, static_cast<std::uint64_t>(i)).tokens[0])];
  for (int s = 0; s < kVocabSize; ++s) {
    const double sd = std::sqrt(p[s] * (1.0 - p[s]) / n);
    CHECK(std::abs(counts[static_cast<std::size_t>(s)] / static_cast<double>(n) - p[s]) <= 5.0 * sd + 1e-9);
  }
}

TEST_CASE("low temperature sampling equals greedy decoding") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const PolicyModel m = random_model(rng, 64, 9, 1.0);
    const QueryFeatures f = featurize(random_query(rng), 64);
    CHECK(sample_rollout(m, f, 1e-6, static_cast<std::uint64_t>(t)).tokens == greedy_decode(m, f).tokens);
  }
}

TEST_CASE("degenerate model always samples its path") {
  PolicyModel m(16, 9);
  const std::vector<int> path{27, 31, 4, 13, 17, 8, 19, 12, 25};
  for (int pos = 0; pos < 9; ++pos) {
    for (int prev = 0; prev < kPrevStates; ++prev) m.prev_row(pos, prev)[static_cast<std::size_t>(path[static_cast<std::size_t>(pos)])] = 1000.0;
  }
  const QueryFeatures f = featurize("x", 16);
  for (std::uint64_t s = 0; s < 100; ++s) REQUIRE(sample_rollout(m, f, 1.0, s).tokens == path);
  CHECK(tokens_to_geohash(path).text() == "vz4ej8mdt");
}

TEST_CASE("greedy ties go to the lowest symbol") {
  PolicyModel m(8, 4);
  const Rollout r = greedy_decode(m, featurize("tie", 8));
  CHECK(r.tokens == std::vector<int>{0, 0, 0, 0});
  CHECK(r.total_log_prob == doctest::Approx(4.0 * std::log(1.0 / 32.0)).epsilon(1e-12));
}

TEST_CASE("beam search equals exhaustive enumeration at length 3") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const PolicyModel m = random_model(rng, 32, 3, 1.5);
    const QueryFeatures f = featurize(random_query(rng), 32);
    const int top_k = 1 + t % 20;
    const auto beams = beam_search(m, f, 1024, top_k);
    const auto truth = oracle::exhaustive_top_k(kVocabSize, 3, top_k, [&](const std::vector<int>& prefix) {
      const int pos = static_cast<int>(prefix.size());
      return oracle::plain_log_softmax(m.logits(f, pos, pos == 0 ? kStartSymbol : prefix.back()));
    });
    REQUIRE(beams.size() == truth.size());
    for (std::size_t i = 0; i < beams.size(); ++i) {
      REQUIRE(beams[i].geohash.text() == tokens_to_string(truth[i].tokens));
      REQUIRE(std::abs(beams[i].log_prob - truth[i].log_prob) <= 1e-9);
    }
  }
}

TEST_CASE("beam search on a two-symbol toy") {
  const double la = std::log(0.6), lb = std::log(0.4);
  const auto beams = beam_search(2, 2, 2, 2, [&](std::span<const int>, std::span<double> out) {
    out[0] = la;
    out[1] = lb;
  });
  REQUIRE(beams.size() == 2);
  CHECK(beams[0].tokens == std::vector<int>{0, 0});
  CHECK(std::exp(beams[0].log_prob) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(beams[1].tokens == std::vector<int>{0, 1});
  CHECK(std::exp(beams[1].log_prob) == doctest::Approx(0.24).epsilon(1e-12));

  CHECK_THROWS_AS(beam_search(2, 2, 2, 3, [](std::span<const int>, std::span<double>) {}), InvalidArgument);
  CHECK_THROWS_AS(beam_search(2, 2, 2, 0, [](std::span<const int>, std::span<double>) {}), InvalidArgument);
}

TEST_CASE("beam ties resolve lexicographically and deterministically") {
  PolicyModel m(8, 3);
  const QueryFeatures f = featurize("flat", 8);
  const auto beams = beam_search(m, f, 40, 40);
  REQUIRE(beams.size() == 40);
  for (std::size_t i = 0; i < beams.size(); ++i) {
    const int a = static_cast<int>(i) / 32, b = static_cast<int>(i) % 32;
    CHECK(beams[i].geohash.text() == tokens_to_string(std::vector<int>{0, a, b}));
  }
  const auto again = beam_search(m, f, 40, 40);
  for (std::size_t i = 0; i < beams.size(); ++i) CHECK(again[i].geohash == beams[i].geohash);
}

TEST_CASE("width-1 beam equals greedy and beams are sorted") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const PolicyModel m = random_model(rng, 64, 9, 1.0);
    const QueryFeatures f = featurize(random_query(rng), 64);
    const Rollout g = greedy_decode(m, f);
    const auto one = beam_search(m, f, 1, 1);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0].geohash.text() == tokens_to_string(g.tokens));
    REQUIRE(one[0].log_prob == doctest::Approx(g.total_log_prob).epsilon(1e-12));

    const auto many = beam_search(m, f, 50, 50);
    for (std::size_t i = 1; i < many.size(); ++i) REQUIRE(many[i - 1].log_prob >= many[i].log_prob);
  }
}
