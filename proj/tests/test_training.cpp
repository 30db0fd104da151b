#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "geoseq/errors.hpp"
#include "geoseq/model_io.hpp"
#include "geoseq/reward.hpp"
#include "geoseq/training.hpp"
#include "test_support.hpp"

using namespace geoseq;
using namespace support;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "geoseq_test_training";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("MLE gradient matches finite differences") {
  std::mt19937_64 rng(21);
  for (int instance = 0; instance < 20; ++instance) {
    PolicyModel m = random_model(rng, 8, 3, 1.0);
    const QueryFeatures f = featurize("query " + std::to_string(instance), 8);
    const std::vector<int> tokens = random_tokens(rng, 3);
    const ParamGradient g = log_likelihood_gradient(m, f, tokens);
    const FdResult r = finite_difference_check(
        m, [&](const PolicyModel& x) { return sequence_log_likelihood(x, f, tokens); }, g);
    CHECK(r.relative_error <= 1e-6);
    CHECK(r.max_abs_error <= 1e-7);
  }
}

TEST_CASE("GRPO surrogate gradient matches finite differences") {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int instance = 0; checked < 20; ++instance) {
    REQUIRE(instance < 200);
    const PolicyModel old = random_model(rng, 8, 3, 1.0);
    const auto batch = sampled_batch(rng, old, 2 + instance % 2, 4);
    PolicyModel current = old;
    perturb(rng, current, 0.15);
    const double eps = 0.2;
    if (kink_margin(current, batch, eps) < 1e-3) continue;
    const double kl = instance % 2 == 0 ? 0.0 : 0.3;
    const ParamGradient g = grpo_gradient(current, old, batch, eps, kl);
    const FdResult r = finite_difference_check(
        current, [&](const PolicyModel& x) { return grpo_objective(x, old, batch, eps, kl); }, g);
    CHECK(r.relative_error <= 1e-6);
    CHECK(r.max_abs_error <= 1e-7);
    ++checked;
  }
}

TEST_CASE("GRPO gradient on a two-symbol length-2 toy") {
  std::mt19937_64 rng(23);
  const PolicyModel old = random_model(rng, 4, 2, 0.5);
  GrpoBatchItem item;
  item.feats = featurize("toy", 4);
  const std::vector<std::vector<int>> paths{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (const auto& p : paths) {
    Rollout r;
    r.tokens = p;
    int prev = kStartSymbol;
    for (int t = 0; t < 2; ++t) {
      const auto lp = log_softmax(old.logits(item.feats, t, prev));
      r.token_log_probs.push_back(lp[static_cast<std::size_t>(p[static_cast<std::size_t>(t)])]);
      r.total_log_prob += r.token_log_probs.back();
      prev = p[static_cast<std::size_t>(t)];
    }
    item.rollouts.push_back(r);
  }
  item.advantages = group_advantages(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  const std::vector<GrpoBatchItem> batch{item};
  for (double scale : {0.0, 0.05, 0.3}) {
    PolicyModel current = old;
    perturb(rng, current, scale);
    if (scale > 0.0 && kink_margin(current, batch, 0.2) < 1e-3) continue;
    const ParamGradient g = grpo_gradient(current, old, batch, 0.2, 0.0);
    const FdResult r = finite_difference_check(
        current, [&](const PolicyModel& x) { return grpo_objective(x, old, batch, 0.2, 0.0); }, g);
    CHECK(r.relative_error <= 1e-6);
  }
}

TEST_CASE("at the snapshot the surrogate gradient is the advantage-weighted score") {
  std::mt19937_64 rng(24);
  const PolicyModel old = random_model(rng, 8, 3, 1.0);
  const auto batch = sampled_batch(rng, old, 3, 4);
  const ParamGradient g = grpo_gradient(old, old, batch, 0.2, 0.0);
  double tokens = 0.0;
  for (const auto& item : batch) tokens += static_cast<double>(item.rollouts.size() * 3);
  std::vector<ParamGradient> parts;
  std::vector<double> weights;
  for (const auto& item : batch) {
    for (std::size_t i = 0; i < item.rollouts.size(); ++i) {
      parts.push_back(log_likelihood_gradient(old, item.feats, item.rollouts[i].tokens));
      weights.push_back(item.advantages[i] / tokens);
    }
  }
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < kPrevStates; ++p) {
      for (int k = 0; k < kVocabSize; ++k) {
        double expected = 0.0;
        for (std::size_t j = 0; j < parts.size(); ++j) expected += weights[j] * parts[j].prev_component(t, p, k);
        REQUIRE(std::abs(g.prev_component(t, p, k) - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("zero advantages leave the model unchanged") {
  std::mt19937_64 rng(25);
  const PolicyModel old = random_model(rng, 8, 9, 1.0);
  auto batch = sampled_batch(rng, old, 3, 8);
  for (auto& item : batch) std::fill(item.advantages.begin(), item.advantages.end(), 0.0);
  PolicyModel m = old;
  grpo_step(m, old, batch, {0.2, 5.0, 0.0});
  CHECK(m == old);
  grpo_step(m, old, batch, {0.2, 5.0, 0.5});
  CHECK(m == old);
}

TEST_CASE("GRPO input validation") {
  std::mt19937_64 rng(26);
  const PolicyModel old = random_model(rng, 8, 9, 1.0);
  PolicyModel m = old;
  auto batch = sampled_batch(rng, old, 2, 4);
  CHECK_THROWS_AS(grpo_step(m, old, std::vector<GrpoBatchItem>{}, {}), InvalidArgument);
  auto ragged = batch;
  ragged[1].rollouts.pop_back();
  ragged[1].advantages.pop_back();
  CHECK_THROWS_AS(grpo_step(m, old, ragged, {}), InvalidArgument);
  auto single = sampled_batch(rng, old, 1, 2);
  single[0].rollouts.pop_back();
  single[0].advantages.pop_back();
  CHECK_THROWS_AS(grpo_step(m, old, single, {}), InvalidArgument);
  GrpoConfig config;
  config.group_size = 1;
  std::vector<GrpoPrompt> prompts{{"p", featurize("p"), {39.9, 116.3}}};
  PolicyModel fresh;
  CHECK_THROWS_AS(grpo_train(fresh, prompts, config, {}), InvalidArgument);
}

TEST_CASE("MLE memorizes single and disjoint pairs") {
  PolicyModel m;
  const std::vector<std::pair<std::string, Geohash>> one{{"Central Library", Geohash::parse("wx4ej8mdt")}};
  MleOptions o;
  o.epochs = 30;
  o.learning_rate = 0.2;
  mle_train(m, make_mle_examples(m, one), o);
  CHECK(tokens_to_string(greedy_decode(m, featurize("Central Library")).tokens) == "wx4ej8mdt");

  PolicyModel two;
  const std::vector<std::pair<std::string, Geohash>> pairs{{"Central Library", Geohash::parse("wx4ej8mdt")},
                                                           {"harbor museum", Geohash::parse("u4pruydqq")}};
  o.epochs = 60;
  mle_train(two, make_mle_examples(two, pairs), o);
  CHECK(tokens_to_string(greedy_decode(two, featurize("Central Library")).tokens) == "wx4ej8mdt");
  CHECK(tokens_to_string(greedy_decode(two, featurize("harbor museum")).tokens) == "u4pruydqq");
}

TEST_CASE("MLE log-likelihood rises across epochs without shuffling") {
  std::mt19937_64 rng(27);
  PolicyModel m;
  std::vector<std::pair<std::string, Geohash>> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back({"place " + std::to_string(i * 7919 % 1000),
                     encode({39.9 + 0.001 * static_cast<double>(rng() % 100), 116.3 + 0.001 * static_cast<double>(rng() % 100)})});
  }
  MleOptions o;
  o.epochs = 15;
  o.shuffle = false;
  const MleReport report = mle_train(m, make_mle_examples(m, pairs), o);
  REQUIRE(report.epoch_mean_log_likelihood.size() == 15);
  for (std::size_t e = 1; e < report.epoch_mean_log_likelihood.size(); ++e) {
    CHECK(report.epoch_mean_log_likelihood[e] >= report.epoch_mean_log_likelihood[e - 1]);
  }
}

TEST_CASE("MLE rejects length mismatches") {
  PolicyModel m;
  const std::vector<std::pair<std::string, Geohash>> bad{{"x", Geohash::parse("wx4ej8md")}};
  CHECK_THROWS_AS(make_mle_examples(m, bad), InvalidArgument);
}

TEST_CASE("training is deterministic under a fixed seed") {
  std::vector<std::pair<std::string, Geohash>> pairs;
  std::vector<GrpoPrompt> prompts;
  for (int i = 0; i < 20; ++i) {
    const LatLon p{39.95 + 0.002 * i, 116.30 + 0.001 * i};
    pairs.push_back({"No." + std::to_string(i) + " Test Road", encode(p)});
    prompts.push_back({std::to_string(i), featurize("50 meters north of No." + std::to_string(i) + " Test Road"), p});
  }
  auto run = [&] {
    PolicyModel m;
    MleOptions o;
    o.epochs = 5;
    o.seed = 3;
    mle_train(m, make_mle_examples(m, pairs), o);
    GrpoConfig c;
    c.epochs = 2;
    c.seed = 4;
    const auto stats = grpo_train(m, prompts, c, {});
    return std::make_pair(m, stats.back().mean_reward);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("model files round trip") {
  std::mt19937_64 rng(28);
  PolicyModel m(64, 9);
  std::normal_distribution<double> w(0.0, 1.0);
  for (double& v : m.prev_weights()) v = w(rng);
  for (int i = 0; i < 50; ++i) {
    const auto b = static_cast<std::uint32_t>(rng() % 64);
    const int pos = static_cast<int>(rng() % 9);
    for (double& v : m.feat_row(b, pos)) v = w(rng);
  }
  const fs::path path = temp_path("model.json");
  save_model(m, path, nlohmann::json{{"seed", 1}});
  const PolicyModel loaded = load_model(path);
  CHECK(loaded == m);

  const nlohmann::json fresh = model_to_json(PolicyModel(32, 9));
  CHECK(fresh.at("feat_table").empty());
  CHECK(fresh.at("format_version") == 1);
  CHECK(fresh.at("prev_table").size() == 9);

  nlohmann::json wrong = model_to_json(m);
  wrong["format_version"] = 2;
  CHECK_THROWS_AS(model_from_json(wrong), FormatError);
  nlohmann::json bad_hash = model_to_json(m);
  bad_hash["feature_hash"] = "md5";
  CHECK_THROWS_AS(model_from_json(bad_hash), FormatError);
  nlohmann::json short_row = model_to_json(m);
  short_row["prev_table"][0][0].erase(0);
  CHECK_THROWS_AS(model_from_json(short_row), FormatError);

  {
    std::ofstream out(temp_path("corrupt.json"));
    out << "{\"format_version\": 1, \"B\": ";
  }
  CHECK_THROWS_AS(load_model(temp_path("corrupt.json")), FormatError);
  CHECK_THROWS_AS(load_model(temp_path("missing.json")), IoError);
}
