#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ikg/ikg.hpp"

using namespace ikg;

namespace {

Term ent(int i) { return ns::term(ns::service, "e" + std::to_string(i)); }
Term rel(int i) { return ns::term(ns::icm, "r" + std::to_string(i)); }

Graph random_graph(std::uint64_t seed, std::size_t n, int entities = 20, int relations = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> e(0, entities - 1), r(0, relations - 1);
  Graph g;
  while (g.size() < n) g.insert({ent(e(rng)), rel(r(rng)), ent(e(rng))});
  return g;
}

void expect_category(const std::function<void()>& f, ErrorCategory c) {
  try {
    f();
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), c) << e.what();
  }
}

std::set<std::string> as_set(const Graph& g) {
  std::set<std::string> s;
  for (const auto& t : g.triples()) s.insert(format_term(t.head) + format_term(t.relation) + format_term(t.tail));
  return s;
}

}  // namespace

TEST(Split, DeskSizes) {
  auto g = random_graph(1, 1575, 200, 5);
  auto s = split_dataset(g, {0.8, 0.1, 0.1}, 42);
  EXPECT_EQ(s.train.size(), 1261u);
  EXPECT_EQ(s.valid.size(), 157u);
  EXPECT_EQ(s.test.size(), 157u);
  EXPECT_EQ(s.vocab, build_vocab(g));
}

TEST(Split, Deterministic) {
  auto g = random_graph(2, 10);
  auto a = split_dataset(g, {0.8, 0.1, 0.1}, 9);
  auto b = split_dataset(g, {0.8, 0.1, 0.1}, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.valid.size(), 1u);
  EXPECT_EQ(a.train.size(), 8u);
}

TEST(Split, PartitionProperty) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto g = random_graph(100 + i, 5 + i * 7);
    auto s = split_dataset(g, {0.7, 0.2, 0.1}, i);
    auto tr = as_set(s.train), va = as_set(s.valid), te = as_set(s.test), all = as_set(g);
    std::set<std::string> uni;
    uni.insert(tr.begin(), tr.end());
    uni.insert(va.begin(), va.end());
    uni.insert(te.begin(), te.end());
    EXPECT_EQ(uni, all);
    EXPECT_EQ(tr.size() + va.size() + te.size(), all.size());
  }
}

TEST(Split, Errors) {
  expect_category([] { split_dataset(Graph{}, {}, 1); }, ErrorCategory::invalid_argument);
  expect_category([] { split_dataset(random_graph(1, 5), {0.5, 0.4, 0.4}, 1); }, ErrorCategory::invalid_argument);
  expect_category([] { split_dataset(random_graph(1, 5), {1.0, 0.0, 0.0}, 1); }, ErrorCategory::invalid_argument);
}

TEST(NegativeSampling, ForcedOutcomeWithTwoEntities) {
  Graph g;
  g.insert({ent(0), rel(0), ent(1)});
  auto v = build_vocab(g);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    Triple n = sample_negative(g.triples()[0], v, g, rng);
    // Only (a,r,a) or (b,r,b) are possible corruptions.
    EXPECT_EQ(n.head, n.tail);
    EXPECT_EQ(n.relation, rel(0));
  }
}

TEST(NegativeSampling, DiffersInExactlyOneSide) {
  auto g = random_graph(4, 60);
  auto v = build_vocab(g);
  auto known = index_set(v, g);
  std::mt19937_64 rng(5);
  for (const auto& p : index_triples(v, g)) {
    for (int k = 0; k < 10; ++k) {
      auto n = sample_negative(p, v.entity_count(), known, rng);
      EXPECT_EQ(n.relation, p.relation);
      EXPECT_EQ((n.head != p.head) + (n.tail != p.tail), 1);
      EXPECT_EQ(known.count(n), 0u);
    }
  }
}

TEST(NegativeSampling, HeadTailBalance) {
  auto g = random_graph(6, 40, 20, 2);
  auto v = build_vocab(g);
  ASSERT_EQ(v.entity_count(), 20u);
  auto known = index_set(v, g);
  auto pos = index_triples(v, g);
  std::mt19937_64 rng(7);
  int heads = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto& p = pos[i % pos.size()];
    heads += sample_negative(p, v.entity_count(), known, rng).head != p.head;
  }
  double ratio = static_cast<double>(heads) / n;
  EXPECT_GE(ratio, 0.47);
  EXPECT_LE(ratio, 0.53);
}

TEST(NegativeSampling, SaturatedGraphFallsBack) {
  // Every corruption is known, so the 100th draw is accepted.
  Graph g;
  for (int h = 0; h < 3; ++h)
    for (int t = 0; t < 3; ++t) g.insert({ent(h), rel(0), ent(t)});
  auto v = build_vocab(g);
  std::mt19937_64 rng(8);
  auto n = sample_negative(g.triples()[1], v, g, rng);
  EXPECT_TRUE(g.contains(n));
}

TEST(NegativeSampling, NeedsTwoEntities) {
  IndexedTripleSet known;
  std::mt19937_64 rng(1);
  expect_category([&] { sample_negative(IndexedTriple{0, 0, 0}, 1, known, rng); }, ErrorCategory::invalid_argument);
}

TEST(MarginLoss, Examples) {
  EXPECT_EQ(margin_loss(5, 1, 1), 0.0);
  EXPECT_EQ(margin_loss(1, 1, 1), 1.0);
  EXPECT_EQ(margin_loss(-92.0514, -134.3381, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(margin_loss(0.0, 0.5, 1.0), 1.5);
  EXPECT_EQ(margin_loss(2.0, 1.0, 0.0), 0.0);
  EXPECT_TRUE(std::isnan(margin_loss(std::nan(""), 1.0, 1.0)));
}

TEST(Convergence, PlateauStart) {
  EXPECT_EQ(convergence_epoch({10, 5, 5, 5, 5}), std::optional<std::size_t>(2));
  EXPECT_EQ(convergence_epoch({10, 5, 4, 3}), std::nullopt);
  EXPECT_EQ(convergence_epoch({1, 1, 1, 1}), std::optional<std::size_t>(1));
  // A loss increase counts as no improvement.
  EXPECT_EQ(convergence_epoch({10, 9, 9.5, 9.6, 9.7, 1}), std::optional<std::size_t>(2));
  EXPECT_EQ(convergence_epoch({}), std::nullopt);
  EXPECT_EQ(convergence_epoch({0, 0, 0, 0}), std::optional<std::size_t>(1));
}

TEST(Train, SingleTripleReachesZero) {
  Graph g;
  g.insert({ent(0), rel(0), ent(1)});
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 0.1;
  cfg.negatives_per_positive = 4;
  auto split = split_dataset(g, cfg.split, cfg.seed);
  ASSERT_EQ(split.train.size(), 1u);
  auto m = init_model(split.vocab, 50, cfg.seed);
  auto report = train(m, split, cfg);
  ASSERT_EQ(report.epoch_loss.size(), 20u);
  for (std::size_t e = 3; e < 20; ++e) EXPECT_LE(report.epoch_loss[e], report.epoch_loss[e - 1]) << e;
  EXPECT_EQ(report.epoch_loss.back(), 0.0);
  EXPECT_EQ(report.constraint_violations, 0u);
}

TEST(Train, Deterministic) {
  auto g = random_graph(9, 120);
  TrainConfig cfg;
  cfg.epochs = 5;
  auto run = [&] {
    auto split = split_dataset(g, cfg.split, cfg.seed);
    auto m = init_model(split.vocab, 8, cfg.seed);
    auto r = train(m, split, cfg);
    return std::pair{m, r};
  };
  auto [m1, r1] = run();
  auto [m2, r2] = run();
  EXPECT_EQ(r1.epoch_loss, r2.epoch_loss);
  for (std::size_t i = 0; i < m1.entity_count(); ++i) {
    EXPECT_EQ(m1.entity_params[i].mean, m2.entity_params[i].mean);
    EXPECT_EQ(m1.entity_params[i].cov, m2.entity_params[i].cov);
  }
  for (std::size_t i = 0; i < m1.relation_count(); ++i) EXPECT_EQ(m1.relation_params[i].mean, m2.relation_params[i].mean);
}

TEST(Train, ExpectedLikelihoodAlsoLearns) {
  auto g = random_graph(10, 120);
  TrainConfig cfg;
  cfg.epochs = 20;
  auto split = split_dataset(g, cfg.split, cfg.seed);
  auto m = init_model(split.vocab, 16, cfg.seed, kDefaultCovMin, kDefaultCovMax, ScoreKind::expected_likelihood);
  auto r = train(m, split, cfg);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  EXPECT_EQ(r.constraint_violations, 0u);
}

TEST(Train, NoNegativesMeansZeroLoss) {
  auto g = random_graph(11, 50);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.negatives_per_positive = 0;
  auto split = split_dataset(g, cfg.split, cfg.seed);
  auto m = init_model(split.vocab, 4, 1);
  auto before = m.entity_params;
  auto r = train(m, split, cfg);
  for (double l : r.epoch_loss) EXPECT_EQ(l, 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i].mean, m.entity_params[i].mean);
}

TEST(Train, CallbackSeesEveryEpoch) {
  auto g = random_graph(12, 40);
  TrainConfig cfg;
  cfg.epochs = 6;
  auto split = split_dataset(g, cfg.split, cfg.seed);
  auto m = init_model(split.vocab, 4, 1);
  std::vector<std::size_t> seen;
  std::vector<double> losses;
  auto r = train(m, split, cfg, [&](std::size_t e, double l) {
    seen.push_back(e);
    losses.push_back(l);
  });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(losses, r.epoch_loss);
}

TEST(Train, Errors) {
  auto g = random_graph(13, 40);
  auto split = split_dataset(g, {}, 1);
  auto other = init_model(build_vocab(random_graph(14, 40)), 4, 1);
  expect_category([&] { train(other, split, TrainConfig{}); }, ErrorCategory::vocab);
  auto m = init_model(split.vocab, 4, 1);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  expect_category([&] { train(m, split, bad); }, ErrorCategory::invalid_argument);
  bad = {};
  bad.rms_decay = 1.0;
  expect_category([&] { train(m, split, bad); }, ErrorCategory::invalid_argument);
  bad = {};
  bad.batch_size = 0;
  expect_category([&] { train(m, split, bad); }, ErrorCategory::invalid_argument);
}

TEST(Train, DivergenceAborts) {
  auto g = random_graph(15, 40);
  TrainConfig cfg;
  cfg.epochs = 3;
  auto split = split_dataset(g, cfg.split, cfg.seed);
  auto m = init_model(split.vocab, 4, 1);
  m.entity_params[0].mean[0] = std::numeric_limits<double>::quiet_NaN();
  expect_category([&] { train(m, split, cfg); }, ErrorCategory::train_diverged);
}

TEST(TrainConfigDoc, RoundTripAndDefaults) {
  TrainConfig c;
  c.epochs = 7;
  c.learning_rate = 0.05;
  c.seed = 99;
  c.split = {0.6, 0.2, 0.2};
  auto back = train_config_from_json(to_json(c));
  EXPECT_EQ(back.epochs, 7u);
  EXPECT_EQ(back.learning_rate, 0.05);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.split.valid, 0.2);
  auto defaults = train_config_from_json(nlohmann::json::object());
  EXPECT_EQ(defaults.epochs, 50u);
  EXPECT_EQ(defaults.batch_size, 64u);
  EXPECT_EQ(defaults.margin, 1.0);
  auto shipped = train_config_from_json(nlohmann::json::parse(read_file(std::string(IKG_DATA_DIR) + "/train_config.json")));
  EXPECT_EQ(shipped.seed, 42u);
}

TEST(TrainConfigDoc, Errors) {
  expect_category([] { train_config_from_json({{"epochs", "many"}}); }, ErrorCategory::parse);
  expect_category([] { train_config_from_json({{"split", {0.5, 0.5}}}); }, ErrorCategory::invalid_argument);
  expect_category([] { train_config_from_json({{"epochs", 0}}); }, ErrorCategory::invalid_argument);
}

TEST(Train, DeskIkgDefaults) {
  auto gen = generate_ikg(IkgGenSpec{});
  TrainConfig cfg;
  auto fitted = fit(gen.graph, cfg);
  const auto& loss = fitted.report.epoch_loss;
  ASSERT_EQ(loss.size(), 50u);
  EXPECT_LT(loss.back(), loss.front());
  EXPECT_EQ(fitted.report.constraint_violations, 0u);
  for (double l : loss) EXPECT_TRUE(std::isfinite(l));
}
