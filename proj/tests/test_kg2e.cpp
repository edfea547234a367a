#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ikg/ikg.hpp"

using namespace ikg;

namespace {

GaussianParams gp(std::vector<double> mean, std::vector<double> cov) { return {std::move(mean), std::move(cov)}; }

Vocab small_vocab(std::size_t n_entities) {
  Graph g;
  for (std::size_t i = 0; i + 1 < n_entities; ++i) {
    g.insert({ns::term(ns::service, "e" + std::to_string(i)), ns::term(ns::icm, "r"),
              ns::term(ns::service, "e" + std::to_string(i + 1))});
  }
  return build_vocab(g);
}

// Three-entity, one-relation model whose parameters are overwritten by the test.
Kg2eModel model_with(const GaussianParams& h, const GaussianParams& r, const GaussianParams& t) {
  auto m = init_model(small_vocab(2), h.mean.size(), 1, 1e-6, 1e6);
  m.entity_params = {h, t};
  m.relation_params = {r};
  return m;
}

GaussianParams random_params(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> mean(-1.0, 1.0), cov(0.05, 5.0);
  GaussianParams p{std::vector<double>(d), std::vector<double>(d)};
  for (auto& x : p.mean) x = mean(rng);
  for (auto& x : p.cov) x = cov(rng);
  return p;
}

double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

// Composite Simpson rule over [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// 1-D oracles by quadrature over the entity-pair and relation Gaussians.
double el_by_quadrature(double mh, double ch, double mr, double cr, double mt, double ct) {
  const double me = mh - mt, ce = ch + ct;
  double inner = simpson([&](double x) { return normal_pdf(x, me, ce) * normal_pdf(x, mr, cr); }, -40, 40, 40000);
  // 2 log of the inner product, shifted by the dropped ln(2 pi).
  return 2.0 * std::log(inner) + std::log(2.0 * std::numbers::pi);
}

double kl_by_quadrature(double mh, double ch, double mr, double cr, double mt, double ct) {
  const double me = mh - mt, ce = ch + ct;
  return simpson(
      [&](double x) {
        double p = normal_pdf(x, me, ce);
        return p > 0.0 ? p * (std::log(p) - std::log(normal_pdf(x, mr, cr))) : 0.0;
      },
      me - 30 * std::sqrt(ce), me + 30 * std::sqrt(ce), 40000);
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3}); }

}  // namespace

TEST(ScoreEl, ZeroMeansUnitCov) {
  auto h = gp({0, 0}, {1, 1});
  EXPECT_NEAR(expected_likelihood(h, h, h), -2.0 * std::log(3.0), 1e-12);
  EXPECT_NEAR(expected_likelihood(h, h, h), -2.19722, 1e-5);
}

TEST(ScoreEl, HandArithmetic) {
  auto m = model_with(gp({0.5}, {1}), gp({0.2}, {1}), gp({0.1}, {1}));
  EXPECT_NEAR(score(m, ScoreKind::expected_likelihood, 0, 0, 1), -0.04 / 3.0 - std::log(3.0), 1e-12);
  EXPECT_NEAR(score(m, ScoreKind::expected_likelihood, 0, 0, 1), -1.11195, 1e-5);
}

TEST(ScoreEl, MatchesQuadratureOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto h = random_params(rng, 1), r = random_params(rng, 1), t = random_params(rng, 1);
    double oracle = el_by_quadrature(h.mean[0], h.cov[0], r.mean[0], r.cov[0], t.mean[0], t.cov[0]);
    EXPECT_NEAR(expected_likelihood(h, r, t), oracle, 1e-8);
  }
}

TEST(ScoreEl, FactorizesOverDimensions) {
  std::mt19937_64 rng(4);
  auto h = random_params(rng, 4), r = random_params(rng, 4), t = random_params(rng, 4);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    sum += el_by_quadrature(h.mean[i], h.cov[i], r.mean[i], r.cov[i], t.mean[i], t.cov[i]);
  }
  EXPECT_NEAR(expected_likelihood(h, r, t), sum, 1e-8);
}

TEST(ScoreKl, IdenticalDistributionsGiveZero) {
  // mu_h - mu_t == mu_r and C_h + C_t == C_r.
  auto m = model_with(gp({0.3, -0.2}, {0.5, 1.0}), gp({0.1, -0.5}, {1.5, 3.0}), gp({0.2, 0.3}, {1.0, 2.0}));
  EXPECT_NEAR(score(m, ScoreKind::kl_divergence, 0, 0, 1), 0.0, 1e-15);
}

TEST(ScoreKl, HandArithmetic) {
  auto m = model_with(gp({0}, {0.5}), gp({0}, {2}), gp({0}, {0.5}));
  EXPECT_NEAR(score(m, ScoreKind::kl_divergence, 0, 0, 1), -0.5 * (0.5 - std::log(0.5) - 1.0), 1e-12);
  EXPECT_NEAR(score(m, ScoreKind::kl_divergence, 0, 0, 1), -0.09657, 1e-5);
}

TEST(ScoreKl, MatchesQuadratureOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto h = random_params(rng, 1), r = random_params(rng, 1), t = random_params(rng, 1);
    double oracle = kl_by_quadrature(h.mean[0], h.cov[0], r.mean[0], r.cov[0], t.mean[0], t.cov[0]);
    EXPECT_NEAR(kl_energy(h, r, t), oracle, 1e-7 * std::max(1.0, oracle));
  }
}

TEST(ScoreKl, NonNegativeEnergy) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    std::size_t d = 1 + i % 8;
    auto h = random_params(rng, d), r = random_params(rng, d), t = random_params(rng, d);
    EXPECT_GE(kl_energy(h, r, t), 0.0);
    EXPECT_LE(kl_score(h, r, t), 0.0);
  }
}

TEST(ScoreInvariants, ElNegationOfAllMeans) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto h = random_params(rng, 5), r = random_params(rng, 5), t = random_params(rng, 5);
    auto neg = [](GaussianParams p) {
      for (auto& x : p.mean) x = -x;
      return p;
    };
    EXPECT_DOUBLE_EQ(expected_likelihood(h, r, t), expected_likelihood(neg(h), neg(r), neg(t)));
  }
}

TEST(ScoreInvariants, ElExchangeSymmetry) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    auto h = random_params(rng, 5), r = random_params(rng, 5), t = random_params(rng, 5);
    // Swapping head and tail while negating the relation mean leaves f unchanged.
    auto nr = r;
    for (auto& x : nr.mean) x = -x;
    EXPECT_NEAR(expected_likelihood(h, r, t), expected_likelihood(t, nr, h), 1e-12);
  }
}

TEST(ScoreInvariants, DecreaseWithTranslationalDistance) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto h = random_params(rng, 3), r = random_params(rng, 3), t = random_params(rng, 3);
    // Move the head away along the residual direction of both scores.
    double prev_el = -INFINITY, prev_kl = -INFINITY;
    for (double s = 10.0; s >= 0.0; s -= 0.5) {
      auto hh = h;
      for (int k = 0; k < 3; ++k) hh.mean[k] = r.mean[k] + t.mean[k] + s * (1.0 + k);
      double el = expected_likelihood(hh, r, t);
      EXPECT_GT(el, prev_el);
      prev_el = el;
    }
    for (double s = 10.0; s >= 0.0; s -= 0.5) {
      auto hh = h;
      for (int k = 0; k < 3; ++k) hh.mean[k] = r.mean[k] + t.mean[k] + s * (1.0 + k);
      double kl = kl_score(hh, r, t);
      EXPECT_GT(kl, prev_kl);
      prev_kl = kl;
    }
  }
}

TEST(ScoreGrad, ZeroMeanGivesZeroMeanGradients) {
  auto h = gp({0, 0, 0}, {1, 2, 3});
  for (auto kind : {ScoreKind::expected_likelihood, ScoreKind::kl_divergence}) {
    auto g = score_gradient(h, h, h, kind);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(g.mean_h[i], 0.0);
      EXPECT_EQ(g.mean_r[i], 0.0);
      EXPECT_EQ(g.mean_t[i], 0.0);
    }
  }
}

TEST(ScoreGrad, HandArithmetic) {
  auto m = model_with(gp({0.5}, {1}), gp({0.2}, {1}), gp({0.1}, {1}));
  auto g = score_grad(m, 0, 0, 1, ScoreKind::expected_likelihood);
  EXPECT_NEAR(g.mean_h[0], -0.4 / 3.0, 1e-12);
  EXPECT_NEAR(g.mean_h[0], -0.13333, 1e-5);
  EXPECT_NEAR(g.mean_r[0], 0.4 / 3.0, 1e-12);
  EXPECT_NEAR(g.cov_h[0], 0.04 / 9.0 - 1.0 / 3.0, 1e-12);
}

TEST(ScoreGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(10);
  const double step = 1e-5;
  for (auto kind : {ScoreKind::expected_likelihood, ScoreKind::kl_divergence}) {
    for (int trial = 0; trial < 20; ++trial) {
      GaussianParams p[3] = {random_params(rng, 6), random_params(rng, 6), random_params(rng, 6)};
      auto f = [&] {
        return kind == ScoreKind::expected_likelihood ? expected_likelihood(p[0], p[1], p[2])
                                                      : kl_score(p[0], p[1], p[2]);
      };
      auto g = score_gradient(p[0], p[1], p[2], kind);
      const std::vector<double>* means[3] = {&g.mean_h, &g.mean_r, &g.mean_t};
      const std::vector<double>* covs[3] = {&g.cov_h, &g.cov_r, &g.cov_t};
      for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < 6; ++i) {
          for (int which = 0; which < 2; ++which) {
            double& x = which == 0 ? p[b].mean[i] : p[b].cov[i];
            const double x0 = x;
            x = x0 + step;
            double up = f();
            x = x0 - step;
            double down = f();
            x = x0;
            double numeric = (up - down) / (2.0 * step);
            double analytic = which == 0 ? (*means[b])[i] : (*covs[b])[i];
            EXPECT_LE(rel_err(analytic, numeric), 1e-4) << "block " << b << " coord " << i << " cov " << which;
          }
        }
      }
    }
  }
}

TEST(ScoreErrors, IndexOutOfRange) {
  auto m = model_with(gp({0}, {1}), gp({0}, {1}), gp({0}, {1}));
  EXPECT_THROW(score(m, 2, 0, 0), Error);
  EXPECT_THROW(score(m, 0, 1, 0), Error);
  EXPECT_THROW(score(m, 0, 0, 5), Error);
  EXPECT_THROW(score_grad(m, 0, 3, 0, ScoreKind::kl_divergence), Error);
}

TEST(Constraints, NormProjection) {
  GaussianParams p = gp({3, 4}, {1, 1});
  constrain(p, 0.05, 5.0);
  EXPECT_DOUBLE_EQ(p.mean[0], 0.6);
  EXPECT_DOUBLE_EQ(p.mean[1], 0.8);
}

TEST(Constraints, CovarianceClamp) {
  GaussianParams p = gp({0.1}, {0.001});
  constrain(p, 0.05, 5.0);
  EXPECT_EQ(p.cov[0], 0.05);
  p.cov[0] = 99.0;
  constrain(p, 0.05, 5.0);
  EXPECT_EQ(p.cov[0], 5.0);
  EXPECT_EQ(p.mean[0], 0.1);
}

TEST(Constraints, IdempotentOnRandomModels) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> wild(-10.0, 10.0), cov(0.0001, 20.0);
  for (int i = 0; i < 100; ++i) {
    auto m = init_model(small_vocab(4), 1 + i % 7, i, 0.05, 5.0);
    for (auto* set : {&m.entity_params, &m.relation_params}) {
      for (auto& p : *set) {
        for (auto& x : p.mean) x = wild(rng);
        for (auto& x : p.cov) x = cov(rng);
      }
    }
    apply_constraints(m);
    EXPECT_EQ(count_constraint_violations(m), 0u);
    auto once = m;
    apply_constraints(m);
    for (std::size_t e = 0; e < m.entity_count(); ++e) {
      EXPECT_EQ(m.entity_params[e].mean, once.entity_params[e].mean);
      EXPECT_EQ(m.entity_params[e].cov, once.entity_params[e].cov);
    }
  }
}

TEST(InitModel, ConstructionContract) {
  auto m = init_model(small_vocab(2), 4, 7, 0.05, 5.0);
  EXPECT_EQ(m.entity_count(), 2u);
  EXPECT_EQ(m.relation_count(), 1u);
  EXPECT_EQ(count_constraint_violations(m), 0u);
  for (const auto& p : m.entity_params) {
    double sq = 0.0;
    for (double x : p.mean) sq += x * x;
    EXPECT_LE(std::sqrt(sq), 1.0 + 1e-12);
    for (double c : p.cov) EXPECT_EQ(c, 1.0);
  }
}

TEST(InitModel, Deterministic) {
  auto a = init_model(small_vocab(5), 8, 7);
  auto b = init_model(small_vocab(5), 8, 7);
  auto c = init_model(small_vocab(5), 8, 8);
  for (std::size_t e = 0; e < a.entity_count(); ++e) EXPECT_EQ(a.entity_params[e].mean, b.entity_params[e].mean);
  EXPECT_NE(a.entity_params[0].mean, c.entity_params[0].mean);
}

TEST(InitModel, DefaultBoundsLeaveUnitCovariance) {
  auto m = init_model(small_vocab(3), 50, 1);
  for (const auto& p : m.entity_params)
    for (double c : p.cov) EXPECT_EQ(c, 1.0);
}

TEST(InitModel, ClampsInitialCovariance) {
  auto m = init_model(small_vocab(3), 3, 1, 2.0, 4.0);
  for (const auto& p : m.relation_params)
    for (double c : p.cov) EXPECT_EQ(c, 2.0);
}

TEST(InitModel, Errors) {
  EXPECT_THROW(init_model(Vocab{}, 4, 1), Error);
  EXPECT_THROW(init_model(small_vocab(2), 0, 1), Error);
  EXPECT_THROW(init_model(small_vocab(2), 4, 1, 0.0, 5.0), Error);
  EXPECT_THROW(init_model(small_vocab(2), 4, 1, 5.0, 5.0), Error);
}
