#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ikg/error.hpp"
#include "ikg/rdf.hpp"

namespace ikg {

enum class ScoreKind { expected_likelihood, kl_divergence };

inline std::string_view to_string(ScoreKind kind) {
  return kind == ScoreKind::expected_likelihood ? "expected_likelihood" : "kl_divergence";
}

inline ScoreKind score_kind_from_string(std::string_view s) {
  if (s == "expected_likelihood" || s == "el") return ScoreKind::expected_likelihood;
  if (s == "kl_divergence" || s == "kl") return ScoreKind::kl_divergence;
  throw Error(ErrorCategory::invalid_argument, "unknown score kind '" + std::string(s) + "'");
}

// Diagonal Gaussian: mean vector and the diagonal of its covariance.
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> cov;

  bool operator==(const GaussianParams&) const = default;
};

// Per-relation decision thresholds for triple classification.
struct ThresholdTable {
  std::map<std::size_t, double> per_relation;
  double fallback = 0.0;

  double threshold_for(std::size_t relation) const {
    auto it = per_relation.find(relation);
    return it == per_relation.end() ? fallback : it->second;
  }

  bool operator==(const ThresholdTable&) const = default;
};

struct Kg2eModel {
  Vocab vocab;
  std::vector<GaussianParams> entity_params;
  std::vector<GaussianParams> relation_params;
  std::size_t dim = 0;
  double c_min = 0.05;
  double c_max = 5.0;
  ScoreKind score_kind = ScoreKind::kl_divergence;
  std::optional<ThresholdTable> thresholds;

  std::size_t entity_count() const noexcept { return entity_params.size(); }
  std::size_t relation_count() const noexcept { return relation_params.size(); }
};

inline constexpr std::size_t kDefaultDim = 50;
inline constexpr double kDefaultCovMin = 0.05;
inline constexpr double kDefaultCovMax = 5.0;

// Rounding slack on the squared mean norm, so that projection is idempotent.
inline constexpr double kNormSlack = 1e-12;

// Projects the mean into the unit ball and clamps the covariance diagonal.
inline void constrain(GaussianParams& p, double c_min, double c_max) {
  double sq = 0.0;
  for (double m : p.mean) sq += m * m;
  if (sq > 1.0 + kNormSlack) {
    double inv = 1.0 / std::sqrt(sq);
    for (double& m : p.mean) m *= inv;
  }
  for (double& c : p.cov) c = std::clamp(c, c_min, c_max);
}

inline void apply_constraints(Kg2eModel& model) {
  for (auto& p : model.entity_params) constrain(p, model.c_min, model.c_max);
  for (auto& p : model.relation_params) constrain(p, model.c_min, model.c_max);
}

// Number of Gaussians whose mean norm exceeds 1 (with rounding slack) or whose
// covariance leaves [c_min, c_max].
inline std::size_t count_constraint_violations(const Kg2eModel& model) {
  auto bad = [&](const GaussianParams& p) {
    double sq = 0.0;
    for (double m : p.mean) sq += m * m;
    if (!(sq <= 1.0 + kNormSlack)) return true;
    for (double c : p.cov) {
      if (!(c >= model.c_min && c <= model.c_max)) return true;
    }
    return false;
  };
  std::size_t n = 0;
  for (const auto& p : model.entity_params) n += bad(p);
  for (const auto& p : model.relation_params) n += bad(p);
  return n;
}

inline Kg2eModel init_model(const Vocab& vocab, std::size_t dim, std::uint64_t seed,
                            double c_min = kDefaultCovMin, double c_max = kDefaultCovMax,
                            ScoreKind kind = ScoreKind::kl_divergence) {
  if (vocab.entity_count() == 0 || vocab.relation_count() == 0) {
    throw Error(ErrorCategory::vocab, "cannot initialize a model over an empty vocabulary");
  }
  if (dim < 1) throw Error(ErrorCategory::invalid_argument, "dimension must be >= 1");
  if (!(c_min > 0.0 && c_min < c_max)) {
    throw Error(ErrorCategory::invalid_argument, "covariance bounds must satisfy 0 < c_min < c_max");
  }

  Kg2eModel model;
  model.vocab = vocab;
  model.dim = dim;
  model.c_min = c_min;
  model.c_max = c_max;
  model.score_kind = kind;

  std::mt19937_64 rng(seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  auto draw = [&] {
    GaussianParams p{std::vector<double>(dim), std::vector<double>(dim, 1.0)};
    for (double& m : p.mean) m = uniform(rng);
    constrain(p, c_min, c_max);
    return p;
  };
  model.entity_params.reserve(vocab.entity_count());
  for (std::size_t i = 0; i < vocab.entity_count(); ++i) model.entity_params.push_back(draw());
  model.relation_params.reserve(vocab.relation_count());
  for (std::size_t i = 0; i < vocab.relation_count(); ++i) model.relation_params.push_back(draw());
  return model;
}

// Expected-likelihood score in its proportional form:
//   f = -sum_i mu_i^2 / C_i - sum_i ln C_i,
//   mu = mu_h - mu_r - mu_t,  C = C_h + C_r + C_t.
inline double expected_likelihood(const GaussianParams& h, const GaussianParams& r,
                                  const GaussianParams& t) {
  double quad = 0.0, logdet = 0.0;
  for (std::size_t i = 0; i < h.mean.size(); ++i) {
    double mu = h.mean[i] - r.mean[i] - t.mean[i];
    double c = h.cov[i] + r.cov[i] + t.cov[i];
    quad += mu * mu / c;
    logdet += std::log(c);
  }
  return -quad - logdet;
}

// KL(P_e || P_r) with P_e = N(mu_h - mu_t, C_h + C_t) and P_r = N(mu_r, C_r).
inline double kl_energy(const GaussianParams& h, const GaussianParams& r, const GaussianParams& t) {
  double e = 0.0;
  for (std::size_t i = 0; i < h.mean.size(); ++i) {
    double ce = h.cov[i] + t.cov[i];
    double cr = r.cov[i];
    double diff = r.mean[i] - (h.mean[i] - t.mean[i]);
    e += ce / cr + diff * diff / cr - std::log(ce / cr) - 1.0;
  }
  return 0.5 * e;
}

inline double kl_score(const GaussianParams& h, const GaussianParams& r, const GaussianParams& t) {
  return -kl_energy(h, r, t);
}

namespace detail {
inline void check_indices(const Kg2eModel& m, std::size_t h, std::size_t r, std::size_t t) {
  if (h >= m.entity_count() || t >= m.entity_count() || r >= m.relation_count()) {
    throw Error(ErrorCategory::invalid_argument, "entity or relation index out of range");
  }
}
}  // namespace detail

inline double score_el(const Kg2eModel& m, std::size_t h, std::size_t r, std::size_t t) {
  detail::check_indices(m, h, r, t);
  return expected_likelihood(m.entity_params[h], m.relation_params[r], m.entity_params[t]);
}

inline double score_kl(const Kg2eModel& m, std::size_t h, std::size_t r, std::size_t t) {
  detail::check_indices(m, h, r, t);
  return kl_score(m.entity_params[h], m.relation_params[r], m.entity_params[t]);
}

inline double score(const Kg2eModel& m, ScoreKind kind, std::size_t h, std::size_t r, std::size_t t) {
  return kind == ScoreKind::expected_likelihood ? score_el(m, h, r, t) : score_kl(m, h, r, t);
}

// Scores with the model's own score kind. Higher is more plausible.
inline double score(const Kg2eModel& m, std::size_t h, std::size_t r, std::size_t t) {
  return score(m, m.score_kind, h, r, t);
}

inline double score(const Kg2eModel& m, const IndexedTriple& t) {
  return score(m, t.head, t.relation, t.tail);
}

struct ScoreGradient {
  std::vector<double> mean_h, mean_r, mean_t;
  std::vector<double> cov_h, cov_r, cov_t;

  explicit ScoreGradient(std::size_t dim = 0)
      : mean_h(dim), mean_r(dim), mean_t(dim), cov_h(dim), cov_r(dim), cov_t(dim) {}
};

// Analytic gradient of the score (not the energy) w.r.t. all six parameter blocks.
inline ScoreGradient score_gradient(const GaussianParams& h, const GaussianParams& r,
                                    const GaussianParams& t, ScoreKind kind) {
  const std::size_t d = h.mean.size();
  ScoreGradient g(d);
  if (kind == ScoreKind::expected_likelihood) {
    for (std::size_t i = 0; i < d; ++i) {
      double mu = h.mean[i] - r.mean[i] - t.mean[i];
      double c = h.cov[i] + r.cov[i] + t.cov[i];
      double dm = 2.0 * mu / c;
      g.mean_h[i] = -dm;
      g.mean_r[i] = dm;
      g.mean_t[i] = dm;
      double dc = mu * mu / (c * c) - 1.0 / c;
      g.cov_h[i] = dc;
      g.cov_r[i] = dc;
      g.cov_t[i] = dc;
    }
    return g;
  }
  for (std::size_t i = 0; i < d; ++i) {
    double ce = h.cov[i] + t.cov[i];
    double cr = r.cov[i];
    double diff = r.mean[i] - (h.mean[i] - t.mean[i]);  // mu_r - mu_e
    // score = -E; dE/dmu_e = -diff/cr, dE/dmu_r = diff/cr.
    g.mean_h[i] = diff / cr;
    g.mean_t[i] = -diff / cr;
    g.mean_r[i] = -diff / cr;
    double de_dce = 0.5 * (1.0 / cr - 1.0 / ce);
    g.cov_h[i] = -de_dce;
    g.cov_t[i] = -de_dce;
    g.cov_r[i] = -0.5 * (1.0 / cr - ce / (cr * cr) - diff * diff / (cr * cr));
  }
  return g;
}

inline ScoreGradient score_grad(const Kg2eModel& m, std::size_t h, std::size_t r, std::size_t t,
                                ScoreKind kind) {
  detail::check_indices(m, h, r, t);
  return score_gradient(m.entity_params[h], m.relation_params[r], m.entity_params[t], kind);
}

}  // namespace ikg
