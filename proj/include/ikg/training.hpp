#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/error.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/rdf.hpp"

namespace ikg {

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 0.01;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-8;
  double margin = 1.0;
  std::size_t negatives_per_positive = 1;
  std::size_t batch_size = 64;
  std::uint64_t seed = 42;
  SplitFractions split;
};

// Relative loss improvement below which an epoch counts as flat.
inline constexpr double kConvergenceTolerance = 1e-3;
inline constexpr std::size_t kConvergenceWindow = 3;

struct TrainReport {
  std::vector<double> epoch_loss;
  // First epoch (1-based) after which the next three epochs each improved the
  // mean loss by less than kConvergenceTolerance (relative).
  std::optional<std::size_t> convergence_epoch;
  std::size_t constraint_violations = 0;
};

struct DatasetSplit {
  Graph train;
  Graph valid;
  Graph test;
  Graph all;
  Vocab vocab;  // built from `all`, so every split entity is known
};

inline void validate(const SplitFractions& f) {
  auto ok = [](double v) { return v > 0.0 && v < 1.0; };
  if (!ok(f.train) || !ok(f.valid) || !ok(f.test) || std::abs(f.train + f.valid + f.test - 1.0) > 1e-9) {
    throw Error(ErrorCategory::invalid_argument, "split fractions must lie in (0,1) and sum to 1");
  }
}

inline void validate(const TrainConfig& c) {
  if (c.epochs < 1) throw Error(ErrorCategory::invalid_argument, "epochs must be >= 1");
  if (!(c.learning_rate > 0.0)) throw Error(ErrorCategory::invalid_argument, "learning_rate must be positive");
  if (!(c.rms_decay > 0.0 && c.rms_decay < 1.0)) {
    throw Error(ErrorCategory::invalid_argument, "rms_decay must lie in (0,1)");
  }
  if (!(c.rms_epsilon > 0.0)) throw Error(ErrorCategory::invalid_argument, "rms_epsilon must be positive");
  if (!(c.margin >= 0.0)) throw Error(ErrorCategory::invalid_argument, "margin must be non-negative");
  if (c.batch_size < 1) throw Error(ErrorCategory::invalid_argument, "batch_size must be >= 1");
  validate(c.split);
}

// Sizes of the held-out parts are floor(|F| * fraction); the remainder goes
// to the training part.
inline DatasetSplit split_dataset(const Graph& graph, const SplitFractions& fractions, std::uint64_t seed) {
  if (graph.empty()) throw Error(ErrorCategory::invalid_argument, "cannot split an empty graph");
  validate(fractions);
  const std::size_t n = graph.size();
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions.valid));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions.test));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit split;
  split.all = graph;
  split.vocab = build_vocab(graph);
  for (Graph* g : {&split.train, &split.valid, &split.test}) g->set_prefixes(graph.prefixes());
  auto triples = graph.triples();
  for (std::size_t i = 0; i < n; ++i) {
    const Triple& t = triples[order[i]];
    if (i < n_valid) {
      split.valid.insert(t);
    } else if (i < n_valid + n_test) {
      split.test.insert(t);
    } else {
      split.train.insert(t);
    }
  }
  return split;
}

// Corrupts head or tail (fair coin) with a uniformly drawn different entity,
// rejecting corruptions found in `known`. After 100 rejected draws the last
// draw is accepted as is.
template <typename Rng>
IndexedTriple sample_negative(const IndexedTriple& positive, std::size_t entity_count,
                              const IndexedTripleSet& known, Rng& rng) {
  if (entity_count < 2) throw Error(ErrorCategory::invalid_argument, "negative sampling needs at least 2 entities");
  std::bernoulli_distribution coin(0.5);
  const bool corrupt_head = coin(rng);
  const std::size_t original = corrupt_head ? positive.head : positive.tail;
  std::uniform_int_distribution<std::size_t> pick(0, entity_count - 2);
  IndexedTriple candidate = positive;
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::size_t e = pick(rng);
    if (e >= original) ++e;
    candidate = positive;
    (corrupt_head ? candidate.head : candidate.tail) = e;
    if (known.count(candidate) == 0) break;
  }
  return candidate;
}

template <typename Rng>
Triple sample_negative(const Triple& positive, const Vocab& vocab, const Graph& graph, Rng& rng) {
  IndexedTripleSet known = index_set(vocab, graph);
  return to_triple(vocab, sample_negative(to_indexed(vocab, positive), vocab.entity_count(), known, rng));
}

// NaN propagates so that a diverged score reaches the finiteness check.
inline double margin_loss(double pos_score, double neg_score, double margin) {
  const double v = margin - pos_score + neg_score;
  return std::isnan(v) ? v : std::max(0.0, v);
}

inline std::optional<std::size_t> convergence_epoch(const std::vector<double>& loss) {
  auto improvement = [&](std::size_t e) {  // e is a 0-based epoch index >= 1
    double prev = loss[e - 1];
    if (prev == 0.0) return 0.0;
    return (prev - loss[e]) / prev;
  };
  for (std::size_t e = 0; e + kConvergenceWindow < loss.size(); ++e) {
    bool flat = true;
    for (std::size_t k = 1; k <= kConvergenceWindow; ++k) {
      if (!(improvement(e + k) < kConvergenceTolerance)) {
        flat = false;
        break;
      }
    }
    if (flat) return e + 1;
  }
  return std::nullopt;
}

namespace detail {

// Dense gradient buffers plus RMS accumulators for one parameter table.
class RmsTable {
 public:
  RmsTable(std::size_t rows, std::size_t dim)
      : dim_(dim),
        grad_mean_(rows * dim, 0.0),
        grad_cov_(rows * dim, 0.0),
        sq_mean_(rows * dim, 0.0),
        sq_cov_(rows * dim, 0.0),
        touched_flag_(rows, 0) {}

  void accumulate(std::size_t row, const std::vector<double>& g_mean, const std::vector<double>& g_cov,
                  double sign) {
    if (!touched_flag_[row]) {
      touched_flag_[row] = 1;
      touched_.push_back(row);
    }
    double* gm = &grad_mean_[row * dim_];
    double* gc = &grad_cov_[row * dim_];
    for (std::size_t i = 0; i < dim_; ++i) {
      gm[i] += sign * g_mean[i];
      gc[i] += sign * g_cov[i];
    }
  }

  // theta <- theta - lr * g / sqrt(s + eps), s <- rho * s + (1 - rho) * g^2,
  // applied to every touched row, then the row is re-constrained.
  void step(std::vector<GaussianParams>& params, const TrainConfig& cfg, double c_min, double c_max) {
    std::sort(touched_.begin(), touched_.end());
    for (std::size_t row : touched_) {
      auto& p = params[row];
      for (std::size_t i = 0; i < dim_; ++i) {
        const std::size_t k = row * dim_ + i;
        update(p.mean[i], grad_mean_[k], sq_mean_[k], cfg);
        update(p.cov[i], grad_cov_[k], sq_cov_[k], cfg);
        grad_mean_[k] = 0.0;
        grad_cov_[k] = 0.0;
      }
      constrain(p, c_min, c_max);
      touched_flag_[row] = 0;
    }
    touched_.clear();
  }

 private:
  static void update(double& theta, double g, double& s, const TrainConfig& cfg) {
    s = cfg.rms_decay * s + (1.0 - cfg.rms_decay) * g * g;
    theta -= cfg.learning_rate * g / std::sqrt(s + cfg.rms_epsilon);
  }

  std::size_t dim_;
  std::vector<double> grad_mean_, grad_cov_, sq_mean_, sq_cov_;
  std::vector<char> touched_flag_;
  std::vector<std::size_t> touched_;
};

}  // namespace detail

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Margin-ranking training with sequential mini-batch RMS updates. Negatives
// are rejection-sampled against the full graph of the split.
inline TrainReport train(Kg2eModel& model, const DatasetSplit& split, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  validate(config);
  if (!(model.vocab == split.vocab)) {
    throw Error(ErrorCategory::vocab, "model vocabulary does not match the dataset vocabulary");
  }
  const auto positives = index_triples(split.vocab, split.train);
  const auto known = index_set(split.vocab, split.all);
  const std::size_t n_entities = model.entity_count();

  detail::RmsTable entity_table(n_entities, model.dim);
  detail::RmsTable relation_table(model.relation_count(), model.dim);
  std::mt19937_64 rng(config.seed);

  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      for (std::size_t i = begin; i < end; ++i) {
        const IndexedTriple& pos = positives[order[i]];
        for (std::size_t n = 0; n < config.negatives_per_positive; ++n) {
          const IndexedTriple neg = sample_negative(pos, n_entities, known, rng);
          const double s_pos = score(model, pos);
          const double s_neg = score(model, neg);
          const double loss = margin_loss(s_pos, s_neg, config.margin);
          total += loss;
          ++pairs;
          if (loss <= 0.0) continue;
          // d(loss) = -d(s_pos) + d(s_neg)
          for (const auto& [triple, sign] : {std::pair{pos, -1.0}, std::pair{neg, 1.0}}) {
            ScoreGradient g = score_grad(model, triple.head, triple.relation, triple.tail, model.score_kind);
            entity_table.accumulate(triple.head, g.mean_h, g.cov_h, sign);
            relation_table.accumulate(triple.relation, g.mean_r, g.cov_r, sign);
            entity_table.accumulate(triple.tail, g.mean_t, g.cov_t, sign);
          }
        }
      }
      entity_table.step(model.entity_params, config, model.c_min, model.c_max);
      relation_table.step(model.relation_params, config, model.c_min, model.c_max);
    }
    const double mean_loss = pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
    if (!std::isfinite(mean_loss)) {
      throw Error(ErrorCategory::train_diverged,
                  "epoch " + std::to_string(epoch) + ": mean loss is not finite");
    }
    report.epoch_loss.push_back(mean_loss);
    report.constraint_violations = std::max(report.constraint_violations, count_constraint_violations(model));
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  report.convergence_epoch = convergence_epoch(report.epoch_loss);
  return report;
}

inline nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json j;
  j["epochs_run"] = r.epoch_loss.size();
  j["epoch_loss"] = r.epoch_loss;
  j["convergence_epoch"] = r.convergence_epoch ? nlohmann::json(*r.convergence_epoch) : nlohmann::json(nullptr);
  j["convergence_tolerance"] = kConvergenceTolerance;
  j["convergence_window"] = kConvergenceWindow;
  j["constraint_violations"] = r.constraint_violations;
  return j;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"rms_decay", c.rms_decay},
          {"rms_epsilon", c.rms_epsilon},
          {"margin", c.margin},
          {"negatives_per_positive", c.negatives_per_positive},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"split", {c.split.train, c.split.valid, c.split.test}}};
}

// Every key is optional; absent keys keep their defaults.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("rms_decay")) c.rms_decay = j["rms_decay"].get<double>();
    if (j.contains("rms_epsilon")) c.rms_epsilon = j["rms_epsilon"].get<double>();
    if (j.contains("margin")) c.margin = j["margin"].get<double>();
    if (j.contains("negatives_per_positive")) c.negatives_per_positive = j["negatives_per_positive"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("split")) {
      auto s = j["split"].get<std::vector<double>>();
      if (s.size() != 3) throw Error(ErrorCategory::invalid_argument, "split must have three fractions");
      c.split = {s[0], s[1], s[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, std::string("malformed train config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace ikg
