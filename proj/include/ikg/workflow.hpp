#pragma once

#include <cstdint>

#include "ikg/evaluation.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/training.hpp"

namespace ikg {

// Seed offsets for the sampled negatives of the validation and test splits.
inline constexpr std::uint64_t kValidNegSeedOffset = 1;
inline constexpr std::uint64_t kTestNegSeedOffset = 2;

struct ModelOptions {
  std::size_t dim = kDefaultDim;
  double c_min = kDefaultCovMin;
  double c_max = kDefaultCovMax;
  ScoreKind kind = ScoreKind::kl_divergence;
};

struct FitResult {
  DatasetSplit split;
  Kg2eModel model;
  TrainReport report;
};

// Thresholds chosen on the validation split against one sampled negative per
// positive.
inline ThresholdTable calibrate(const Kg2eModel& model, const DatasetSplit& split, std::uint64_t seed) {
  const auto known = index_set(split.vocab, split.all);
  const auto pos = index_triples(split.vocab, split.valid);
  const auto neg = make_negatives(pos, model.entity_count(), known, seed + kValidNegSeedOffset);
  return select_thresholds(model, pos, neg);
}

// Split, initialize, train and calibrate, all driven by config.seed.
inline FitResult fit(const Graph& graph, const TrainConfig& config, const ModelOptions& opts = {},
                     const EpochCallback& on_epoch = {}) {
  FitResult r{split_dataset(graph, config.split, config.seed), {}, {}};
  r.model = init_model(r.split.vocab, opts.dim, config.seed, opts.c_min, opts.c_max, opts.kind);
  r.report = train(r.model, r.split, config, on_epoch);
  if (!r.split.valid.empty()) r.model.thresholds = calibrate(r.model, r.split, config.seed);
  return r;
}

struct TestNegatives {
  std::vector<IndexedTriple> positives;
  std::vector<IndexedTriple> negatives;
};

inline TestNegatives test_pairs(const Kg2eModel& model, const DatasetSplit& split, std::uint64_t seed) {
  TestNegatives t;
  t.positives = index_triples(split.vocab, split.test);
  t.negatives = make_negatives(t.positives, model.entity_count(), index_set(split.vocab, split.all),
                               seed + kTestNegSeedOffset);
  return t;
}

}  // namespace ikg
