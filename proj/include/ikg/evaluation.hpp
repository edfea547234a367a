#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ikg/error.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/rdf.hpp"
#include "ikg/training.hpp"

namespace ikg {

enum class Side { right, left, both };

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::right: return "right";
    case Side::left: return "left";
    case Side::both: return "both";
  }
  return "both";
}

// Anything callable as score(head, relation, tail) -> double.
template <typename F>
concept TripleScorer = requires(const F& f, std::size_t i) {
  { f(i, i, i) } -> std::convertible_to<double>;
};

inline auto model_scorer(const Kg2eModel& model) {
  return [&model](std::size_t h, std::size_t r, std::size_t t) { return score(model, h, r, t); };
}

// Rank of the true entity among all |E| completions on one side, scores
// sorted descending. Ties share the mean of the positions they occupy. When
// `filtered`, other completions present in `known` are dropped first.
template <TripleScorer Scorer>
double rank_triple(const Scorer& scorer, std::size_t entity_count, const IndexedTriple& truth, Side side,
                   const IndexedTripleSet* known, bool filtered) {
  if (side == Side::both) throw Error(ErrorCategory::invalid_argument, "rank_triple needs a single side");
  if (filtered && known == nullptr) throw Error(ErrorCategory::invalid_argument, "filtered ranking needs known triples");
  const std::size_t true_entity = side == Side::right ? truth.tail : truth.head;
  if (true_entity >= entity_count) throw Error(ErrorCategory::vocab, "true entity outside the candidate range");
  const double true_score = scorer(truth.head, truth.relation, truth.tail);
  std::size_t greater = 0, ties = 0;
  for (std::size_t e = 0; e < entity_count; ++e) {
    if (e == true_entity) continue;
    IndexedTriple c = truth;
    (side == Side::right ? c.tail : c.head) = e;
    if (filtered && known->count(c) != 0) continue;
    const double s = scorer(c.head, c.relation, c.tail);
    if (s > true_score) {
      ++greater;
    } else if (s == true_score) {
      ++ties;
    }
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(ties) / 2.0;
}

inline double rank_triple(const Kg2eModel& model, const Triple& triple, Side side, const Graph& known,
                          bool filtered) {
  const IndexedTriple t = to_indexed(model.vocab, triple);
  const IndexedTripleSet known_set = filtered ? index_set(model.vocab, known) : IndexedTripleSet{};
  return rank_triple(model_scorer(model), model.entity_count(), t, side, &known_set, filtered);
}

struct RankMetrics {
  double mean_rank = 0.0;
  std::map<std::size_t, double> hits;  // p -> fraction of ranks <= p
  Side side = Side::both;
  bool filtered = false;
  std::size_t ranked = 0;  // number of individual rankings aggregated
};

inline const std::vector<std::size_t>& default_hits_ps() {
  static const std::vector<std::size_t> ps{1, 3, 10};
  return ps;
}

template <TripleScorer Scorer>
RankMetrics evaluate_ranks(const Scorer& scorer, std::size_t entity_count, std::span<const IndexedTriple> test,
                           const IndexedTripleSet& known, bool filtered,
                           const std::vector<std::size_t>& hits_ps = default_hits_ps(), Side side = Side::both) {
  if (test.empty()) throw Error(ErrorCategory::invalid_argument, "rank evaluation needs a non-empty test set");
  std::vector<double> ranks;
  ranks.reserve(test.size() * 2);
  for (const auto& t : test) {
    if (side != Side::left) ranks.push_back(rank_triple(scorer, entity_count, t, Side::right, &known, filtered));
    if (side != Side::right) ranks.push_back(rank_triple(scorer, entity_count, t, Side::left, &known, filtered));
  }
  RankMetrics m;
  m.side = side;
  m.filtered = filtered;
  m.ranked = ranks.size();
  double sum = 0.0;
  for (double r : ranks) sum += r;
  m.mean_rank = sum / static_cast<double>(ranks.size());
  for (std::size_t p : hits_ps) {
    auto hit = std::count_if(ranks.begin(), ranks.end(), [p](double r) { return r <= static_cast<double>(p); });
    m.hits[p] = static_cast<double>(hit) / static_cast<double>(ranks.size());
  }
  return m;
}

inline RankMetrics evaluate_ranks(const Kg2eModel& model, const Graph& test, const Graph& known, bool filtered,
                                  const std::vector<std::size_t>& hits_ps = default_hits_ps(),
                                  Side side = Side::both) {
  const auto indexed = index_triples(model.vocab, test);
  return evaluate_ranks(model_scorer(model), model.entity_count(), indexed, index_set(model.vocab, known),
                        filtered, hits_ps, side);
}

struct ThresholdChoice {
  double threshold = 0.0;
  double accuracy = 0.0;
};

// Accuracy-maximizing threshold for "valid iff score >= threshold".
// Candidates are the smallest score (accept all), midpoints between adjacent
// distinct scores, and just above the largest score (reject all); ties in
// accuracy resolve to the lowest candidate.
inline ThresholdChoice best_threshold(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() && neg.empty()) throw Error(ErrorCategory::invalid_argument, "no scores to threshold");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  const double total = static_cast<double>(items.size());
  // With threshold at or below the smallest score, all positives are right.
  std::size_t correct = pos.size();
  ThresholdChoice best{items.front().score, static_cast<double>(correct) / total};
  std::size_t i = 0;
  while (i < items.size()) {
    // Move every item with this score below the threshold.
    const double s = items[i].score;
    while (i < items.size() && items[i].score == s) {
      if (items[i].positive) {
        --correct;
      } else {
        ++correct;
      }
      ++i;
    }
    const double candidate = i < items.size() ? s + (items[i].score - s) / 2.0
                                              : std::nextafter(s, std::numeric_limits<double>::infinity());
    const double acc = static_cast<double>(correct) / total;
    if (acc > best.accuracy) best = {candidate, acc};
  }
  return best;
}

template <TripleScorer Scorer>
ThresholdTable select_thresholds(const Scorer& scorer, std::span<const IndexedTriple> valid_pos,
                                 std::span<const IndexedTriple> valid_neg) {
  if (valid_pos.empty() && valid_neg.empty()) {
    throw Error(ErrorCategory::invalid_argument, "threshold selection needs validation triples");
  }
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_relation;
  std::vector<double> all_pos, all_neg;
  for (const auto& t : valid_pos) {
    double s = scorer(t.head, t.relation, t.tail);
    by_relation[t.relation].first.push_back(s);
    all_pos.push_back(s);
  }
  for (const auto& t : valid_neg) {
    double s = scorer(t.head, t.relation, t.tail);
    by_relation[t.relation].second.push_back(s);
    all_neg.push_back(s);
  }
  ThresholdTable table;
  for (const auto& [rel, scores] : by_relation) {
    table.per_relation[rel] = best_threshold(scores.first, scores.second).threshold;
  }
  table.fallback = best_threshold(all_pos, all_neg).threshold;
  return table;
}

inline ThresholdTable select_thresholds(const Kg2eModel& model, std::span<const IndexedTriple> valid_pos,
                                        std::span<const IndexedTriple> valid_neg) {
  return select_thresholds(model_scorer(model), valid_pos, valid_neg);
}

// One corrupted triple per positive, rejection-sampled against `known`.
inline std::vector<IndexedTriple> make_negatives(std::span<const IndexedTriple> positives, std::size_t entity_count,
                                                 const IndexedTripleSet& known, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IndexedTriple> out;
  out.reserve(positives.size());
  for (const auto& p : positives) out.push_back(sample_negative(p, entity_count, known, rng));
  return out;
}

inline bool classify(const Kg2eModel& model, const IndexedTriple& t, const ThresholdTable& thresholds) {
  return score(model, t) >= thresholds.threshold_for(t.relation);
}

inline bool classify(const Kg2eModel& model, const Triple& triple, const ThresholdTable& thresholds) {
  if (triple.has_placeholder()) {
    throw Error(ErrorCategory::invalid_argument, "cannot classify a triple with a placeholder");
  }
  return classify(model, to_indexed(model.vocab, triple), thresholds);
}

struct ClassificationMetrics {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  // Rates whose denominator is zero are left empty ("undefined").
  std::optional<double> accuracy, precision, recall, f1, tpr, tnr, fpr, fnr;
};

inline ClassificationMetrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ClassificationMetrics m{tp, tn, fp, fn};
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  m.tpr = m.recall;
  m.fnr = ratio(fn, tp + fn);
  m.tnr = ratio(tn, tn + fp);
  m.fpr = ratio(fp, tn + fp);
  return m;
}

inline ClassificationMetrics evaluate_classification(const Kg2eModel& model, std::span<const IndexedTriple> test_pos,
                                                     std::span<const IndexedTriple> test_neg,
                                                     const ThresholdTable& thresholds) {
  if (test_pos.empty() || test_neg.empty()) {
    throw Error(ErrorCategory::invalid_argument, "classification needs positive and negative test triples");
  }
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& t : test_pos) (classify(model, t, thresholds) ? tp : fn)++;
  for (const auto& t : test_neg) (classify(model, t, thresholds) ? fp : tn)++;
  return metrics_from_counts(tp, tn, fp, fn);
}

inline nlohmann::json to_json(const RankMetrics& m) {
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [p, v] : m.hits) hits[std::to_string(p)] = v;
  return {{"mean_rank", m.mean_rank},
          {"hits", hits},
          {"side", to_string(m.side)},
          {"filtered", m.filtered},
          {"ranked", m.ranked}};
}

inline nlohmann::json to_json(const ClassificationMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("undefined"); };
  return {{"tp", m.tp},
          {"tn", m.tn},
          {"fp", m.fp},
          {"fn", m.fn},
          {"accuracy", opt(m.accuracy)},
          {"precision", opt(m.precision)},
          {"recall", opt(m.recall)},
          {"f1", opt(m.f1)},
          {"tpr", opt(m.tpr)},
          {"tnr", opt(m.tnr)},
          {"fpr", opt(m.fpr)},
          {"fnr", opt(m.fnr)}};
}

}  // namespace ikg
