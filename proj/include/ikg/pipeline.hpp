#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ikg/error.hpp"
#include "ikg/evaluation.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/model_io.hpp"
#include "ikg/namespaces.hpp"
#include "ikg/rdf.hpp"
#include "ikg/rdf_io.hpp"

namespace ikg {

enum class Role { service, resource, kpi, value };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::service: return "service";
    case Role::resource: return "resource";
    case Role::kpi: return "kpi";
    case Role::value: return "value";
  }
  return "value";
}

inline std::optional<Role> role_from_string(std::string_view s) {
  if (s == "service") return Role::service;
  if (s == "resource") return Role::resource;
  if (s == "kpi") return Role::kpi;
  if (s == "value") return Role::value;
  return std::nullopt;
}

// Which role each side of a relation plays, and which IKG class roots each
// role. Value slots are literal-valued and have no root class.
struct RoleSchema {
  struct Sides {
    std::optional<Role> head;
    std::optional<Role> tail;
  };
  std::map<std::string, Sides> relations;
  std::map<Role, std::string> root_class;

  static RoleSchema defaults() {
    RoleSchema s;
    s.relations[ns::iri(ns::icm, "hasTarget")] = {std::nullopt, Role::service};
    s.relations[ns::iri(ns::icm, "targetResource")] = {Role::service, Role::resource};
    s.relations[ns::iri(ns::icm, "servedBy")] = {Role::service, Role::resource};
    s.relations[ns::iri(ns::icm, "hasParameter")] = {Role::service, Role::kpi};
    s.relations[ns::iri(ns::icm, "valueBy")] = {Role::kpi, Role::value};
    s.root_class[Role::service] = ns::iri(ns::icm, "Target");
    s.root_class[Role::resource] = ns::iri(ns::icm, "Resource");
    s.root_class[Role::kpi] = ns::iri(ns::icm, "PropertyParameter");
    return s;
  }
};

// Class structure of the IKG: subclass closure and rdf:type assertions.
class Ontology {
 public:
  explicit Ontology(const Graph& ikg) {
    const Term subclass = Term::iri(ns::subclass());
    const Term type = Term::iri(ns::type());
    std::unordered_map<Term, std::vector<Term>, TermHash> children;
    for (const auto& t : ikg.triples()) {
      if (t.relation == subclass) {
        children[t.head].push_back(t.tail);
      } else if (t.relation == type) {
        types_[t.head].push_back(t.tail);
      }
    }
    for (const auto& [parent, direct] : children) {
      auto& closure = descendants_[parent];
      std::vector<Term> stack(direct.begin(), direct.end());
      while (!stack.empty()) {
        Term c = std::move(stack.back());
        stack.pop_back();
        if (!closure.insert(c).second) continue;
        auto it = children.find(c);
        if (it != children.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
      }
    }
  }

  // True when `term` is a strict subclass of `cls`.
  bool is_descendant(const Term& term, const Term& cls) const {
    auto it = descendants_.find(cls);
    return it != descendants_.end() && it->second.count(term) != 0;
  }

  // `term` is `cls`, a subclass of it, or an instance of either.
  bool falls_under(const Term& term, const Term& cls) const {
    if (term == cls || is_descendant(term, cls)) return true;
    auto it = types_.find(term);
    if (it == types_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const Term& k) { return k == cls || is_descendant(k, cls); });
  }

  // Strict subclass of the role's root class, or an instance of the root or
  // one of its subclasses. Value roles admit literals only.
  bool admissible(const Term& term, Role role, const RoleSchema& schema) const {
    if (role == Role::value) return term.is_literal();
    if (term.is_literal()) return false;
    auto it = schema.root_class.find(role);
    if (it == schema.root_class.end()) return false;
    const Term root = Term::iri(it->second);
    if (is_descendant(term, root)) return true;
    auto tt = types_.find(term);
    if (tt == types_.end()) return false;
    return std::any_of(tt->second.begin(), tt->second.end(),
                       [&](const Term& k) { return k == root || is_descendant(k, root); });
  }

 private:
  std::unordered_map<Term, std::unordered_set<Term, TermHash>, TermHash> descendants_;
  std::unordered_map<Term, std::vector<Term>, TermHash> types_;
};

struct Hint {
  Role role;
  Term term;

  bool operator==(const Hint&) const = default;
};

struct KeywordCorpus {
  std::map<std::string, std::vector<Hint>> entries;  // normalized keyword -> hints
};

inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u == '-' || u == '_' || u >= 0x80) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string normalize_keyword(std::string_view keyword) {
  std::string out;
  for (const auto& w : tokenize_words(keyword)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Lines of `keyword TAB role TAB entity`; '#' starts a comment line. Entities
// may be prefixed names (resolved against `prefixes`) or <full IRIs>. When a
// vocabulary is given, every hint must name one of its entities.
inline KeywordCorpus parse_corpus(std::string_view text, const PrefixMap& prefixes, const Vocab* vocab = nullptr) {
  KeywordCorpus corpus;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) throw ParseError(line_no, 1, "corpus line must have 3 tab-separated fields");
    const std::string keyword = normalize_keyword(fields[0]);
    if (keyword.empty()) throw ParseError(line_no, 1, "empty keyword");
    auto role = role_from_string(fields[1]);
    if (!role) throw ParseError(line_no, fields[0].size() + 2, "unknown role '" + fields[1] + "'");
    const std::string& ent = fields[2];
    Term term;
    if (!ent.empty() && ent.front() == '<') {
      term = parse_term(ent);
    } else {
      auto colon = ent.find(':');
      auto it = colon == std::string::npos ? prefixes.end() : prefixes.find(ent.substr(0, colon));
      if (it == prefixes.end()) throw ParseError(line_no, fields[0].size() + fields[1].size() + 3, "unresolved prefix in '" + ent + "'");
      term = Term::iri(it->second + ent.substr(colon + 1));
    }
    if (vocab && !vocab->entity_index(term)) {
      throw Error(ErrorCategory::vocab, "corpus line " + std::to_string(line_no) + ": hint " + ent +
                                            " is not an IKG entity");
    }
    auto& hints = corpus.entries[keyword];
    Hint h{*role, std::move(term)};
    if (std::find(hints.begin(), hints.end(), h) == hints.end()) hints.push_back(std::move(h));
  }
  return corpus;
}

struct KeywordMatch {
  std::string keyword;
  std::vector<Hint> hints;
};

// Step A: case-folded longest-match over word tokens. Matches come out in
// text order, each keyword once (at its first position).
inline std::vector<KeywordMatch> extract_keywords(std::string_view text, const KeywordCorpus& corpus) {
  std::size_t max_words = 0;
  for (const auto& [k, _] : corpus.entries) {
    max_words = std::max<std::size_t>(max_words, 1 + std::count(k.begin(), k.end(), ' '));
  }
  const auto words = tokenize_words(text);
  std::vector<KeywordMatch> out;
  std::set<std::string> seen;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    for (std::size_t n = std::min(max_words, words.size() - i); n >= 1; --n) {
      std::string phrase = words[i];
      for (std::size_t k = 1; k < n; ++k) phrase += ' ' + words[i + k];
      auto it = corpus.entries.find(phrase);
      if (it != corpus.entries.end()) {
        if (seen.insert(phrase).second) out.push_back({phrase, it->second});
        matched = n;
        break;
      }
    }
    i += matched == 0 ? 1 : matched;
  }
  return out;
}

// A blueprint term `slot:N` stands for whatever slot N was completed with.
inline std::optional<std::uint32_t> slot_reference(const Term& t) {
  if (!t.is_iri() || t.value.size() <= ns::slot.size() || t.value.compare(0, ns::slot.size(), ns::slot) != 0) {
    return std::nullopt;
  }
  std::uint32_t n = 0;
  for (std::size_t i = ns::slot.size(); i < t.value.size(); ++i) {
    char c = t.value[i];
    if (c < '0' || c > '9') return std::nullopt;
    n = n * 10 + static_cast<std::uint32_t>(c - '0');
  }
  return n;
}

struct Slot {
  std::uint32_t id = 0;
  Triple triple;  // exactly one placeholder
  Role role = Role::service;
};

struct IntentTemplate {
  std::string intent_id;
  std::vector<Triple> complete;
  std::vector<Slot> slotted;
  PrefixMap prefixes;
};

// Step B: split the blueprint into complete triples and role-tagged slots.
inline IntentTemplate build_template(const Graph& blueprint, const RoleSchema& schema, std::string intent_id) {
  IntentTemplate tpl;
  tpl.intent_id = std::move(intent_id);
  tpl.prefixes = blueprint.prefixes();
  tpl.prefixes.erase("slot");
  auto malformed = [](const std::string& msg) { return Error(ErrorCategory::invalid_argument, "malformed blueprint: " + msg); };
  for (const auto& t : blueprint.triples()) {
    if (!t.has_placeholder()) {
      tpl.complete.push_back(t);
      continue;
    }
    if (t.head.is_placeholder() && t.tail.is_placeholder()) throw malformed("triple with two placeholders");
    auto sides = schema.relations.find(t.relation.value);
    if (sides == schema.relations.end()) throw malformed("no role known for relation <" + t.relation.value + ">");
    const bool head_missing = t.head.is_placeholder();
    auto role = head_missing ? sides->second.head : sides->second.tail;
    if (!role) throw malformed("relation <" + t.relation.value + "> has no role on the missing side");
    const std::uint32_t id = head_missing ? t.head.slot : t.tail.slot;
    const Term& known = head_missing ? t.tail : t.head;
    if (auto ref = slot_reference(known); ref && *ref >= id) {
      throw malformed("slot " + std::to_string(id) + " refers to a later slot " + std::to_string(*ref));
    }
    tpl.slotted.push_back({id, t, *role});
  }
  std::sort(tpl.slotted.begin(), tpl.slotted.end(), [](const Slot& a, const Slot& b) { return a.id < b.id; });
  return tpl;
}

// Step C.
inline std::vector<Slot> find_incomplete(const IntentTemplate& tpl) {
  std::vector<Slot> slots = tpl.slotted;
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.id < b.id; });
  return slots;
}

struct Prediction {
  Term candidate;
  double score = 0.0;
  std::size_t rank = 1;
};

// Entities eligible per role: literals observed as tails of each relation for
// value slots, every non-literal entity otherwise.
class CandidatePool {
 public:
  CandidatePool(const Vocab& vocab, const Graph& ikg) {
    for (std::size_t e = 0; e < vocab.entity_count(); ++e) {
      if (!vocab.entity(e).is_literal()) non_literal_.push_back(e);
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : ikg.triples()) {
      if (!t.tail.is_literal()) continue;
      auto r = vocab.relation_index(t.relation);
      auto e = vocab.entity_index(t.tail);
      if (r && e && seen.insert({*r, *e}).second) literals_[*r].push_back(*e);
    }
  }

  const std::vector<std::size_t>& candidates(Role role, std::size_t relation) const {
    static const std::vector<std::size_t> none;
    if (role != Role::value) return non_literal_;
    auto it = literals_.find(relation);
    return it == literals_.end() ? none : it->second;
  }

 private:
  std::vector<std::size_t> non_literal_;
  std::map<std::size_t, std::vector<std::size_t>> literals_;
};

// Step D: top-k completions of the placeholder position, score descending,
// ties by entity index.
inline std::vector<Prediction> predict_candidates(const Kg2eModel& model, const Triple& slotted, Role role,
                                                  std::size_t k, const CandidatePool& pool) {
  if (k < 1) throw Error(ErrorCategory::invalid_argument, "k must be >= 1");
  if (slotted.head.is_placeholder() == slotted.tail.is_placeholder()) {
    throw Error(ErrorCategory::invalid_argument, "slotted triple must have exactly one placeholder");
  }
  const bool predict_tail = slotted.tail.is_placeholder();
  const Term& known = predict_tail ? slotted.head : slotted.tail;
  auto known_idx = model.vocab.entity_index(known);
  auto rel = model.vocab.relation_index(slotted.relation);
  if (!known_idx) throw Error(ErrorCategory::vocab, "unknown entity " + format_term(known));
  if (!rel) throw Error(ErrorCategory::vocab, "unknown relation " + format_term(slotted.relation));
  if (role == Role::value && !predict_tail) {
    throw Error(ErrorCategory::invalid_argument, "value slots must be in tail position");
  }

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t e : pool.candidates(role, *rel)) {
    double s = predict_tail ? score(model, *known_idx, *rel, e) : score(model, e, *rel, *known_idx);
    scored.emplace_back(s, e);
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<Prediction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({model.vocab.entity(scored[i].second), scored[i].first, i + 1});
  return out;
}

struct SlotOutcome {
  std::uint32_t slot = 0;
  Role role = Role::service;
  Triple triple;  // completed
  Term chosen;
  std::size_t rank = 0;
  double score = 0.0;
  std::vector<std::string> ignored_hints;  // hints incompatible with the slot role
  std::optional<bool> valid;               // set by verification
  double threshold = 0.0;
};

struct NetworkIntent {
  std::string intent_id;
  PrefixMap prefixes;
  std::vector<Triple> triples;  // complete blueprint triples, then completed slots
  std::vector<SlotOutcome> slots;
  bool verified = false;
};

struct CompletionContext {
  const Kg2eModel& model;
  const Ontology& ontology;
  const CandidatePool& pool;
  const RoleSchema& schema;
};

namespace detail {

inline Term substitute(const Term& t, const std::map<std::uint32_t, Term>& chosen) {
  if (auto ref = slot_reference(t)) {
    auto it = chosen.find(*ref);
    if (it == chosen.end()) {
      throw Error(ErrorCategory::unresolved_slot, "reference to unresolved slot " + std::to_string(*ref));
    }
    return it->second;
  }
  return t;
}

inline Triple substitute(const Triple& t, const std::map<std::uint32_t, Term>& chosen) {
  return {substitute(t.head, chosen), t.relation, substitute(t.tail, chosen)};
}

}  // namespace detail

// Step E. For each slot (in id order) the chosen candidate is the first of the
// top-k predictions that is ontology-admissible for the slot role and, for
// every keyword carrying hints for that role, falls under one of its hints.
// Hints that are themselves inadmissible for the role are ignored and listed.
inline NetworkIntent complete_template(const IntentTemplate& tpl, const CompletionContext& ctx,
                                       const std::vector<KeywordMatch>& keywords, std::size_t k) {
  NetworkIntent intent;
  intent.intent_id = tpl.intent_id;
  intent.prefixes = tpl.prefixes;
  std::map<std::uint32_t, Term> chosen;

  for (const auto& slot : find_incomplete(tpl)) {
    SlotOutcome out;
    out.slot = slot.id;
    out.role = slot.role;
    const Triple resolved = detail::substitute(slot.triple, chosen);

    std::vector<std::vector<Term>> hint_groups;
    for (const auto& kw : keywords) {
      std::vector<Term> group;
      for (const auto& h : kw.hints) {
        if (h.role != slot.role) continue;
        const bool compatible = slot.role == Role::value || ctx.ontology.admissible(h.term, slot.role, ctx.schema) ||
                                (ctx.schema.root_class.count(slot.role) &&
                                 h.term == Term::iri(ctx.schema.root_class.at(slot.role)));
        if (compatible) {
          group.push_back(h.term);
        } else {
          out.ignored_hints.push_back(kw.keyword + " -> " + format_term(h.term, tpl.prefixes));
        }
      }
      if (!group.empty()) hint_groups.push_back(std::move(group));
    }

    std::vector<Prediction> predictions;
    if (k > 0) predictions = predict_candidates(ctx.model, resolved, slot.role, k, ctx.pool);
    const Prediction* pick = nullptr;
    for (const auto& p : predictions) {
      if (!ctx.ontology.admissible(p.candidate, slot.role, ctx.schema)) continue;
      const bool consistent = std::all_of(hint_groups.begin(), hint_groups.end(), [&](const auto& group) {
        return std::any_of(group.begin(), group.end(),
                           [&](const Term& h) { return ctx.ontology.falls_under(p.candidate, h); });
      });
      if (consistent) {
        pick = &p;
        break;
      }
    }
    if (!pick) {
      throw Error(ErrorCategory::unresolved_slot, "slot " + std::to_string(slot.id) + " (" +
                                                      format_triple(resolved, tpl.prefixes) +
                                                      "): no admissible candidate in top " + std::to_string(k));
    }
    out.chosen = pick->candidate;
    out.rank = pick->rank;
    out.score = pick->score;
    out.triple = resolved.tail.is_placeholder() ? Triple{resolved.head, resolved.relation, pick->candidate}
                                                : Triple{pick->candidate, resolved.relation, resolved.tail};
    chosen[slot.id] = pick->candidate;
    intent.slots.push_back(std::move(out));
  }

  for (const auto& t : tpl.complete) intent.triples.push_back(detail::substitute(t, chosen));
  for (const auto& s : intent.slots) intent.triples.push_back(s.triple);
  return intent;
}

// Step F: the intent is verified iff every completed slot triple classifies
// as valid.
inline NetworkIntent verify_intent(NetworkIntent candidate, const Kg2eModel& model, const ThresholdTable& thresholds) {
  for (const auto& t : candidate.triples) {
    if (t.has_placeholder()) throw Error(ErrorCategory::invalid_argument, "cannot verify an intent with placeholders");
  }
  bool all = true;
  for (auto& s : candidate.slots) {
    const IndexedTriple it = to_indexed(model.vocab, s.triple);
    s.threshold = thresholds.threshold_for(it.relation);
    s.valid = classify(model, it, thresholds);
    all = all && *s.valid;
  }
  candidate.verified = all;
  return candidate;
}

inline std::string make_intent_id(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : normalize_keyword(text)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id = "intent-";
  for (int shift = 60; shift >= 0; shift -= 4) id += kHex[(h >> shift) & 0xF];
  return id;
}

struct TranslateInputs {
  const Kg2eModel& model;
  const Graph& ikg;
  const KeywordCorpus& corpus;
  const Graph& blueprint;
  std::size_t k = 10;
  const ThresholdTable& thresholds;
  RoleSchema schema = RoleSchema::defaults();
};

struct Translation {
  std::vector<KeywordMatch> keywords;
  NetworkIntent intent;
};

// Steps A through F. Failures are re-raised with the step that produced them.
inline Translation translate(std::string_view text, const TranslateInputs& in) {
  auto step = [](const char* label, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.category(), std::string("step ") + label + ": " + e.what());
    }
  };
  Translation out;
  out.keywords = step("A (recognition)", [&] { return extract_keywords(text, in.corpus); });
  IntentTemplate tpl = step("B (template)", [&] { return build_template(in.blueprint, in.schema, make_intent_id(text)); });
  for (const auto& [prefix, base] : in.ikg.prefixes()) tpl.prefixes.emplace(prefix, base);
  const Ontology ontology(in.ikg);
  const CandidatePool pool(in.model.vocab, in.ikg);
  const CompletionContext ctx{in.model, ontology, pool, in.schema};
  NetworkIntent candidate = step("C-E (completion)", [&] { return complete_template(tpl, ctx, out.keywords, in.k); });
  out.intent = step("F (verification)", [&] { return verify_intent(std::move(candidate), in.model, in.thresholds); });
  return out;
}

inline Graph to_graph(const NetworkIntent& intent) {
  Graph g;
  g.set_prefixes(intent.prefixes);
  for (const auto& t : intent.triples) g.insert(t);
  return g;
}

inline nlohmann::json to_json(const NetworkIntent& intent, const std::vector<KeywordMatch>& keywords = {}) {
  nlohmann::json j;
  j["intent_id"] = intent.intent_id;
  j["verified"] = intent.verified;
  auto kws = nlohmann::json::array();
  for (const auto& kw : keywords) kws.push_back(kw.keyword);
  j["keywords"] = kws;
  auto slots = nlohmann::json::array();
  auto failing = nlohmann::json::array();
  for (const auto& s : intent.slots) {
    nlohmann::json js{{"slot", s.slot},
                      {"role", to_string(s.role)},
                      {"triple", format_triple(s.triple, intent.prefixes)},
                      {"chosen", format_term(s.chosen, intent.prefixes)},
                      {"rank", s.rank},
                      {"score", s.score},
                      {"threshold", detail::encode_real(s.threshold)},
                      {"classified", s.valid ? nlohmann::json(*s.valid) : nlohmann::json(nullptr)},
                      {"ignored_hints", s.ignored_hints}};
    if (s.valid && !*s.valid) failing.push_back({{"slot", s.slot}, {"triple", js["triple"]}, {"score", s.score}});
    slots.push_back(std::move(js));
  }
  j["slots"] = slots;
  j["failing"] = failing;
  return j;
}

}  // namespace ikg
