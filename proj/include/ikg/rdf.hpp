#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ikg/error.hpp"

namespace ikg {

inline constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";

enum class TermKind : std::uint8_t { iri, literal, placeholder };

// An RDF node. IRIs are always stored expanded; prefixes only exist in the
// owning Graph's prefix map and are re-applied on serialization.
struct Term {
  TermKind kind = TermKind::iri;
  std::string value;     // IRI, or literal lexical form
  std::string datatype;  // literal datatype IRI, empty for a plain literal
  std::uint32_t slot = 0;

  static Term iri(std::string iri) { return Term{TermKind::iri, std::move(iri), {}, 0}; }
  static Term literal(std::string lexical, std::string datatype = {}) {
    return Term{TermKind::literal, std::move(lexical), std::move(datatype), 0};
  }
  static Term placeholder(std::uint32_t slot) { return Term{TermKind::placeholder, {}, {}, slot}; }

  bool is_iri() const noexcept { return kind == TermKind::iri; }
  bool is_literal() const noexcept { return kind == TermKind::literal; }
  bool is_placeholder() const noexcept { return kind == TermKind::placeholder; }

  bool operator==(const Term&) const = default;
};

struct Triple {
  Term head;
  Term relation;
  Term tail;

  bool operator==(const Triple&) const = default;

  bool has_placeholder() const noexcept {
    return head.is_placeholder() || tail.is_placeholder();
  }
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.value);
    h ^= std::hash<std::string>{}(t.datatype) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= (static_cast<std::size_t>(t.kind) << 32) ^ t.slot;
    return h;
  }
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    TermHash th;
    std::size_t h = th(t.head);
    h = h * 1000003u ^ th(t.relation);
    h = h * 1000003u ^ th(t.tail);
    return h;
  }
};

using PrefixMap = std::map<std::string, std::string>;

// Set of fact triples with insertion order retained for deterministic output.
class Graph {
 public:
  Graph() = default;

  // Returns false (and counts a duplicate) when the triple is already present.
  bool insert(Triple triple) {
    if (!triple.relation.is_iri()) {
      throw Error(ErrorCategory::invalid_argument, "relation must be an IRI");
    }
    if (triple.head.is_literal()) {
      throw Error(ErrorCategory::invalid_argument, "literal in subject position");
    }
    if (!index_.insert(triple).second) {
      ++duplicates_;
      return false;
    }
    triples_.push_back(std::move(triple));
    return true;
  }

  bool contains(const Triple& triple) const { return index_.count(triple) != 0; }

  std::span<const Triple> triples() const noexcept { return triples_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  std::size_t duplicates_collapsed() const noexcept { return duplicates_; }

  const PrefixMap& prefixes() const noexcept { return prefixes_; }
  void set_prefix(std::string prefix, std::string base) { prefixes_[std::move(prefix)] = std::move(base); }
  void set_prefixes(PrefixMap prefixes) { prefixes_ = std::move(prefixes); }

  bool is_complete() const noexcept {
    for (const auto& t : triples_) {
      if (t.has_placeholder()) return false;
    }
    return true;
  }

  // Set equality on triples, map equality on prefixes.
  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.prefixes_ != b.prefixes_ || a.triples_.size() != b.triples_.size()) return false;
    for (const auto& t : a.triples_) {
      if (!b.contains(t)) return false;
    }
    return true;
  }

 private:
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> index_;
  PrefixMap prefixes_;
  std::size_t duplicates_ = 0;
};

inline bool contains(const Graph& graph, const Triple& triple) { return graph.contains(triple); }

// Dense bijection between terms and indices, one table for entities and one
// for relations.
class Vocab {
 public:
  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }

  const Term& entity(std::size_t i) const { return entities_.at(i); }
  const Term& relation(std::size_t i) const { return relations_.at(i); }
  std::span<const Term> entities() const noexcept { return entities_; }
  std::span<const Term> relations() const noexcept { return relations_; }

  std::optional<std::size_t> entity_index(const Term& t) const {
    auto it = entity_ids_.find(t);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> relation_index(const Term& t) const {
    auto it = relation_ids_.find(t);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t add_entity(const Term& t) { return add(t, entities_, entity_ids_); }
  std::size_t add_relation(const Term& t) {
    if (!t.is_iri()) throw Error(ErrorCategory::vocab, "relation must be an IRI");
    return add(t, relations_, relation_ids_);
  }

  bool operator==(const Vocab& other) const {
    return entities_ == other.entities_ && relations_ == other.relations_;
  }

 private:
  static std::size_t add(const Term& t, std::vector<Term>& list,
                         std::unordered_map<Term, std::size_t, TermHash>& ids) {
    if (t.is_placeholder()) throw Error(ErrorCategory::vocab, "placeholder term cannot enter a vocabulary");
    auto [it, inserted] = ids.emplace(t, list.size());
    if (inserted) list.push_back(t);
    return it->second;
  }

  std::vector<Term> entities_;
  std::vector<Term> relations_;
  std::unordered_map<Term, std::size_t, TermHash> entity_ids_;
  std::unordered_map<Term, std::size_t, TermHash> relation_ids_;
};

// Entities are indexed in order of first appearance (head before tail),
// relations likewise.
inline Vocab build_vocab(const Graph& graph) {
  Vocab vocab;
  for (const auto& t : graph.triples()) {
    if (t.has_placeholder()) {
      throw Error(ErrorCategory::vocab, "cannot build a vocabulary from a graph with placeholders");
    }
    vocab.add_entity(t.head);
    vocab.add_relation(t.relation);
    vocab.add_entity(t.tail);
  }
  return vocab;
}

// Index-space view of a triple.
struct IndexedTriple {
  std::size_t head = 0;
  std::size_t relation = 0;
  std::size_t tail = 0;

  bool operator==(const IndexedTriple&) const = default;
};

struct IndexedTripleHash {
  std::size_t operator()(const IndexedTriple& t) const noexcept {
    std::uint64_t h = t.head * 0x9e3779b97f4a7c15ULL;
    h ^= (t.relation + 0x632be59bd9b4e019ULL) * 0xbf58476d1ce4e5b9ULL;
    h ^= (t.tail + 0x94d049bb133111ebULL) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

using IndexedTripleSet = std::unordered_set<IndexedTriple, IndexedTripleHash>;

inline IndexedTriple to_indexed(const Vocab& vocab, const Triple& t) {
  auto h = vocab.entity_index(t.head);
  auto r = vocab.relation_index(t.relation);
  auto tl = vocab.entity_index(t.tail);
  if (!h || !r || !tl) throw Error(ErrorCategory::vocab, "triple term not in vocabulary");
  return {*h, *r, *tl};
}

inline Triple to_triple(const Vocab& vocab, const IndexedTriple& t) {
  return {vocab.entity(t.head), vocab.relation(t.relation), vocab.entity(t.tail)};
}

// Index-space copy of a graph whose terms all belong to `vocab`.
inline std::vector<IndexedTriple> index_triples(const Vocab& vocab, const Graph& graph) {
  std::vector<IndexedTriple> out;
  out.reserve(graph.size());
  for (const auto& t : graph.triples()) out.push_back(to_indexed(vocab, t));
  return out;
}

inline IndexedTripleSet index_set(const Vocab& vocab, const Graph& graph) {
  IndexedTripleSet out;
  for (const auto& t : graph.triples()) out.insert(to_indexed(vocab, t));
  return out;
}

}  // namespace ikg
