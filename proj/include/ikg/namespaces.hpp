#pragma once

#include <string>
#include <string_view>

#include "ikg/rdf.hpp"

// IRIs of the intent knowledge graph vocabulary shared by the generator, the
// shipped fixtures and the pipeline defaults.
namespace ikg::ns {

inline constexpr std::string_view icm = "http://tio.models.tmforum.org/tio/v3.6.0/IntentCommonModel/";
inline constexpr std::string_view service = "http://example.org/ikg/service#";
inline constexpr std::string_view nonmcptt = "http://example.org/ikg/nonmcptt#";
inline constexpr std::string_view mcptt = "http://example.org/ikg/mcptt#";
inline constexpr std::string_view kpi = "http://example.org/ikg/kpi#";
inline constexpr std::string_view res = "http://example.org/ikg/resource#";
inline constexpr std::string_view site = "http://example.org/ikg/site#";
inline constexpr std::string_view slot = "urn:ikg:slot:";

inline std::string iri(std::string_view base, std::string_view local) {
  return std::string(base) + std::string(local);
}

inline Term term(std::string_view base, std::string_view local) { return Term::iri(iri(base, local)); }

// The class-hierarchy edge, spelled as in the source ontology. An edge
// (A, rdfs:subclass, B) states that B specializes A.
inline std::string subclass() { return iri(kRdfsNs, "subclass"); }
inline std::string type() { return iri(kRdfNs, "type"); }

inline PrefixMap default_prefixes() {
  return {{"icm", std::string(icm)},           {"service", std::string(service)},
          {"nonmcptt", std::string(nonmcptt)}, {"mcptt", std::string(mcptt)},
          {"kpi", std::string(kpi)},           {"res", std::string(res)},
          {"site", std::string(site)},         {"rdf", std::string(kRdfNs)},
          {"rdfs", std::string(kRdfsNs)},      {"xsd", std::string(kXsdNs)}};
}

}  // namespace ikg::ns
