#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/error.hpp"
#include "ikg/namespaces.hpp"
#include "ikg/rdf.hpp"

namespace ikg {

struct IkgGenSpec {
  std::uint64_t seed = 42;
  std::size_t n_services = 96;
  std::size_t n_resources = 80;
  std::size_t n_kpis = 8;
  std::size_t target_triples = 1575;
};

inline constexpr double kGenTolerance = 0.02;

struct IkgGenResult {
  Graph graph;
  std::size_t structural_triples = 0;  // before service-to-resource filler
  std::size_t filler_triples = 0;
};

namespace detail {

struct KpiSpec {
  const char* name;
  std::vector<const char*> values;
};

inline const std::vector<KpiSpec>& kpi_catalog() {
  static const std::vector<KpiSpec> catalog{
      {"latency", {"150ms", "20ms", "300ms"}},
      {"throughput", {"10Mbps", "100Mbps"}},
      {"jitter", {"30ms", "5ms"}},
      {"packetLoss", {"0.1%", "0.001%"}},
      {"availability", {"99.9%", "99.999%"}},
      {"guaranteedBitrate", {"2Mbps", "25Mbps"}},
      {"reliability", {"99.99%", "99.9999%"}},
      {"setupTime", {"1s", "250ms"}},
  };
  return catalog;
}

struct Media {
  const char* name;         // "Video"
  const char* expectation;  // expectation class whose target it is
  std::vector<const char*> services;
  std::vector<const char*> kpis;
};

inline const std::array<Media, 3>& media_catalog() {
  static const std::array<Media, 3> media{{
      {"Video",
       "PropertyExpectation",
       {"ConvVideo", "LiveVideo", "VideoStreaming", "VideoConference", "SurveillanceVideo", "VideoOnDemand",
        "ImmersiveVideo", "BroadcastVideo"},
       {"latency", "throughput", "jitter"}},
      {"Voice",
       "DeliveryExpectation",
       {"ConvVoice", "VoiceCall", "PushToTalk", "VoiceConference", "Voicemail", "EmergencyCall", "VoiceBroadcast",
        "Intercom"},
       {"latency", "jitter", "packetLoss"}},
      {"Data",
       "ReportingExpectation",
       {"FileTransfer", "WebBrowsing", "IoTTelemetry", "Messaging", "CloudBackup", "SoftwareUpdate", "Telematics",
        "SensorUpload"},
       {"throughput", "packetLoss", "availability"}},
  }};
  return media;
}

inline std::string resource_type(bool gbr, bool mcptt) {
  return std::string(mcptt ? "Mcptt" : "NonMcptt") + (gbr ? "GBRService" : "NonGBRService");
}

inline std::string kpi_name(std::size_t i) {
  const auto& cat = kpi_catalog();
  return i < cat.size() ? cat[i].name : "kpi" + std::to_string(i);
}

}  // namespace detail

// Deterministic desk-scale intent knowledge graph: ICM skeleton, service and
// resource taxonomies, KPI parameters with literal values, and resource
// instances. Service-to-resource `servedBy` links are added until the triple
// count reaches the target.
inline IkgGenResult generate_ikg(const IkgGenSpec& spec) {
  if (spec.n_services == 0 || spec.n_resources == 0 || spec.target_triples == 0) {
    throw Error(ErrorCategory::invalid_argument, "service, resource and target counts must be positive");
  }
  using detail::media_catalog;
  const auto I = [](const char* local) { return ns::term(ns::icm, local); };
  const auto S = [](const std::string& local) { return ns::term(ns::service, local); };
  const Term subclass = Term::iri(ns::subclass());
  const Term type = Term::iri(ns::type());
  const Term has_expectation = I("hasExpectation"), has_target = I("hasTarget"), has_parameter = I("hasParameter");
  const Term target_resource = I("targetResource"), value_by = I("valueBy"), located_in = I("locatedIn");
  const Term served_by = I("servedBy");

  std::mt19937_64 rng(spec.seed);
  IkgGenResult result;
  Graph& g = result.graph;
  g.set_prefixes(ns::default_prefixes());
  auto add = [&](Term h, const Term& r, Term t) { g.insert(Triple{std::move(h), r, std::move(t)}); };

  // Intent common model skeleton.
  for (const char* e : {"PropertyExpectation", "DeliveryExpectation", "ReportingExpectation"}) {
    add(I("Intent"), has_expectation, I(e));
    add(I("Expectation"), subclass, I(e));
  }
  add(I("Expectation"), has_target, I("Target"));
  add(I("PropertyExpectation"), has_parameter, I("PropertyParameter"));

  // Service taxonomy: Target > media > GBR/NonGBR media class.
  for (const auto& m : media_catalog()) {
    const std::string media_class = std::string(m.name) + "Service";
    add(I("Target"), subclass, S(media_class));
    add(S(media_class), subclass, S(std::string("GBR") + m.name + "Service"));
    add(S(media_class), subclass, S(std::string("NonGBR") + m.name + "Service"));
  }

  // Resource taxonomy: Resource > GBR/NonGBR > (Mcptt|NonMcptt) leaf types.
  for (bool gbr : {true, false}) {
    const std::string family = gbr ? "GBR" : "NonGBR";
    add(I("Resource"), subclass, S(family));
    for (bool mcptt : {false, true}) add(S(family), subclass, S(detail::resource_type(gbr, mcptt)));
  }

  // KPI parameters and their observed values.
  const auto& catalog = detail::kpi_catalog();
  std::vector<std::string> kpis;
  for (std::size_t i = 0; i < spec.n_kpis; ++i) {
    kpis.push_back(detail::kpi_name(i));
    const Term kpi = ns::term(ns::kpi, kpis.back());
    add(I("PropertyParameter"), subclass, kpi);
    if (i < catalog.size()) {
      for (const char* v : catalog[i].values) add(kpi, value_by, Term::literal(v, std::string(kXsdString)));
    } else {
      for (int v = 1; v <= 2; ++v) {
        add(kpi, value_by, Term::literal("level" + std::to_string(v) + "-" + kpis.back(), std::string(kXsdString)));
      }
    }
  }
  auto has_kpi = [&](const std::string& name) { return std::find(kpis.begin(), kpis.end(), name) != kpis.end(); };

  // Sites and resource instances. Instance i serves combination i % 12, whose
  // resource type it is typed with; all instances of a combination are
  // deployed at one (seeded) site.
  constexpr std::size_t kSites = 7;
  constexpr std::size_t kCombos = 12;
  for (std::size_t s = 0; s < kSites; ++s) add(ns::term(ns::site, "Site" + std::to_string(s)), type, I("Site"));
  std::vector<std::size_t> combo_site(kCombos);
  std::uniform_int_distribution<std::size_t> pick_site(0, kSites - 1);
  for (auto& s : combo_site) s = pick_site(rng);
  std::vector<std::vector<Term>> pools(kCombos);
  for (std::size_t i = 0; i < spec.n_resources; ++i) {
    const std::size_t combo = i % kCombos;
    const bool gbr = (combo / 2) % 2 == 0;
    const bool mcptt = combo % 2 == 1;
    Term r = ns::term(ns::res, (gbr ? "gbrSlice" : "bestEffortSlice") + std::to_string(i));
    add(r, type, S(detail::resource_type(gbr, mcptt)));
    add(r, located_in, ns::term(ns::site, "Site" + std::to_string(combo_site[combo])));
    pools[combo].push_back(std::move(r));
  }
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);

  // Services, round-robin over media x GBR x MCPTT.
  struct ServiceInfo {
    Term term;
    std::size_t combo;
  };
  std::vector<ServiceInfo> services;
  std::array<std::size_t, 6> name_counter{};  // per (media, mcptt)
  for (std::size_t i = 0; i < spec.n_services; ++i) {
    const std::size_t combo = i % kCombos;
    const auto& m = media_catalog()[combo / 4];
    const bool gbr = (combo / 2) % 2 == 0;
    const bool mcptt = combo % 2 == 1;
    std::size_t& k = name_counter[(combo / 4) * 2 + (mcptt ? 1 : 0)];
    std::string local = std::string(mcptt ? "Mc" : "") + m.services[k % m.services.size()];
    if (k >= m.services.size()) local += std::to_string(k / m.services.size() + 1);
    ++k;
    Term svc = ns::term(mcptt ? ns::mcptt : ns::nonmcptt, local);

    add(S(std::string(gbr ? "GBR" : "NonGBR") + m.name + "Service"), subclass, svc);
    add(I(m.expectation), has_target, svc);
    add(svc, target_resource, S(detail::resource_type(gbr, mcptt)));
    std::vector<std::string> params(m.kpis.begin(), m.kpis.end());
    if (gbr) params.push_back("guaranteedBitrate");
    if (mcptt) {
      params.push_back("reliability");
      params.push_back("setupTime");
    }
    for (const auto& p : params) {
      if (has_kpi(p)) add(svc, has_parameter, ns::term(ns::kpi, p));
    }
    services.push_back({std::move(svc), combo});
  }

  result.structural_triples = g.size();
  const auto target = static_cast<double>(spec.target_triples);
  if (static_cast<double>(g.size()) > target * (1.0 + kGenTolerance)) {
    throw Error(ErrorCategory::invalid_argument,
                "infeasible generator spec: " + std::to_string(g.size()) + " structural triples exceed target " +
                    std::to_string(spec.target_triples));
  }

  // Filler: in round j every service is linked to the j-th instance of its
  // pool, so complete rounds give each combination a full bipartite block.
  std::size_t max_pool = 0;
  for (const auto& p : pools) max_pool = std::max(max_pool, p.size());
  for (std::size_t round = 0; round < max_pool && g.size() < spec.target_triples; ++round) {
    for (const auto& s : services) {
      if (g.size() >= spec.target_triples) break;
      const auto& pool = pools[s.combo];
      if (round >= pool.size()) continue;
      add(s.term, served_by, pool[round]);
    }
  }
  result.filler_triples = g.size() - result.structural_triples;

  if (static_cast<double>(g.size()) < target * (1.0 - kGenTolerance)) {
    throw Error(ErrorCategory::invalid_argument,
                "infeasible generator spec: only " + std::to_string(g.size()) + " triples reachable for target " +
                    std::to_string(spec.target_triples));
  }
  return result;
}

inline nlohmann::json to_json(const IkgGenSpec& spec, const IkgGenResult& r) {
  return {{"seed", spec.seed},
          {"n_services", spec.n_services},
          {"n_resources", spec.n_resources},
          {"n_kpis", spec.n_kpis},
          {"target_triples", spec.target_triples},
          {"triples", r.graph.size()},
          {"structural_triples", r.structural_triples},
          {"filler_triples", r.filler_triples},
          {"tolerance", kGenTolerance},
          {"note",
           "target counts positive triples only; the reference setup's total may have included negatives, "
           "which are sampled at training time here"}};
}

}  // namespace ikg
