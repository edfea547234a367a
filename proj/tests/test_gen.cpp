#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "ikg/ikg.hpp"

using namespace ikg;

namespace {

void expect_category(const std::function<void()>& f, ErrorCategory c) {
  try {
    f();
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), c) << e.what();
  }
}

std::size_t count_relation(const Graph& g, const Term& r) {
  std::size_t n = 0;
  for (const auto& t : g.triples()) n += t.relation == r;
  return n;
}

}  // namespace

TEST(Generator, DefaultsHitTarget) {
  auto r = generate_ikg(IkgGenSpec{});
  EXPECT_GE(r.graph.size(), 1575u - 31u);
  EXPECT_LE(r.graph.size(), 1575u + 31u);
  EXPECT_EQ(r.graph.size(), r.structural_triples + r.filler_triples);
  EXPECT_TRUE(r.graph.contains(
      {ns::term(ns::service, "GBR"), Term::iri(ns::subclass()), ns::term(ns::service, "NonMcpttGBRService")}));
  EXPECT_TRUE(r.graph.is_complete());
}

TEST(Generator, Deterministic) {
  IkgGenSpec spec;
  auto a = serialize(generate_ikg(spec).graph, RdfFormat::turtle);
  auto b = serialize(generate_ikg(spec).graph, RdfFormat::turtle);
  EXPECT_EQ(a, b);
  spec.seed = 7;
  EXPECT_NE(serialize(generate_ikg(spec).graph, RdfFormat::turtle), a);
}

TEST(Generator, NoKpisNoValues) {
  IkgGenSpec spec;
  spec.n_kpis = 0;
  spec.target_triples = 1100;
  auto r = generate_ikg(spec);
  EXPECT_EQ(count_relation(r.graph, ns::term(ns::icm, "valueBy")), 0u);
  for (const auto& t : r.graph.triples()) EXPECT_FALSE(t.tail.is_literal());
}

TEST(Generator, KpiValuesAreLiterals) {
  auto r = generate_ikg(IkgGenSpec{});
  const Term value_by = ns::term(ns::icm, "valueBy");
  std::size_t values = 0;
  for (const auto& t : r.graph.triples()) {
    EXPECT_EQ(t.tail.is_literal(), t.relation == value_by);
    values += t.relation == value_by;
  }
  EXPECT_GT(values, 0u);
}

TEST(Generator, StructureIsPresent) {
  auto g = generate_ikg(IkgGenSpec{}).graph;
  const Term subclass = Term::iri(ns::subclass());
  auto I = [](const char* l) { return ns::term(ns::icm, l); };
  EXPECT_TRUE(g.contains({I("Intent"), I("hasExpectation"), I("PropertyExpectation")}));
  EXPECT_TRUE(g.contains({I("PropertyExpectation"), I("hasParameter"), I("PropertyParameter")}));
  EXPECT_TRUE(g.contains({ns::term(ns::service, "VideoService"), subclass, ns::term(ns::service, "GBRVideoService")}));
  EXPECT_GT(count_relation(g, I("targetResource")), 0u);
  EXPECT_GT(count_relation(g, I("hasParameter")), 1u);
  EXPECT_GT(count_relation(g, I("hasTarget")), 0u);
  EXPECT_TRUE(build_vocab(g).entity_index(ns::term(ns::nonmcptt, "ConvVideo")).has_value());
}

TEST(Generator, RoundTripsThroughBothFormats) {
  auto g = generate_ikg(IkgGenSpec{}).graph;
  EXPECT_EQ(parse(serialize(g, RdfFormat::turtle), RdfFormat::turtle), g);
  auto nt = parse(serialize(g, RdfFormat::ntriples), RdfFormat::ntriples);
  nt.set_prefixes(g.prefixes());
  EXPECT_EQ(nt, g);
}

TEST(Generator, SmallerTargets) {
  for (std::size_t target : {1000u, 1200u, 1400u}) {
    IkgGenSpec spec;
    spec.target_triples = target;
    auto r = generate_ikg(spec);
    EXPECT_LE(static_cast<double>(r.graph.size()), target * 1.02);
    EXPECT_GE(static_cast<double>(r.graph.size()), target * 0.98);
  }
}

TEST(Generator, InfeasibleSpecs) {
  IkgGenSpec tiny;
  tiny.target_triples = 50;
  expect_category([&] { generate_ikg(tiny); }, ErrorCategory::invalid_argument);
  IkgGenSpec huge;
  huge.n_services = 4;
  huge.n_resources = 4;
  huge.target_triples = 100000;
  expect_category([&] { generate_ikg(huge); }, ErrorCategory::invalid_argument);
  IkgGenSpec none;
  none.n_services = 0;
  expect_category([&] { generate_ikg(none); }, ErrorCategory::invalid_argument);
}
