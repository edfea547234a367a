// ikgctl: generate, train, evaluate and translate against an intent knowledge graph.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ikg/ikg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ikg::RdfFormat format_for(const fs::path& p) {
  return p.extension() == ".nt" ? ikg::RdfFormat::ntriples : ikg::RdfFormat::turtle;
}

ikg::Graph load_graph(const fs::path& p) { return ikg::parse(ikg::read_file(p), format_for(p)); }

void save_graph(const ikg::Graph& g, const fs::path& p) { ikg::write_file(p, ikg::serialize(g, format_for(p))); }

ikg::TrainConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  json j;
  try {
    j = json::parse(ikg::read_file(path));
  } catch (const json::parse_error& e) {
    throw ikg::Error(ikg::ErrorCategory::parse, path + ": " + e.what());
  }
  return ikg::train_config_from_json(j);
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    ikg::write_file(out, j.dump(2) + "\n");
  }
}

const ikg::ThresholdTable& thresholds_of(const ikg::Kg2eModel& m) {
  if (!m.thresholds) {
    throw ikg::Error(ikg::ErrorCategory::invalid_argument, "model has no thresholds; train with a validation split");
  }
  return *m.thresholds;
}

// Parses one "head relation tail ." statement, `???` allowed, against the
// given prefixes.
ikg::Triple parse_statement(std::string text, const ikg::PrefixMap& prefixes) {
  std::string doc;
  for (const auto& [p, base] : prefixes) doc += "@prefix " + p + ": <" + base + "> .\n";
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  if (text.empty() || text.back() != '.') text += " .";
  auto g = ikg::parse(doc + text + "\n", ikg::RdfFormat::turtle);
  if (g.size() != 1) throw ikg::Error(ikg::ErrorCategory::invalid_argument, "expected exactly one triple");
  return g.triples().front();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian knowledge-graph embeddings for intent translation"};
  app.require_subcommand(1);

  // gen-ikg
  auto* gen = app.add_subcommand("gen-ikg", "Generate the synthetic intent knowledge graph");
  ikg::IkgGenSpec spec;
  std::string gen_out, gen_report;
  gen->add_option("--seed", spec.seed);
  gen->add_option("--services", spec.n_services);
  gen->add_option("--resources", spec.n_resources);
  gen->add_option("--kpis", spec.n_kpis);
  gen->add_option("--target", spec.target_triples);
  gen->add_option("-o,--out", gen_out, "Output graph (.ttl or .nt)")->required();
  gen->add_option("--report", gen_report, "Generator report (JSON)");

  // split
  auto* split = app.add_subcommand("split", "Split a graph into train/valid/test files");
  std::string split_in, split_dir, split_cfg;
  split->add_option("-g,--graph", split_in)->required();
  split->add_option("-c,--config", split_cfg, "Training config (seed and fractions)");
  split->add_option("-d,--out-dir", split_dir)->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a model and calibrate its thresholds");
  std::string tr_graph, tr_cfg, tr_model, tr_report, tr_score = "kl";
  ikg::ModelOptions opts;
  tr->add_option("-g,--graph", tr_graph)->required();
  tr->add_option("-c,--config", tr_cfg);
  tr->add_option("-m,--model", tr_model, "Output model (JSON)")->required();
  tr->add_option("--report", tr_report, "Training report (JSON)");
  tr->add_option("--dim", opts.dim);
  tr->add_option("--c-min", opts.c_min);
  tr->add_option("--c-max", opts.c_max);
  tr->add_option("--score", tr_score, "kl or el");
  bool tr_quiet = false;
  tr->add_flag("-q,--quiet", tr_quiet);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Rank and classification metrics on the test split");
  std::string ev_model, ev_graph, ev_cfg, ev_out;
  ev->add_option("-m,--model", ev_model)->required();
  ev->add_option("-g,--graph", ev_graph, "Full graph the model was trained on")->required();
  ev->add_option("-c,--config", ev_cfg, "Config used for training (split seed)");
  ev->add_option("-o,--out", ev_out);

  // predict
  auto* pr = app.add_subcommand("predict", "Top-k completions of a triple with one ???");
  std::string pr_model, pr_graph, pr_triple, pr_role;
  std::size_t pr_k = 10;
  pr->add_option("-m,--model", pr_model)->required();
  pr->add_option("-g,--graph", pr_graph, "IKG (literal candidates)")->required();
  pr->add_option("-t,--triple", pr_triple, "e.g. icm:PropertyExpectation icm:hasTarget ???")->required();
  pr->add_option("--role", pr_role, "service, resource, kpi or value");
  pr->add_option("-k", pr_k);

  // verify
  auto* ve = app.add_subcommand("verify", "Classify every triple of a complete intent");
  std::string ve_model, ve_intent, ve_blueprint;
  ve->add_option("-m,--model", ve_model)->required();
  ve->add_option("-i,--intent", ve_intent)->required();
  ve->add_option("--blueprint", ve_blueprint, "Skip the blueprint's fixed triples and classify only the filled slots");

  // translate
  auto* tl = app.add_subcommand("translate", "Turn an utterance into a verified network intent");
  std::string tl_model, tl_graph, tl_corpus, tl_blueprint, tl_text, tl_out, tl_report;
  std::size_t tl_k = 10;
  tl->add_option("-m,--model", tl_model)->required();
  tl->add_option("-g,--graph", tl_graph)->required();
  tl->add_option("--corpus", tl_corpus)->required();
  tl->add_option("--blueprint", tl_blueprint)->required();
  tl->add_option("text", tl_text)->required();
  tl->add_option("-k", tl_k);
  tl->add_option("-o,--out", tl_out, "Write the intent graph here");
  tl->add_option("--report", tl_report, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ikg::exit_code(ikg::ErrorCategory::invalid_argument);
  }

  try {
    if (*gen) {
      auto result = ikg::generate_ikg(spec);
      save_graph(result.graph, gen_out);
      if (!gen_report.empty()) emit(ikg::to_json(spec, result), gen_report);
      std::cerr << "wrote " << result.graph.size() << " triples to " << gen_out << "\n";
    } else if (*split) {
      const auto cfg = load_config(split_cfg);
      const auto g = load_graph(split_in);
      const auto s = ikg::split_dataset(g, cfg.split, cfg.seed);
      fs::create_directories(split_dir);
      save_graph(s.train, fs::path(split_dir) / "train.nt");
      save_graph(s.valid, fs::path(split_dir) / "valid.nt");
      save_graph(s.test, fs::path(split_dir) / "test.nt");
      std::cout << json{{"train", s.train.size()}, {"valid", s.valid.size()}, {"test", s.test.size()}}.dump() << "\n";
    } else if (*tr) {
      const auto cfg = load_config(tr_cfg);
      opts.kind = ikg::score_kind_from_string(tr_score);
      const auto g = load_graph(tr_graph);
      auto progress = [&](std::size_t epoch, double loss) {
        if (!tr_quiet) std::cerr << "epoch " << epoch << " loss " << loss << "\n";
      };
      auto r = ikg::fit(g, cfg, opts, progress);
      ikg::save_model(r.model, tr_model);
      json report = ikg::to_json(r.report);
      report["config"] = ikg::to_json(cfg);
      report["split"] = {{"train", r.split.train.size()}, {"valid", r.split.valid.size()}, {"test", r.split.test.size()}};
      if (!tr_report.empty()) emit(report, tr_report);
      std::cerr << "convergence epoch: "
                << (r.report.convergence_epoch ? std::to_string(*r.report.convergence_epoch) : "none") << "\n";
    } else if (*ev) {
      const auto cfg = load_config(ev_cfg);
      const auto model = ikg::load_model(ev_model);
      const auto g = load_graph(ev_graph);
      const auto s = ikg::split_dataset(g, cfg.split, cfg.seed);
      if (!(s.vocab == model.vocab)) {
        throw ikg::Error(ikg::ErrorCategory::vocab, "graph vocabulary does not match the model");
      }
      json out;
      out["ranks_raw"] = ikg::to_json(ikg::evaluate_ranks(model, s.test, s.all, false));
      out["ranks_filtered"] = ikg::to_json(ikg::evaluate_ranks(model, s.test, s.all, true));
      const auto pairs = ikg::test_pairs(model, s, cfg.seed);
      out["classification"] =
          ikg::to_json(ikg::evaluate_classification(model, pairs.positives, pairs.negatives, thresholds_of(model)));
      emit(out, ev_out);
    } else if (*pr) {
      const auto model = ikg::load_model(pr_model);
      const auto g = load_graph(pr_graph);
      auto prefixes = ikg::ns::default_prefixes();
      for (const auto& [p, base] : g.prefixes()) prefixes.emplace(p, base);
      const auto t = parse_statement(pr_triple, prefixes);
      ikg::Role role = ikg::Role::service;
      if (!pr_role.empty()) {
        auto r = ikg::role_from_string(pr_role);
        if (!r) throw ikg::Error(ikg::ErrorCategory::invalid_argument, "unknown role '" + pr_role + "'");
        role = *r;
      } else {
        const auto schema = ikg::RoleSchema::defaults();
        auto it = schema.relations.find(t.relation.value);
        if (it != schema.relations.end()) {
          auto side = t.tail.is_placeholder() ? it->second.tail : it->second.head;
          if (side) role = *side;
        }
      }
      const ikg::CandidatePool pool(model.vocab, g);
      json out = json::array();
      for (const auto& p : ikg::predict_candidates(model, t, role, pr_k, pool)) {
        out.push_back({{"rank", p.rank}, {"candidate", ikg::format_term(p.candidate, prefixes)}, {"score", p.score}});
      }
      std::cout << out.dump(2) << "\n";
    } else if (*ve) {
      const auto model = ikg::load_model(ve_model);
      const auto& th = thresholds_of(model);
      const auto intent = load_graph(ve_intent);
      if (!intent.is_complete()) {
        throw ikg::Error(ikg::ErrorCategory::invalid_argument, "intent still contains placeholders");
      }
      const auto fixed = ve_blueprint.empty() ? ikg::Graph{} : load_graph(ve_blueprint);
      json rows = json::array();
      bool all = true;
      for (const auto& t : intent.triples()) {
        if (fixed.contains(t)) continue;
        const auto it = ikg::to_indexed(model.vocab, t);
        const bool ok = ikg::classify(model, it, th);
        all = all && ok;
        rows.push_back({{"triple", ikg::format_triple(t, intent.prefixes())},
                        {"score", ikg::score(model, it)},
                        {"threshold", ikg::detail::encode_real(th.threshold_for(it.relation))},
                        {"valid", ok}});
      }
      std::cout << json{{"verified", all}, {"triples", rows}}.dump(2) << "\n";
      if (!all) throw ikg::Error(ikg::ErrorCategory::verification_failed, "one or more triples classified invalid");
    } else if (*tl) {
      const auto model = ikg::load_model(tl_model);
      const auto g = load_graph(tl_graph);
      auto prefixes = g.prefixes();
      const auto blueprint = load_graph(tl_blueprint);
      for (const auto& [p, base] : blueprint.prefixes()) prefixes.emplace(p, base);
      const auto corpus = ikg::parse_corpus(ikg::read_file(tl_corpus), prefixes, &model.vocab);
      ikg::TranslateInputs in{model, g, corpus, blueprint, tl_k, thresholds_of(model)};
      const auto result = ikg::translate(tl_text, in);
      emit(ikg::to_json(result.intent, result.keywords), tl_report);
      if (!tl_out.empty()) save_graph(ikg::to_graph(result.intent), tl_out);
      if (!result.intent.verified) {
        throw ikg::Error(ikg::ErrorCategory::verification_failed, "completed intent did not verify");
      }
    }
  } catch (const ikg::Error& e) {
    std::cerr << "error: " << ikg::to_string(e.category()) << ": " << e.what() << "\n";
    return ikg::exit_code(e.category());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid-argument: " << e.what() << "\n";
    return ikg::exit_code(ikg::ErrorCategory::invalid_argument);
  } catch (const std::exception& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return ikg::exit_code(ikg::ErrorCategory::io);
  }
  return 0;
}
