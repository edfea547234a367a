#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include <json.hpp>

#include "ikg/error.hpp"
#include "ikg/io.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/rdf_io.hpp"

namespace ikg {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "ikg-kg2e-model";

namespace detail {

// JSON numbers cannot carry infinities; thresholds may legitimately be +-inf.
inline nlohmann::json encode_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double decode_real(const nlohmann::json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCategory::parse, "invalid real value '" + s + "' in model document");
  }
  return j.get<double>();
}

}  // namespace detail

// Doubles are written with nlohmann's shortest round-trip formatting, so
// load(save(m)) reproduces every parameter bit for bit.
inline nlohmann::json model_to_json(const Kg2eModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["dim"] = model.dim;
  j["score_kind"] = to_string(model.score_kind);
  j["c_min"] = model.c_min;
  j["c_max"] = model.c_max;

  auto& entities = j["entities"] = nlohmann::json::array();
  for (const auto& t : model.vocab.entities()) entities.push_back(format_term(t));
  auto& relations = j["relations"] = nlohmann::json::array();
  for (const auto& t : model.vocab.relations()) relations.push_back(format_term(t));

  auto params = [](const std::vector<GaussianParams>& list) {
    auto arr = nlohmann::json::array();
    for (const auto& p : list) arr.push_back({{"mean", p.mean}, {"cov", p.cov}});
    return arr;
  };
  j["entity_params"] = params(model.entity_params);
  j["relation_params"] = params(model.relation_params);

  if (model.thresholds) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [rel, value] : model.thresholds->per_relation) {
      per[format_term(model.vocab.relation(rel))] = detail::encode_real(value);
    }
    j["thresholds"] = {{"fallback", detail::encode_real(model.thresholds->fallback)},
                       {"per_relation", per}};
  } else {
    j["thresholds"] = nullptr;
  }
  return j;
}

inline Kg2eModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) {
      throw Error(ErrorCategory::parse, "not a model document");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCategory::parse, "unsupported model format version");
    }
    Kg2eModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.score_kind = score_kind_from_string(j.at("score_kind").get<std::string>());
    m.c_min = j.at("c_min").get<double>();
    m.c_max = j.at("c_max").get<double>();
    for (const auto& s : j.at("entities")) m.vocab.add_entity(parse_term(s.get<std::string>()));
    for (const auto& s : j.at("relations")) m.vocab.add_relation(parse_term(s.get<std::string>()));

    auto params = [&](const nlohmann::json& arr, std::vector<GaussianParams>& out) {
      for (const auto& p : arr) {
        GaussianParams g{p.at("mean").get<std::vector<double>>(), p.at("cov").get<std::vector<double>>()};
        if (g.mean.size() != m.dim || g.cov.size() != m.dim) {
          throw Error(ErrorCategory::parse, "parameter vector length does not match dim");
        }
        out.push_back(std::move(g));
      }
    };
    params(j.at("entity_params"), m.entity_params);
    params(j.at("relation_params"), m.relation_params);
    if (m.entity_params.size() != m.vocab.entity_count() ||
        m.relation_params.size() != m.vocab.relation_count()) {
      throw Error(ErrorCategory::parse, "parameter count does not match vocabulary");
    }

    const auto& th = j.at("thresholds");
    if (!th.is_null()) {
      ThresholdTable table;
      table.fallback = detail::decode_real(th.at("fallback"));
      for (const auto& [key, value] : th.at("per_relation").items()) {
        auto rel = m.vocab.relation_index(parse_term(key));
        if (!rel) throw Error(ErrorCategory::vocab, "threshold for unknown relation " + key);
        table.per_relation[*rel] = detail::decode_real(value);
      }
      m.thresholds = std::move(table);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, std::string("malformed model document: ") + e.what());
  }
}

inline void save_model(const Kg2eModel& model, const std::filesystem::path& path) {
  write_file(path, model_to_json(model).dump() + "\n");
}

inline Kg2eModel load_model(const std::filesystem::path& path) {
  auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace ikg
