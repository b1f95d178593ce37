#pragma once

#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "brwcrit/examples.hpp"
#include "brwcrit/kernel.hpp"

namespace brwcrit {

using json = nlohmann::ordered_json;

// Kernel file format (UTF-8 JSON):
//   finite:    { "kind": "finite", "row_bound": M,
//                "rows": [[x, [[y, k], ...]], ...] }
//   generated: { "kind": "generated", "name": N, "params": {...},
//                "row_bound": M }   -- rebuilt from the example registry
//   law:       { "kind": "law", "name": N, "params": {...} }

inline json kernel_to_json(const WeightedKernel& k) {
  json j;
  if (k.is_finite()) {
    j["kind"] = "finite";
    j["row_bound"] = k.row_bound();
    json rows = json::array();
    for (Site x = 0; x < k.finite_size(); ++x) {
      json edges = json::array();
      for (const Edge& e : k.row(x)) edges.push_back({e.to, e.weight});
      rows.push_back({x, edges});
    }
    j["rows"] = rows;
  } else {
    if (k.name().empty())
      throw std::invalid_argument(
          "cannot serialize an unregistered generated kernel");
    j["kind"] = "generated";
    j["name"] = k.name();
    j["params"] = k.params();
    j["row_bound"] = k.row_bound();
  }
  return j;
}

inline WeightedKernel kernel_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") {
    double bound = j.at("row_bound").get<double>();
    Site max_site = -1;
    for (const auto& row : j.at("rows")) {
      max_site = std::max(max_site, row.at(0).get<Site>());
      for (const auto& e : row.at(1))
        max_site = std::max(max_site, e.at(0).get<Site>());
    }
    std::vector<std::vector<Edge>> rows(static_cast<std::size_t>(max_site + 1));
    for (const auto& row : j.at("rows")) {
      Site x = row.at(0).get<Site>();
      for (const auto& e : row.at(1))
        rows[static_cast<std::size_t>(x)].push_back(
            {e.at(0).get<Site>(), e.at(1).get<double>()});
    }
    return WeightedKernel::finite(std::move(rows), bound);
  }
  if (kind == "generated") {
    examples::Params params;
    if (j.contains("params"))
      for (const auto& [key, val] : j.at("params").items())
        params[key] = val.is_string() ? val.get<std::string>() : val.dump();
    return examples::build_kernel(j.at("name").get<std::string>(), params);
  }
  throw std::invalid_argument("kernel file: unknown kind '" + kind + "'");
}

inline std::shared_ptr<OffspringLaw> law_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "law")
    throw std::invalid_argument("law file: kind must be 'law'");
  examples::Params params;
  if (j.contains("params"))
    for (const auto& [key, val] : j.at("params").items())
      params[key] = val.is_string() ? val.get<std::string>() : val.dump();
  return examples::build_law(j.at("name").get<std::string>(), params);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

inline WeightedKernel load_kernel_file(const std::string& path) {
  return kernel_from_json(load_json_file(path));
}

}  // namespace brwcrit
