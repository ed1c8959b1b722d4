// Copyright 2026 The ctlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Network definition files:
//
//   {"format": 1,
//    "nodes": [{"id": "...", "states": [...], "parents": [...],
//               "cpt": [[...], ...]}, ...]}
//
// `cpt` holds one probability vector per parent combination, row-major in
// declared parent order. Extra string-valued node fields are kept as
// annotations (the COVID model uses `roster_role` and `provenance`). Unknown
// top-level fields are rejected.

#ifndef CTLAB_BN_NETWORK_JSON_HPP_
#define CTLAB_BN_NETWORK_JSON_HPP_

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ctlab/bn/network.hpp"
#include "ctlab/error.hpp"
#include "json.hpp"

namespace ctlab::bn {

inline constexpr int kNetworkFormatVersion = 1;

using NodeAnnotations = std::map<std::string, std::map<std::string, std::string>>;

struct NetworkDocument {
  BayesianNetwork network;
  NodeAnnotations annotations;
};

inline NetworkDocument ParseNetworkJson(const nlohmann::json& doc) {
  auto fail = [](const std::string& what) -> Error {
    return Error(ErrorCode::kParseError, what);
  };
  if (!doc.is_object()) throw fail("network document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "format" && key != "nodes") {
      throw fail("unknown top-level field '" + key + "'");
    }
  }
  if (!doc.contains("format")) throw fail("missing 'format' field");
  if (!doc["format"].is_number_integer() ||
      doc["format"].get<int>() != kNetworkFormatVersion) {
    throw fail("unsupported format (expected 1)");
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw fail("'nodes' must be an array");
  }

  NetworkDocument out;
  std::vector<NodeSpec> nodes;
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object()) throw fail("node entries must be objects");
    NodeSpec n;
    try {
      n.id = jn.at("id").get<std::string>();
      n.states = jn.at("states").get<std::vector<std::string>>();
      n.parents = jn.value("parents", std::vector<std::string>{});
      n.cpt = jn.at("cpt").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed node: ") + e.what());
    }
    for (const auto& [key, value] : jn.items()) {
      if (key == "id" || key == "states" || key == "parents" || key == "cpt") continue;
      if (!value.is_string()) {
        throw fail("node '" + n.id + "' annotation '" + key + "' must be a string");
      }
      out.annotations[n.id][key] = value.get<std::string>();
    }
    nodes.push_back(std::move(n));
  }
  out.network = BayesianNetwork(std::move(nodes));
  return out;
}

inline NetworkDocument ParseNetworkJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return ParseNetworkJson(doc);
}

inline NetworkDocument LoadNetworkFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseNetworkJson(buf.str());
}

inline nlohmann::ordered_json NetworkToJson(const BayesianNetwork& net,
                                            const NodeAnnotations& annotations = {}) {
  nlohmann::ordered_json doc;
  doc["format"] = kNetworkFormatVersion;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const NodeSpec& n : net.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["states"] = n.states;
    jn["parents"] = n.parents;
    jn["cpt"] = n.cpt;
    if (auto it = annotations.find(n.id); it != annotations.end()) {
      for (const auto& [k, v] : it->second) jn[k] = v;
    }
    doc["nodes"].push_back(std::move(jn));
  }
  return doc;
}

}  // namespace ctlab::bn

#endif  // CTLAB_BN_NETWORK_JSON_HPP_
