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

// Wire format for assessments:
//
//   CaseInput   {"evidence": {"node": "state", ...},
//                "symptom_duration_days": 3, "improving": "yes|no|unknown",
//                "policy": {...}}            (policy optional)
//   RiskReport  {"posterior": {"none": .., "mild": .., "severe": ..},
//                "p_covid": .., "covid_alert": .., "hospitalization_alert": ..,
//                "next_questions": [{"node": .., "gain_bits": ..}],
//                "policy": {...}, "contradiction": false}

#ifndef CTLAB_COVID_MODEL_JSON_HPP_
#define CTLAB_COVID_MODEL_JSON_HPP_

#include <string>

#include "ctlab/covid/model.hpp"
#include "ctlab/error.hpp"
#include "json.hpp"

namespace ctlab::covid {

inline bn::EvidenceSet EvidenceFromJson(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "evidence must be an object");
  bn::EvidenceSet ev;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kParseError, "evidence value for '" + k + "' must be a string");
    }
    ev[k] = v.get<std::string>();
  }
  return ev;
}

inline AlertPolicy AlertPolicyFromJson(const nlohmann::json& j) {
  AlertPolicy p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "policy must be an object");
  try {
    p.alert_threshold = j.value("alert_threshold", p.alert_threshold);
    p.hosp_threshold = j.value("hosp_threshold", p.hosp_threshold);
    p.hosp_min_duration_days = j.value("hosp_min_duration_days", p.hosp_min_duration_days);
    p.hosp_requires_not_improving =
        j.value("hosp_requires_not_improving", p.hosp_requires_not_improving);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad policy: ") + e.what());
  }
  p.Validate();
  return p;
}

inline Improving ImprovingFromString(const std::string& s) {
  if (s == "yes") return Improving::kYes;
  if (s == "no") return Improving::kNo;
  if (s == "unknown" || s.empty()) return Improving::kUnknown;
  throw Error(ErrorCode::kParseError, "improving must be yes, no or unknown");
}

inline const char* ImprovingName(Improving i) {
  switch (i) {
    case Improving::kYes: return "yes";
    case Improving::kNo: return "no";
    case Improving::kUnknown: break;
  }
  return "unknown";
}

inline CaseInput CaseInputFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "case must be a JSON object");
  CaseInput c;
  c.evidence = EvidenceFromJson(j.value("evidence", nlohmann::json()));
  if (j.contains("symptom_duration_days")) {
    if (!j["symptom_duration_days"].is_number()) {
      throw Error(ErrorCode::kParseError, "symptom_duration_days must be a number");
    }
    c.symptom_duration_days = j["symptom_duration_days"].get<double>();
  }
  if (j.contains("improving") && !j["improving"].is_null()) {
    if (!j["improving"].is_string()) {
      throw Error(ErrorCode::kParseError, "improving must be yes, no or unknown");
    }
    c.improving = ImprovingFromString(j["improving"].get<std::string>());
  }
  return c;
}

inline nlohmann::ordered_json AlertPolicyToJson(const AlertPolicy& p) {
  nlohmann::ordered_json j;
  j["alert_threshold"] = p.alert_threshold;
  j["hosp_threshold"] = p.hosp_threshold;
  j["hosp_min_duration_days"] = p.hosp_min_duration_days;
  j["hosp_requires_not_improving"] = p.hosp_requires_not_improving;
  return j;
}

inline nlohmann::ordered_json RankingToJson(const bn::FeatureRanking& r) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& g : r) {
    nlohmann::ordered_json e;
    e["node"] = g.node;
    e["gain_bits"] = g.gain_bits;
    out.push_back(std::move(e));
  }
  return out;
}

inline nlohmann::ordered_json RiskReportToJson(const RiskReport& r) {
  nlohmann::ordered_json j;
  if (r.contradiction) {
    j["posterior"] = nullptr;
    j["p_covid"] = nullptr;
  } else {
    nlohmann::ordered_json post;
    for (std::size_t s = 0; s < r.posterior.states.size(); ++s) {
      post[r.posterior.states[s]] = r.posterior.probabilities[s];
    }
    j["posterior"] = std::move(post);
    j["p_covid"] = r.p_covid;
  }
  j["covid_alert"] = r.covid_alert;
  j["hospitalization_alert"] = r.hospitalization_alert;
  j["next_questions"] = RankingToJson(r.next_questions);
  j["policy"] = AlertPolicyToJson(r.policy);
  j["contradiction"] = r.contradiction;
  if (r.contradiction) j["contradiction_detail"] = r.contradiction_detail;
  return j;
}

}  // namespace ctlab::covid

#endif  // CTLAB_COVID_MODEL_JSON_HPP_
