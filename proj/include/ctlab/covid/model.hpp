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

// The COVID-19 diagnostic network: roster checks on load, the two structural
// assumptions (no contact means no infection; the test is perfect), and the
// alert logic built on top of posterior inference.

#ifndef CTLAB_COVID_MODEL_HPP_
#define CTLAB_COVID_MODEL_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctlab/bn/inference.hpp"
#include "ctlab/bn/information.hpp"
#include "ctlab/bn/network.hpp"
#include "ctlab/bn/network_json.hpp"
#include "ctlab/error.hpp"

#ifndef CTLAB_DEFAULT_MODEL_PATH
#define CTLAB_DEFAULT_MODEL_PATH "data/covid_model.json"
#endif

namespace ctlab::covid {

inline constexpr const char* kDefaultModelPath = CTLAB_DEFAULT_MODEL_PATH;

inline constexpr const char* kTarget = "covid_status";
inline constexpr const char* kRoleKey = "roster_role";
inline constexpr const char* kProvenanceKey = "provenance";

struct RosterEntry {
  const char* id;
  const char* role;
  // Required states in order; empty means "any discretization with at least
  // two bands".
  std::vector<std::string> states;
};

inline const std::vector<RosterEntry>& RequiredRoster() {
  static const std::vector<RosterEntry> roster = {
      {"covid_status", "target", {"none", "mild", "severe"}},
      {"recent_contact", "contact", {"no", "yes"}},
      {"test_result", "test", {"not_tested", "negative", "positive"}},
      {"fever", "symptom", {"absent", "present"}},
      {"cough", "symptom", {"absent", "present"}},
      {"fatigue", "symptom", {"absent", "present"}},
      {"dyspnoea", "symptom", {"absent", "present"}},
      {"myalgia", "symptom", {"absent", "present"}},
      {"headache", "symptom", {"absent", "present"}},
      {"body_temperature", "measurement", {}},
      {"oxygen_saturation", "measurement", {}},
      {"sex", "background", {"male", "female"}},
      {"age_group", "background", {"under65", "over65"}},
      {"obesity", "background", {"no", "yes"}},
      {"other_condition", "confounder", {"none", "copd", "flu"}},
  };
  return roster;
}

inline const std::set<std::string>& KnownProvenance() {
  static const std::set<std::string> values = {"huang2020", "estimated"};
  return values;
}

struct CovidModel {
  bn::BayesianNetwork network;
  bn::NodeAnnotations annotations;

  std::string role(const std::string& id) const {
    auto it = annotations.find(id);
    if (it == annotations.end()) return {};
    auto r = it->second.find(kRoleKey);
    return r == it->second.end() ? std::string() : r->second;
  }

  std::vector<std::string> nodes_with_role(const std::string& r) const {
    std::vector<std::string> out;
    for (const auto& n : network.nodes()) {
      if (role(n.id) == r) out.push_back(n.id);
    }
    return out;
  }
};

namespace detail {

inline std::string RowLabel(const bn::BayesianNetwork& net, std::size_t node,
                            std::size_t row) {
  const auto& parents = net.parent_indices(node);
  std::vector<std::size_t> digits(parents.size());
  for (std::size_t k = parents.size(); k-- > 0;) {
    digits[k] = row % net.cardinality(parents[k]);
    row /= net.cardinality(parents[k]);
  }
  std::string out = "(";
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (k) out += ", ";
    out += net.node(parents[k]).id + "=" + net.node(parents[k]).states[digits[k]];
  }
  return out + ")";
}

// Checks P(child = child_state | parent = parent_state) == expected. When the
// parent is a direct parent every matching CPT row is checked; otherwise the
// conditional is computed by inference.
inline void CheckConditional(const bn::BayesianNetwork& net, const std::string& name,
                             const std::string& child, const std::string& child_state,
                             const std::string& parent, const std::string& parent_state,
                             double expected) {
  const std::size_t c = *net.index_of(child);
  const std::size_t cs = *net.state_index(c, child_state);
  const std::size_t p = *net.index_of(parent);
  const std::size_t ps = *net.state_index(p, parent_state);
  const auto& parents = net.parent_indices(c);
  auto violated = [&](double got, const std::string& where) {
    throw Error(ErrorCode::kAssumptionViolated,
                name + ": " + child + " " + where + " has P(" + child_state + ") = " +
                    bn::detail::FormatNumber(got) + ", expected " +
                    bn::detail::FormatNumber(expected));
  };

  auto pos = std::find(parents.begin(), parents.end(), p);
  if (pos != parents.end()) {
    const std::size_t k = static_cast<std::size_t>(pos - parents.begin());
    std::size_t stride = 1;
    for (std::size_t j = k + 1; j < parents.size(); ++j) stride *= net.cardinality(parents[j]);
    const auto& cpt = net.node(c).cpt;
    for (std::size_t row = 0; row < cpt.size(); ++row) {
      if ((row / stride) % net.cardinality(p) != ps) continue;
      if (std::abs(cpt[row][cs] - expected) > bn::kProbabilityTolerance) {
        violated(cpt[row][cs], "row " + std::to_string(row) + " " + RowLabel(net, c, row));
      }
    }
    return;
  }
  double got = 0.0;
  try {
    got = bn::posterior_marginal(net, {{parent, parent_state}}, child).probabilities[cs];
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kImpossibleEvidence) throw;
    return;  // The conditioning event never happens; nothing to violate.
  }
  if (std::abs(got - expected) > bn::kProbabilityTolerance) {
    violated(got, "given " + parent + "=" + parent_state);
  }
}

}  // namespace detail

// Validates roster, provenance and the structural assumptions.
inline CovidModel MakeModel(bn::NetworkDocument doc) {
  CovidModel model{std::move(doc.network), std::move(doc.annotations)};
  const auto& net = model.network;
  net.RequireValid();

  for (const RosterEntry& entry : RequiredRoster()) {
    auto idx = net.index_of(entry.id);
    if (!idx) {
      throw Error(ErrorCode::kMissingRequiredNode,
                  std::string("model has no '") + entry.id + "' node");
    }
    const auto& states = net.node(*idx).states;
    if (entry.states.empty() ? states.size() < 2 : states != entry.states) {
      std::string want;
      for (const auto& s : entry.states) want += (want.empty() ? "" : ", ") + s;
      throw Error(ErrorCode::kMissingRequiredNode,
                  std::string("node '") + entry.id + "' must have states [" +
                      (want.empty() ? std::string("at least two bands") : want) + "]");
    }
  }
  for (const auto& n : net.nodes()) {
    auto it = model.annotations.find(n.id);
    const std::string prov =
        it != model.annotations.end() && it->second.count(kProvenanceKey)
            ? it->second.at(kProvenanceKey)
            : std::string();
    if (!KnownProvenance().count(prov)) {
      throw Error(ErrorCode::kMissingProvenance,
                  "node '" + n.id + "' needs provenance huang2020 or estimated");
    }
  }

  detail::CheckConditional(net, "no contact", kTarget, "none", "recent_contact", "no", 1.0);
  detail::CheckConditional(net, "perfect test", "test_result", "positive", kTarget, "none",
                           0.0);
  return model;
}

inline CovidModel load_model(const std::string& path = kDefaultModelPath) {
  return MakeModel(bn::LoadNetworkFile(path));
}

enum class Improving { kUnknown, kYes, kNo };

struct CaseInput {
  bn::EvidenceSet evidence;
  double symptom_duration_days = 0.0;
  Improving improving = Improving::kUnknown;
};

struct AlertPolicy {
  double alert_threshold = 0.5;
  double hosp_threshold = 0.5;
  double hosp_min_duration_days = 7.0;
  bool hosp_requires_not_improving = true;

  void Validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(alert_threshold) || !unit(hosp_threshold)) {
      throw Error(ErrorCode::kInvalidParams, "alert thresholds must lie in [0, 1]");
    }
    if (!(hosp_min_duration_days >= 0.0) || !std::isfinite(hosp_min_duration_days)) {
      throw Error(ErrorCode::kInvalidParams, "hosp_min_duration_days must be >= 0");
    }
  }
};

struct RiskReport {
  bn::Distribution posterior;
  double p_covid = 0.0;
  bool covid_alert = false;
  bool hospitalization_alert = false;
  bn::FeatureRanking next_questions;
  AlertPolicy policy;
  // Set when the evidence has probability zero under the model (for example a
  // positive test with covid_status observed as none). The posterior is then
  // empty and both alerts are off.
  bool contradiction = false;
  std::string contradiction_detail;
};

// Unobserved roster nodes other than the target.
inline std::set<std::string> QuestionCandidates(const CovidModel& model,
                                                const bn::EvidenceSet& evidence) {
  std::set<std::string> candidates;
  for (const auto& n : model.network.nodes()) {
    if (n.id == kTarget || evidence.count(n.id) || model.role(n.id).empty()) continue;
    candidates.insert(n.id);
  }
  return candidates;
}

// Full value-of-information ranking of the unanswered questions; empty when
// every question is answered or the target itself is observed.
inline bn::FeatureRanking rank_questions(const CovidModel& model, const bn::EvidenceSet& evidence) {
  bn::ResolveEvidence(model.network, evidence);
  const auto candidates = QuestionCandidates(model, evidence);
  if (candidates.empty() || evidence.count(kTarget)) return {};
  return bn::most_informative_features(model.network, evidence, kTarget, candidates);
}

inline RiskReport assess(const CovidModel& model, const CaseInput& input,
                         const AlertPolicy& policy = {}, std::size_t top_k = 3) {
  policy.Validate();
  if (!(input.symptom_duration_days >= 0.0) || !std::isfinite(input.symptom_duration_days)) {
    throw Error(ErrorCode::kInvalidParams, "symptom_duration_days must be >= 0");
  }
  bn::ResolveEvidence(model.network, input.evidence);

  RiskReport report;
  report.policy = policy;
  try {
    report.posterior = bn::posterior_marginal(model.network, input.evidence, kTarget);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kImpossibleEvidence) throw;
    report.contradiction = true;
    report.contradiction_detail = e.detail();
    report.posterior.node = kTarget;
    report.posterior.states = model.network.node(kTarget).states;
    return report;
  }
  const auto& p = report.posterior.probabilities;
  report.p_covid = std::clamp(p[1] + p[2], 0.0, 1.0);
  report.covid_alert = report.p_covid >= policy.alert_threshold;
  report.hospitalization_alert =
      p[2] >= policy.hosp_threshold &&
      input.symptom_duration_days >= policy.hosp_min_duration_days &&
      (!policy.hosp_requires_not_improving || input.improving == Improving::kNo);

  if (top_k > 0) {
    report.next_questions = rank_questions(model, input.evidence);
    if (report.next_questions.size() > top_k) report.next_questions.resize(top_k);
  }
  return report;
}

struct BackgroundShift {
  bn::Distribution prior;
  bn::Distribution posterior;
};

inline const std::vector<std::string>& BackgroundNodes() {
  static const std::vector<std::string> ids = {"sex", "age_group", "obesity"};
  return ids;
}

// Prior against posterior for the background nodes under `evidence`.
inline std::map<std::string, BackgroundShift> backward_inference_check(
    const CovidModel& model, const bn::EvidenceSet& evidence) {
  std::map<std::string, BackgroundShift> out;
  for (const std::string& id : BackgroundNodes()) {
    out[id] = {bn::posterior_marginal(model.network, {}, id),
               bn::posterior_marginal(model.network, evidence, id)};
  }
  return out;
}

// Every symptom present and a recent contact.
inline bn::EvidenceSet SymptomHeavyEvidence(const CovidModel& model) {
  bn::EvidenceSet ev{{"recent_contact", "yes"}};
  for (const auto& id : model.nodes_with_role("symptom")) ev[id] = "present";
  return ev;
}

}  // namespace ctlab::covid

#endif  // CTLAB_COVID_MODEL_HPP_
