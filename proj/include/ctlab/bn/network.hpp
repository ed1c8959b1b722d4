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

#ifndef CTLAB_BN_NETWORK_HPP_
#define CTLAB_BN_NETWORK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctlab/error.hpp"

namespace ctlab::bn {

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kImpossibleEvidenceTolerance = 1e-12;

// One discrete variable and its conditional probability table. Rows of `cpt`
// are indexed row-major over the Cartesian product of the parents' states in
// declared parent order (the last parent varies fastest). A root node has a
// single row.
struct NodeSpec {
  std::string id;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> cpt;
};

enum class ViolationKind {
  kEmptyNetwork,
  kDuplicateId,
  kTooFewStates,
  kDuplicateState,
  kDanglingParent,
  kDuplicateParent,
  kCycle,
  kRowCount,
  kRowWidth,
  kEntryRange,
  kRowSum,
};

struct Violation {
  ViolationKind kind;
  std::string node;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
  }
};

// Observed node states, keyed by node id.
using EvidenceSet = std::map<std::string, std::string>;

// Posterior (or prior) probabilities over one node's states.
struct Distribution {
  std::string node;
  std::vector<std::string> states;
  std::vector<double> probabilities;

  double at(std::string_view state) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == state) return probabilities[i];
    }
    throw Error(ErrorCode::kInvalidEvidence,
                "node '" + node + "' has no state '" + std::string(state) + "'");
  }
};

namespace detail {

inline std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

// An immutable discrete Bayesian network. Construction never throws on
// modeling errors: the validation report is computed once and kept with the
// value, and inference entry points refuse invalid networks.
class BayesianNetwork {
 public:
  BayesianNetwork() : BayesianNetwork(std::vector<NodeSpec>{}) {}

  explicit BayesianNetwork(std::vector<NodeSpec> nodes)
      : nodes_(std::move(nodes)) {
    Compile();
  }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const NodeSpec& node(std::size_t i) const { return nodes_.at(i); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const NodeSpec& node(std::string_view id) const {
    auto i = index_of(id);
    if (!i) {
      throw Error(ErrorCode::kInvalidTarget,
                  "unknown node '" + std::string(id) + "'");
    }
    return nodes_[*i];
  }

  std::optional<std::size_t> state_index(std::size_t node,
                                         std::string_view label) const {
    const auto& states = nodes_[node].states;
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (states[s] == label) return s;
    }
    return std::nullopt;
  }

  std::size_t cardinality(std::size_t i) const { return nodes_[i].states.size(); }

  // Parent indices in declared order. Unresolvable parents are skipped, so
  // this is only meaningful for a valid network.
  const std::vector<std::size_t>& parent_indices(std::size_t i) const {
    return parents_[i];
  }

  // Position of each node when all ids are sorted ascending; used for
  // deterministic tie-breaking.
  std::size_t id_rank(std::size_t i) const { return id_rank_[i]; }

  const ValidationReport& validation() const { return report_; }
  bool valid() const { return report_.ok(); }

  void RequireValid() const {
    if (!valid()) {
      throw Error(ErrorCode::kInvalidNetwork,
                  report_.violations.front().message);
    }
  }

  // CPT row index for a full assignment of this node's parents.
  std::size_t RowIndex(std::size_t i,
                       const std::vector<std::size_t>& assignment) const {
    std::size_t row = 0;
    for (std::size_t p : parents_[i]) row = row * cardinality(p) + assignment[p];
    return row;
  }

 private:
  void Compile();
  void CheckCycles();

  std::vector<NodeSpec> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::size_t> id_rank_;
  ValidationReport report_;
};

inline void BayesianNetwork::Compile() {
  auto add = [this](ViolationKind kind, const std::string& node,
                    std::string message) {
    report_.violations.push_back({kind, node, std::move(message)});
  };

  if (nodes_.empty()) add(ViolationKind::kEmptyNetwork, "", "network has no nodes");

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      add(ViolationKind::kDuplicateId, nodes_[i].id,
          "duplicate node id '" + nodes_[i].id + "'");
    }
  }

  std::vector<std::size_t> order(nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return nodes_[a].id != nodes_[b].id ? nodes_[a].id < nodes_[b].id : a < b;
  });
  id_rank_.assign(nodes_.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) id_rank_[order[r]] = r;

  parents_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    if (n.states.size() < 2) {
      add(ViolationKind::kTooFewStates, n.id,
          "node '" + n.id + "' needs at least 2 states");
    }
    std::set<std::string> seen_states;
    for (const auto& s : n.states) {
      if (!seen_states.insert(s).second) {
        add(ViolationKind::kDuplicateState, n.id,
            "node '" + n.id + "' repeats state '" + s + "'");
      }
    }
    std::set<std::string> seen_parents;
    bool parents_resolve = true;
    for (const auto& p : n.parents) {
      if (!seen_parents.insert(p).second) {
        add(ViolationKind::kDuplicateParent, n.id,
            "node '" + n.id + "' lists parent '" + p + "' twice");
      }
      auto it = index_.find(p);
      if (it == index_.end()) {
        add(ViolationKind::kDanglingParent, n.id,
            "node '" + n.id + "' has unknown parent '" + p + "'");
        parents_resolve = false;
      } else {
        parents_[i].push_back(it->second);
      }
    }

    if (parents_resolve) {
      std::size_t rows = 1;
      for (std::size_t p : parents_[i]) rows *= nodes_[p].states.size();
      if (n.cpt.size() != rows) {
        add(ViolationKind::kRowCount, n.id,
            "node '" + n.id + "' has " + std::to_string(n.cpt.size()) +
                " cpt rows, expected " + std::to_string(rows));
      }
    }
    for (std::size_t r = 0; r < n.cpt.size(); ++r) {
      const auto& row = n.cpt[r];
      const std::string where = "node '" + n.id + "' row " + std::to_string(r);
      if (row.size() != n.states.size()) {
        add(ViolationKind::kRowWidth, n.id,
            where + ": " + std::to_string(row.size()) + " entries for " +
                std::to_string(n.states.size()) + " states");
        continue;
      }
      double sum = 0.0;
      bool in_range = true;
      for (double v : row) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) in_range = false;
        sum += v;
      }
      if (!in_range) {
        add(ViolationKind::kEntryRange, n.id, where + ": entry outside [0,1]");
      }
      if (!(std::fabs(sum - 1.0) <= kProbabilityTolerance)) {
        add(ViolationKind::kRowSum, n.id,
            where + ": row sum " + detail::FormatNumber(sum) + " ≠ 1");
      }
    }
  }
  CheckCycles();
}

inline void BayesianNetwork::CheckCycles() {
  const std::size_t n = nodes_.size();
  // 0 = unvisited, 1 = on stack, 2 = done.
  std::vector<int> color(n, 0);
  std::vector<std::size_t> stack;
  std::set<std::set<std::size_t>> reported;

  auto visit = [&](auto&& self, std::size_t u) -> void {
    color[u] = 1;
    stack.push_back(u);
    for (std::size_t p : parents_[u]) {
      if (color[p] == 0) {
        self(self, p);
      } else if (color[p] == 1) {
        auto from = std::find(stack.begin(), stack.end(), p);
        std::vector<std::size_t> cycle(from, stack.end());
        std::set<std::size_t> key(cycle.begin(), cycle.end());
        if (!reported.insert(key).second) continue;
        // Walk the cycle along arcs (parent -> child) starting from the
        // smallest id for a stable message.
        std::reverse(cycle.begin(), cycle.end());
        auto first = std::min_element(
            cycle.begin(), cycle.end(), [this](std::size_t a, std::size_t b) {
              return nodes_[a].id < nodes_[b].id;
            });
        std::rotate(cycle.begin(), first, cycle.end());
        std::string msg = "cycle: ";
        if (cycle.size() == 2) {
          msg += nodes_[cycle[0]].id + "↔" + nodes_[cycle[1]].id;
        } else {
          for (std::size_t k = 0; k < cycle.size(); ++k) {
            msg += nodes_[cycle[k]].id + "→";
          }
          msg += nodes_[cycle[0]].id;
        }
        report_.violations.push_back(
            {ViolationKind::kCycle, nodes_[cycle[0]].id, msg});
      }
    }
    stack.pop_back();
    color[u] = 2;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (color[i] == 0) visit(visit, i);
  }
}

inline const ValidationReport& validate_network(const BayesianNetwork& net) {
  return net.validation();
}

// Resolves evidence to (node index, state index) pairs, rejecting unknown ids
// and states.
inline std::vector<std::pair<std::size_t, std::size_t>> ResolveEvidence(
    const BayesianNetwork& net, const EvidenceSet& ev) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(ev.size());
  for (const auto& [id, state] : ev) {
    auto i = net.index_of(id);
    if (!i) throw Error(ErrorCode::kInvalidEvidence, "unknown node '" + id + "'");
    auto s = net.state_index(*i, state);
    if (!s) {
      throw Error(ErrorCode::kInvalidEvidence,
                  "node '" + id + "' has no state '" + state + "'");
    }
    out.emplace_back(*i, *s);
  }
  return out;
}

inline std::size_t ResolveTarget(const BayesianNetwork& net,
                                 std::string_view target) {
  auto i = net.index_of(target);
  if (!i) {
    throw Error(ErrorCode::kInvalidTarget,
                "unknown target '" + std::string(target) + "'");
  }
  return *i;
}

}  // namespace ctlab::bn

#endif  // CTLAB_BN_NETWORK_HPP_
