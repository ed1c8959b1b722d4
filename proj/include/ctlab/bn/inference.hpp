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

// Exact inference by variable elimination.
//
// Only the ancestors of the query and evidence nodes are instantiated; the
// remaining (barren) nodes sum to one and cannot change the answer. The
// elimination order is greedy min-fill over the interaction graph of the
// reduced factors, ties broken by ascending node id, so identical inputs
// always multiply and sum in the same order.

#ifndef CTLAB_BN_INFERENCE_HPP_
#define CTLAB_BN_INFERENCE_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/bn/factor.hpp"
#include "ctlab/bn/network.hpp"
#include "ctlab/error.hpp"

namespace ctlab::bn {

using ResolvedEvidence = std::vector<std::pair<std::size_t, std::size_t>>;

// The CPT of node `i` as a factor over {i} ∪ parents(i).
inline Factor CptFactor(const BayesianNetwork& net, std::size_t i) {
  std::vector<std::size_t> vars = net.parent_indices(i);
  vars.push_back(i);
  std::sort(vars.begin(), vars.end());
  std::vector<std::size_t> cards;
  std::size_t size = 1;
  for (std::size_t v : vars) {
    cards.push_back(net.cardinality(v));
    size *= cards.back();
  }
  std::vector<double> values(size);
  std::vector<std::size_t> assignment(net.size(), 0);
  std::vector<std::size_t> digit(vars.size(), 0);
  const auto& cpt = net.node(i).cpt;
  for (std::size_t idx = 0; idx < size; ++idx) {
    for (std::size_t j = 0; j < vars.size(); ++j) assignment[vars[j]] = digit[j];
    values[idx] = cpt[net.RowIndex(i, assignment)][assignment[i]];
    for (std::size_t j = vars.size(); j-- > 0;) {
      if (++digit[j] < cards[j]) break;
      digit[j] = 0;
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

// Ancestral closure of `seeds` (seeds included), as a membership mask.
inline std::vector<bool> AncestralSet(const BayesianNetwork& net,
                                      const std::vector<std::size_t>& seeds) {
  std::vector<bool> in(net.size(), false);
  std::vector<std::size_t> work(seeds.begin(), seeds.end());
  while (!work.empty()) {
    std::size_t u = work.back();
    work.pop_back();
    if (in[u]) continue;
    in[u] = true;
    for (std::size_t p : net.parent_indices(u)) work.push_back(p);
  }
  return in;
}

// Greedy min-fill order over the variables in `scopes`, excluding `keep`.
inline std::vector<std::size_t> MinFillOrder(
    const BayesianNetwork& net, const std::vector<std::vector<std::size_t>>& scopes,
    const std::vector<std::size_t>& keep) {
  std::vector<std::set<std::size_t>> adj(net.size());
  std::set<std::size_t> remaining;
  for (const auto& scope : scopes) {
    for (std::size_t a : scope) {
      remaining.insert(a);
      for (std::size_t b : scope) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  for (std::size_t k : keep) remaining.erase(k);

  std::vector<std::size_t> order;
  while (!remaining.empty()) {
    std::size_t best = 0;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (std::size_t v : remaining) {
      std::size_t fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end(); ++a) {
        for (auto b = std::next(a); b != adj[v].end(); ++b) {
          if (!adj[*a].count(*b)) ++fill;
        }
      }
      if (fill < best_fill ||
          (fill == best_fill && net.id_rank(v) < net.id_rank(best))) {
        best = v;
        best_fill = fill;
      }
    }
    for (std::size_t a : adj[best]) {
      for (std::size_t b : adj[best]) {
        if (a != b) adj[a].insert(b);
      }
    }
    for (std::size_t a : adj[best]) adj[a].erase(best);
    adj[best].clear();
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

// Normalized joint posterior over `query` (none of which may be observed).
// With an empty query the result is a scalar factor; `p_evidence` receives
// P(evidence) either way.
inline Factor JointPosterior(const BayesianNetwork& net,
                             const ResolvedEvidence& evidence,
                             std::vector<std::size_t> query,
                             double* p_evidence = nullptr) {
  std::sort(query.begin(), query.end());
  query.erase(std::unique(query.begin(), query.end()), query.end());

  std::vector<std::size_t> seeds = query;
  for (const auto& [var, state] : evidence) seeds.push_back(var);
  const std::vector<bool> relevant = AncestralSet(net, seeds);

  std::vector<Factor> factors;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!relevant[i]) continue;
    Factor f = CptFactor(net, i);
    for (const auto& [var, state] : evidence) f = f.Reduce(var, state);
    factors.push_back(std::move(f));
  }

  std::vector<std::vector<std::size_t>> scopes;
  for (const auto& f : factors) scopes.push_back(f.vars());
  for (std::size_t var : MinFillOrder(net, scopes, query)) {
    Factor product;
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.contains(var)) {
        product = product * f;
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(product.SumOut(var));
    factors = std::move(rest);
  }

  Factor joint;
  for (const auto& f : factors) joint = joint * f;
  const double z = joint.total();
  if (p_evidence) *p_evidence = z;
  if (!(z > kImpossibleEvidenceTolerance)) {
    throw Error(ErrorCode::kImpossibleEvidence,
                "evidence has probability " + detail::FormatNumber(z));
  }
  for (double& v : joint.values()) v /= z;
  return joint;
}

inline Distribution posterior_marginal(const BayesianNetwork& net,
                                       const EvidenceSet& ev,
                                       std::string_view target) {
  net.RequireValid();
  const std::size_t t = ResolveTarget(net, target);
  const ResolvedEvidence evidence = ResolveEvidence(net, ev);

  Distribution d;
  d.node = net.node(t).id;
  d.states = net.node(t).states;
  for (const auto& [var, state] : evidence) {
    if (var == t) {
      JointPosterior(net, evidence, {});
      d.probabilities.assign(net.cardinality(t), 0.0);
      d.probabilities[state] = 1.0;
      return d;
    }
  }
  d.probabilities = JointPosterior(net, evidence, {t}).values();
  return d;
}

}  // namespace ctlab::bn

#endif  // CTLAB_BN_INFERENCE_HPP_
