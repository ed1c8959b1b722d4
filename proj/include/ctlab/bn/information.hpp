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

#ifndef CTLAB_BN_INFORMATION_HPP_
#define CTLAB_BN_INFORMATION_HPP_

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/bn/inference.hpp"
#include "ctlab/bn/network.hpp"
#include "ctlab/error.hpp"

namespace ctlab::bn {

// Shannon entropy in bits; 0·log 0 is taken as 0.
inline double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

inline double entropy(const Distribution& d) { return entropy(d.probabilities); }

struct FeatureGain {
  std::string node;
  double gain_bits = 0.0;
};

// Sorted by descending gain, then ascending node id.
using FeatureRanking = std::vector<FeatureGain>;

// Expected reduction in the target's entropy from observing each candidate:
//   gain(F) = H(T|ev) - sum_f P(F=f|ev) H(T|ev, F=f).
// Each gain is computed from the exact joint posterior P(T, F | ev), which
// avoids conditioning on near-impossible candidate states.
inline FeatureRanking most_informative_features(
    const BayesianNetwork& net, const EvidenceSet& ev, std::string_view target,
    const std::set<std::string>& candidates) {
  net.RequireValid();
  if (candidates.empty()) {
    throw Error(ErrorCode::kEmptyCandidateSet, "no candidate features");
  }
  const std::size_t t = ResolveTarget(net, target);
  const ResolvedEvidence evidence = ResolveEvidence(net, ev);
  for (const auto& [var, state] : evidence) {
    if (var == t) {
      throw Error(ErrorCode::kInvalidTarget,
                  "target '" + net.node(t).id + "' is observed");
    }
  }

  const std::vector<double> target_marginal =
      JointPosterior(net, evidence, {t}).values();
  const double h_target = entropy(target_marginal);

  FeatureRanking ranking;
  for (const std::string& id : candidates) {
    auto f = net.index_of(id);
    if (!f) throw Error(ErrorCode::kInvalidCandidate, "unknown node '" + id + "'");
    if (*f == t) {
      throw Error(ErrorCode::kInvalidCandidate, "candidate '" + id + "' is the target");
    }
    if (ev.count(id)) {
      throw Error(ErrorCode::kInvalidCandidate, "candidate '" + id + "' is observed");
    }

    const Factor joint = JointPosterior(net, evidence, {t, *f});
    // Factor variables are sorted by index; lay the table out as [f][t].
    const std::size_t ct = net.cardinality(t);
    const std::size_t cf = net.cardinality(*f);
    const bool target_first = t < *f;
    double conditional = 0.0;
    std::vector<double> column(ct);
    for (std::size_t fs = 0; fs < cf; ++fs) {
      double pf = 0.0;
      for (std::size_t ts = 0; ts < ct; ++ts) {
        column[ts] = target_first ? joint.values()[ts * cf + fs]
                                  : joint.values()[fs * ct + ts];
        pf += column[ts];
      }
      if (pf <= 0.0) continue;
      for (double& c : column) c /= pf;
      conditional += pf * entropy(column);
    }
    double gain = h_target - conditional;
    // Rounding residue on independent candidates would otherwise decide ties.
    if (!(gain > 1e-13)) gain = 0.0;
    ranking.push_back({id, gain});
  }

  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const FeatureGain& a, const FeatureGain& b) {
                     if (a.gain_bits != b.gain_bits) return a.gain_bits > b.gain_bits;
                     return a.node < b.node;
                   });
  return ranking;
}

}  // namespace ctlab::bn

#endif  // CTLAB_BN_INFORMATION_HPP_
