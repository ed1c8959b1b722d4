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

#ifndef CTLAB_BN_ENUMERATION_HPP_
#define CTLAB_BN_ENUMERATION_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ctlab/bn/network.hpp"
#include "ctlab/error.hpp"

namespace ctlab::bn {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

// Reference posterior: walks every full assignment of the network, multiplies
// the CPT entries and keeps the assignments consistent with the evidence.
// Shares nothing with the elimination engine beyond the network type, which
// makes it usable as a test oracle.
inline Distribution joint_enumeration(const BayesianNetwork& net,
                                      const EvidenceSet& ev,
                                      std::string_view target,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  net.RequireValid();
  const std::size_t t = ResolveTarget(net, target);
  const auto evidence = ResolveEvidence(net, ev);

  const std::size_t n = net.size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    total *= net.cardinality(i);
    if (total > cap) {
      throw Error(ErrorCode::kStateSpaceTooLarge,
                  "joint state space exceeds " + std::to_string(cap) + " entries");
    }
  }

  std::vector<std::size_t> observed(n, SIZE_MAX);
  for (const auto& [var, state] : evidence) observed[var] = state;

  std::vector<double> mass(net.cardinality(t), 0.0);
  std::vector<std::size_t> assignment(n, 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    bool consistent = true;
    for (std::size_t i = 0; i < n && consistent; ++i) {
      consistent = observed[i] == SIZE_MAX || observed[i] == assignment[i];
    }
    if (consistent) {
      double p = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t row = 0;
        for (std::size_t parent : net.parent_indices(i)) {
          row = row * net.cardinality(parent) + assignment[parent];
        }
        p *= net.node(i).cpt[row][assignment[i]];
      }
      mass[assignment[t]] += p;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++assignment[i] < net.cardinality(i)) break;
      assignment[i] = 0;
    }
  }

  double z = 0.0;
  for (double m : mass) z += m;
  if (!(z > kImpossibleEvidenceTolerance)) {
    throw Error(ErrorCode::kImpossibleEvidence,
                "evidence has probability " + detail::FormatNumber(z));
  }
  Distribution d;
  d.node = net.node(t).id;
  d.states = net.node(t).states;
  for (double m : mass) d.probabilities.push_back(m / z);
  return d;
}

}  // namespace ctlab::bn

#endif  // CTLAB_BN_ENUMERATION_HPP_
