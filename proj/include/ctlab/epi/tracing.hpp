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

// Contact tracing on a recorded contact graph.
//
// A case's traceable contacts are its close contacts from the start of its
// infectious period (exposure + latent) up to the as-of time; a case with no
// recorded exposure contributes every close contact up to the as-of time.
// Starting from the index cases, each strategy decides which traced contacts
// are themselves expanded:
//
//   FirstOrder     nobody; only the index cases' contacts are traced.
//   SingleStep     contacts that are infected and have shown symptoms by the
//                  as-of time.
//   Iterative      every infected contact (testing finds infection before
//                  symptoms).
//   Retrospective  as Iterative, and the infector of every expanded case is
//                  traced and expanded as well.

#ifndef CTLAB_EPI_TRACING_HPP_
#define CTLAB_EPI_TRACING_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "ctlab/epi/contact_graph.hpp"
#include "ctlab/error.hpp"

namespace ctlab::epi {

enum class TraceStrategy { kFirstOrder, kSingleStep, kIterative, kRetrospective };

inline const char* TraceStrategyName(TraceStrategy s) {
  switch (s) {
    case TraceStrategy::kFirstOrder: return "first_order";
    case TraceStrategy::kSingleStep: return "single_step";
    case TraceStrategy::kIterative: return "iterative";
    case TraceStrategy::kRetrospective: return "retrospective";
  }
  return "unknown";
}

inline TraceStrategy ParseTraceStrategy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (s == "first_order" || s == "firstorder") return TraceStrategy::kFirstOrder;
  if (s == "single_step" || s == "singlestep") return TraceStrategy::kSingleStep;
  if (s == "iterative") return TraceStrategy::kIterative;
  if (s == "retrospective") return TraceStrategy::kRetrospective;
  throw Error(ErrorCode::kInvalidParams, "unknown strategy '" + s + "'");
}

struct Notification {
  NodeId node = 0;
  // The case whose contact list (or infection record) led to `node`.
  NodeId via = 0;
  double time_days = 0.0;
  int depth = 1;
};

struct TraceResult {
  // Sorted ids; index cases are never included.
  std::vector<NodeId> traced;
  std::vector<Notification> order;

  bool contains(NodeId v) const { return std::binary_search(traced.begin(), traced.end(), v); }
};

inline TraceResult trace_contacts(const ContactGraph& g, TraceStrategy strategy,
                                  const std::vector<NodeId>& index_cases, double as_of_day,
                                  double latent_days = 5.0) {
  for (NodeId v : index_cases) {
    if (v >= g.size()) {
      throw Error(ErrorCode::kUnknownIndexCase, "node " + std::to_string(v) + " is not in the graph");
    }
  }
  const auto as_of = static_cast<std::int64_t>(std::floor(as_of_day / g.step_days() + 1e-9));
  const auto latent = static_cast<std::int64_t>(std::llround(latent_days / g.step_days()));

  auto infected = [&](NodeId v) {
    const auto e = g.exposure_tick(v);
    return e != kNoTick && e <= as_of;
  };
  auto symptomatic_by = [&](NodeId v) {
    const auto& p = g.person(v);
    if (p.asymptomatic || !infected(v)) return false;
    return static_cast<double>(g.exposure_tick(v)) * g.step_days() + p.onset_day <=
           as_of_day + 1e-9;
  };
  auto expands = [&](NodeId v) {
    switch (strategy) {
      case TraceStrategy::kFirstOrder: return false;
      case TraceStrategy::kSingleStep: return symptomatic_by(v);
      case TraceStrategy::kIterative:
      case TraceStrategy::kRetrospective: return infected(v);
    }
    return false;
  };

  std::set<NodeId> index(index_cases.begin(), index_cases.end());
  std::vector<char> seen(g.size(), 0);
  for (NodeId v : index) seen[v] = 1;
  TraceResult out;
  struct Item {
    NodeId node;
    int depth;
  };
  std::deque<Item> queue;
  for (NodeId v : index) queue.push_back({v, 0});

  auto notify = [&](NodeId v, NodeId via, std::int64_t tick, int depth) {
    if (seen[v]) return;
    seen[v] = 1;
    out.order.push_back({v, via, static_cast<double>(tick) * g.step_days(), depth});
    out.traced.push_back(v);
    queue.push_back({v, depth});
  };

  while (!queue.empty()) {
    const Item item = queue.front();
    queue.pop_front();
    const NodeId x = item.node;
    if (item.depth > 0 && !expands(x)) continue;

    std::int64_t from = std::numeric_limits<std::int64_t>::min();
    if (infected(x)) from = g.exposure_tick(x) + latent;
    struct Hit {
      std::int64_t tick;
      NodeId other;
    };
    std::vector<Hit> hits;
    for (std::uint32_t idx : g.close_events(x)) {
      const ContactEvent& e = g.events()[idx];
      if (e.tick < from) continue;
      if (static_cast<std::int64_t>(e.tick) > as_of) break;
      hits.push_back({e.tick, e.other(x)});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.tick != b.tick ? a.tick < b.tick : a.other < b.other;
    });
    for (const Hit& h : hits) notify(h.other, x, h.tick, item.depth + 1);

    if (strategy == TraceStrategy::kRetrospective && infected(x)) {
      const NodeId up = g.infector(x);
      if (up != kNoNode) notify(up, x, g.exposure_tick(x), item.depth + 1);
    }
  }
  std::sort(out.traced.begin(), out.traced.end());
  return out;
}

}  // namespace ctlab::epi

#endif  // CTLAB_EPI_TRACING_HPP_
