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

// Explicit contact graphs for agent-mode runs: individuals, timestamped
// contact events with a distance, and infection edges.

#ifndef CTLAB_EPI_CONTACT_GRAPH_HPP_
#define CTLAB_EPI_CONTACT_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "ctlab/epi/cohort.hpp"
#include "ctlab/error.hpp"

namespace ctlab::epi {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr std::int64_t kNoTick = std::numeric_limits<std::int64_t>::min();

// Contacts at or below this distance can transmit and are the ones a
// tracing app records as close.
inline constexpr double kCloseRangeMeters = 2.0;

struct Individual {
  bool has_app = false;
  // Days from exposure to symptom onset.
  double onset_day = 0.0;
  bool asymptomatic = false;
  bool long_shedder = false;
};

struct ContactEvent {
  NodeId a = 0;
  NodeId b = 0;
  std::uint32_t tick = 0;
  float proximity_m = 0.0f;

  bool close() const { return proximity_m <= kCloseRangeMeters; }
  NodeId other(NodeId v) const { return v == a ? b : a; }
};

struct InfectionEdge {
  NodeId infector = kNoNode;  // kNoNode for seeded cases.
  NodeId infectee = 0;
  std::int64_t tick = 0;
};

class ContactGraph {
 public:
  ContactGraph() = default;
  // `duration_ticks` is the length of the observed period; 0 means "up to
  // the last event".
  ContactGraph(std::vector<Individual> people, std::vector<ContactEvent> events,
               double step_days = 0.5, std::uint32_t duration_ticks = 0)
      : people_(std::move(people)), events_(std::move(events)), step_days_(step_days) {
    if (!(step_days_ > 0.0)) throw Error(ErrorCode::kInvalidParams, "step_days must be > 0");
    for (const auto& e : events_) {
      if (e.a >= people_.size() || e.b >= people_.size() || e.a == e.b) {
        throw Error(ErrorCode::kInvalidParams, "contact event with a bad endpoint");
      }
      if (!(e.proximity_m >= 0.0f)) {
        throw Error(ErrorCode::kInvalidParams, "contact distance must be >= 0");
      }
    }
    std::stable_sort(events_.begin(), events_.end(), [](const ContactEvent& x, const ContactEvent& y) {
      return std::tie(x.tick, x.a, x.b) < std::tie(y.tick, y.a, y.b);
    });
    duration_ticks_ = events_.empty() ? duration_ticks
                                      : std::max(duration_ticks, events_.back().tick + 1);
    BuildAdjacency();
    exposure_.assign(people_.size(), kNoTick);
    infector_.assign(people_.size(), kNoNode);
  }

  std::size_t size() const { return people_.size(); }
  double step_days() const { return step_days_; }
  const std::vector<Individual>& people() const { return people_; }
  const Individual& person(NodeId v) const { return people_[v]; }
  const std::vector<ContactEvent>& events() const { return events_; }
  double time_days(const ContactEvent& e) const { return e.tick * step_days_; }
  std::uint32_t duration_ticks() const { return duration_ticks_; }

  // Close events touching v, ordered by (tick, a, b).
  std::span<const std::uint32_t> close_events(NodeId v) const {
    return {close_.data() + offsets_[v], close_.data() + offsets_[v + 1]};
  }

  const std::vector<InfectionEdge>& infections() const { return infections_; }

  // Records an infection; infection edges must form a forest, so each node is
  // infected at most once and never before its infector.
  void AddInfection(const InfectionEdge& edge) {
    if (edge.infectee >= size() || (edge.infector != kNoNode && edge.infector >= size())) {
      throw Error(ErrorCode::kInvalidParams, "infection edge with a bad endpoint");
    }
    if (exposure_[edge.infectee] != kNoTick) {
      throw Error(ErrorCode::kInvalidParams, "node infected twice");
    }
    if (edge.infector != kNoNode &&
        (exposure_[edge.infector] == kNoTick || exposure_[edge.infector] > edge.tick)) {
      throw Error(ErrorCode::kInvalidParams, "infectee exposed before its infector");
    }
    exposure_[edge.infectee] = edge.tick;
    infector_[edge.infectee] = edge.infector;
    infections_.push_back(edge);
  }

  void ClearInfections() {
    infections_.clear();
    std::fill(exposure_.begin(), exposure_.end(), kNoTick);
    std::fill(infector_.begin(), infector_.end(), kNoNode);
  }

  // kNoTick when v is not infected.
  std::int64_t exposure_tick(NodeId v) const { return exposure_[v]; }
  NodeId infector(NodeId v) const { return infector_[v]; }

 private:
  void BuildAdjacency() {
    offsets_.assign(people_.size() + 1, 0);
    for (const auto& e : events_) {
      if (!e.close()) continue;
      ++offsets_[e.a + 1];
      ++offsets_[e.b + 1];
    }
    for (std::size_t v = 0; v < people_.size(); ++v) offsets_[v + 1] += offsets_[v];
    close_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (!events_[i].close()) continue;
      close_[cursor[events_[i].a]++] = static_cast<std::uint32_t>(i);
      close_[cursor[events_[i].b]++] = static_cast<std::uint32_t>(i);
    }
  }

  std::vector<Individual> people_;
  std::vector<ContactEvent> events_;
  double step_days_ = 0.5;
  std::uint32_t duration_ticks_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> close_;
  std::vector<InfectionEdge> infections_;
  std::vector<std::int64_t> exposure_;
  std::vector<NodeId> infector_;
};

struct GraphParams {
  std::size_t n = 10000;
  // Mean close (<= 2 m) contacts per person per window.
  double mean_contacts = 36.0;
  double window_days = 14.0;
  double duration_days = 28.0;
  double step_days = 0.5;
  double adoption = 0.0;
  // Share of recorded contacts that are close; the rest fall between 2 m and
  // far_range_m, inside radio range but too far to transmit.
  double close_fraction = 0.5;
  double far_range_m = 30.0;
  double asymptomatic_fraction = 0.0;
  double long_shedder_fraction = 0.0;
  double onset_min_days = 5.5;
  double onset_max_days = 11.5;

  void Validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::kInvalidParams, what); };
    if (n < 1 || n >= kNoNode) fail("population must be >= 1");
    if (!(mean_contacts >= 0.0) || !std::isfinite(mean_contacts)) fail("mean contacts must be >= 0");
    if (!(window_days > 0.0) || !(duration_days >= 0.0) || !(step_days > 0.0)) {
      fail("window, duration and step must be positive");
    }
    if (duration_days / step_days > 4e9) fail("duration too long for the step");
    if (!(adoption >= 0.0 && adoption <= 1.0)) fail("adoption must lie in [0, 1]");
    if (!(close_fraction > 0.0 && close_fraction <= 1.0)) fail("close_fraction must lie in (0, 1]");
    if (!(far_range_m > kCloseRangeMeters)) fail("far range must exceed 2 m");
    if (!(asymptomatic_fraction >= 0.0 && long_shedder_fraction >= 0.0 &&
          asymptomatic_fraction + long_shedder_fraction <= 1.0)) {
      fail("asymptomatic and long-shedder fractions must be >= 0 and sum to <= 1");
    }
    if (!(onset_min_days >= 0.0 && onset_min_days <= onset_max_days)) fail("bad onset window");
  }
};

// Contact events happen at step boundaries. In each step the number of
// events is Poisson with mean n * rate * step / (2 * close_fraction), where
// rate = mean_contacts / window_days, and the endpoints are a uniform random
// pair; each person therefore has `rate` close contacts per day on average.
inline ContactGraph generate_contact_graph(const GraphParams& params, std::uint64_t seed) {
  params.Validate();
  std::mt19937_64 rng(seed);
  std::vector<Individual> people(params.n);
  std::bernoulli_distribution app(params.adoption);
  std::uniform_real_distribution<double> kind(0.0, 1.0);
  std::uniform_real_distribution<double> onset(params.onset_min_days, params.onset_max_days);
  for (auto& p : people) {
    p.has_app = app(rng);
    const double u = kind(rng);
    p.asymptomatic = u < params.asymptomatic_fraction;
    p.long_shedder =
        !p.asymptomatic && u < params.asymptomatic_fraction + params.long_shedder_fraction;
    p.onset_day = onset(rng);
  }

  std::vector<ContactEvent> events;
  if (params.n >= 2 && params.mean_contacts > 0.0) {
    const auto steps = static_cast<std::uint32_t>(std::floor(params.duration_days / params.step_days));
    const double per_step = static_cast<double>(params.n) * params.mean_contacts /
                            params.window_days * params.step_days / (2.0 * params.close_fraction);
    std::poisson_distribution<std::uint64_t> count(per_step);
    std::uniform_int_distribution<NodeId> first(0, static_cast<NodeId>(params.n - 1));
    std::uniform_int_distribution<NodeId> second(0, static_cast<NodeId>(params.n - 2));
    std::bernoulli_distribution is_close(params.close_fraction);
    std::uniform_real_distribution<float> near(0.1f, static_cast<float>(kCloseRangeMeters));
    std::uniform_real_distribution<float> far(std::nextafter(static_cast<float>(kCloseRangeMeters), 3.0f),
                                              static_cast<float>(params.far_range_m));
    events.reserve(static_cast<std::size_t>(per_step * steps * 1.01) + 16);
    for (std::uint32_t t = 0; t < steps; ++t) {
      const std::uint64_t k = count(rng);
      for (std::uint64_t i = 0; i < k; ++i) {
        ContactEvent e;
        e.a = first(rng);
        e.b = second(rng);
        if (e.b >= e.a) ++e.b;
        e.tick = t;
        e.proximity_m = is_close(rng) ? near(rng) : far(rng);
        events.push_back(e);
      }
    }
  }
  const auto steps = static_cast<std::uint32_t>(std::floor(params.duration_days / params.step_days));
  return ContactGraph(std::move(people), std::move(events), params.step_days, steps);
}

// Mean number of close contacts per person per `window_days`.
inline double MeanCloseContacts(const ContactGraph& g, double window_days = 14.0) {
  if (g.size() == 0 || g.duration_ticks() == 0) return 0.0;
  std::size_t close = 0;
  for (const auto& e : g.events()) close += e.close() ? 1 : 0;
  const double days = g.duration_ticks() * g.step_days();
  return 2.0 * static_cast<double>(close) / static_cast<double>(g.size()) * window_days / days;
}

}  // namespace ctlab::epi

#endif  // CTLAB_EPI_CONTACT_GRAPH_HPP_
