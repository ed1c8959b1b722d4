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

// Stochastic outbreaks on an explicit contact graph.
//
// Every close contact with a shedding individual infects. Natural history
// follows the cohort model (latent period, isolation day, universal symptom
// day plus report delay, long shedders, asymptomatic cases), taken per
// individual from the graph. A report alerts the reporter's close contacts
// from the start of its infectious period up to the report, subject to the
// link model; an alerted case isolates at once. What the alert does to the
// contact's own report depends on the strategy:
//
//   FirstOrder     nothing; it still reports on its own schedule.
//   SingleStep     tested once symptomatic: max(alert, onset) + delay.
//   Iterative      tested at once: alert + delay.
//   Retrospective  as Iterative, and the reporter's infector is alerted too.
//
// Each replicate picks a random index case and start time, and owns a
// generator seeded with seed + replicate.

#ifndef CTLAB_EPI_AGENT_SIM_HPP_
#define CTLAB_EPI_AGENT_SIM_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <thread>
#include <vector>

#include "ctlab/epi/cohort.hpp"
#include "ctlab/epi/contact_graph.hpp"
#include "ctlab/epi/tracing.hpp"
#include "ctlab/error.hpp"

namespace ctlab::epi {

struct AgentOptions {
  // 0 uses every hardware thread.
  unsigned threads = 0;
  // Otherwise every replicate starts from `index_case`.
  bool random_index = true;
  NodeId index_case = 0;
  // Otherwise every replicate starts at tick 0.
  bool random_start = true;
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  NodeId index_case = 0;
  std::uint32_t start_tick = 0;
  // cumulative[k]: the index case plus everyone exposed before step k.
  std::vector<std::uint32_t> cumulative;
  std::uint32_t infections = 0;  // At the horizon, index included.
  double serial_interval_sum_days = 0.0;
  std::uint32_t serial_interval_count = 0;
};

struct AgentSummary {
  std::size_t replicates = 0;
  double mean_infections = 0.0;
  double stddev_infections = 0.0;
  // Per step: mean and standard error of ReplicateResult::cumulative.
  std::vector<double> mean_cumulative;
  std::vector<double> sem_cumulative;
  // Mean exposure-to-exposure interval between infector and infectee, in
  // days; NaN when no secondary infection occurred.
  double mean_serial_interval_days = 0.0;
};

struct AgentRun {
  std::vector<ReplicateResult> replicates;
  AgentSummary summary;
};

namespace detail {

struct Schedule {
  std::int64_t latent, isolation, long_shed, symptomatic, delay, horizon;
  bool everyone_reports;
  LinkModel link;

  Schedule(const CohortParams& p, double graph_step) {
    p.Validate();
    if (std::abs(p.step_days - graph_step) > 1e-12) {
      throw Error(ErrorCode::kInvalidParams, "graph and parameter step sizes differ");
    }
    latent = p.Steps(p.latent_days, "latent_days");
    isolation = p.Steps(p.isolation_day, "isolation_day");
    long_shed = p.Steps(p.long_shed_days, "long_shed_days");
    symptomatic = p.Steps(p.universal_symptomatic_day, "universal_symptomatic_day");
    delay = p.Steps(p.report_delay_days, "report_delay_days");
    horizon = p.Steps(p.horizon_days, "horizon_days");
    everyone_reports = p.link_model == LinkModel::kContactNeedsApp;
    link = p.link_model;
  }

  bool CanReport(const Individual& x) const { return everyone_reports || x.has_app; }
  bool Linked(const Individual& from, const Individual& to) const {
    return to.has_app && (link == LinkModel::kContactNeedsApp || from.has_app);
  }
  std::int64_t Onset(const Individual& x, double step) const {
    return static_cast<std::int64_t>(std::ceil(x.onset_day / step - 1e-9));
  }
};

inline constexpr std::int64_t kUnset = std::numeric_limits<std::int64_t>::max() / 4;

// Scratch state reused across replicates; entries are valid only when their
// stamp matches the current epoch.
struct Scratch {
  std::vector<std::uint32_t> stamp;
  std::vector<std::int64_t> exposure, isolate, report, alert;
  std::vector<NodeId> infector;
  std::vector<std::uint32_t> cursor;
  std::uint32_t epoch = 0;

  explicit Scratch(std::size_t n)
      : stamp(n, 0), exposure(n), isolate(n), report(n), alert(n), infector(n), cursor(n) {}
  bool infected(NodeId v) const { return stamp[v] == epoch; }
};

inline void RunReplicate(const ContactGraph& g, const Schedule& s, TraceStrategy strategy,
                         const AgentOptions& opt, std::uint64_t seed, Scratch& st,
                         ReplicateResult& out) {
  std::mt19937_64 rng(seed);
  out.seed = seed;
  out.index_case = opt.random_index
                       ? std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(g.size() - 1))(rng)
                       : opt.index_case;
  const std::int64_t span = static_cast<std::int64_t>(g.duration_ticks()) - s.horizon;
  out.start_tick = opt.random_start && span > 0
                       ? std::uniform_int_distribution<std::uint32_t>(0, static_cast<std::uint32_t>(span))(rng)
                       : 0;
  if (++st.epoch == 0) {
    std::fill(st.stamp.begin(), st.stamp.end(), 0);
    st.epoch = 1;
  }
  const double step = g.step_days();
  const std::int64_t t0 = out.start_tick;
  const std::int64_t end = t0 + s.horizon;

  using Pending = std::pair<std::int64_t, NodeId>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> reports;
  std::vector<NodeId> active;
  std::vector<std::uint32_t> new_by_step(static_cast<std::size_t>(s.horizon) + 1, 0);

  auto infect = [&](NodeId v, NodeId from, std::int64_t t) {
    const Individual& x = g.person(v);
    st.stamp[v] = st.epoch;
    st.exposure[v] = t;
    st.infector[v] = from;
    st.alert[v] = kUnset;
    st.isolate[v] = t + (x.long_shedder ? s.long_shed : s.isolation);
    st.report[v] = kUnset;
    if (s.CanReport(x) && !x.asymptomatic) {
      st.report[v] = t + s.symptomatic + s.delay;
      reports.push({st.report[v], v});
    }
    // First close event at or after the start of shedding.
    auto ev = g.close_events(v);
    const std::int64_t shed = t + s.latent;
    st.cursor[v] = static_cast<std::uint32_t>(
        std::lower_bound(ev.begin(), ev.end(), shed,
                         [&](std::uint32_t idx, std::int64_t tick) {
                           return static_cast<std::int64_t>(g.events()[idx].tick) < tick;
                         }) -
        ev.begin());
    active.push_back(v);
    if (from != kNoNode) {
      ++new_by_step[static_cast<std::size_t>(t - t0) + 1];
      out.serial_interval_sum_days += static_cast<double>(t - st.exposure[from]) * step;
      ++out.serial_interval_count;
    }
  };

  auto alert = [&](NodeId y, std::int64_t t) {
    if (!st.infected(y) || st.alert[y] <= t) return;
    st.alert[y] = t;
    st.isolate[y] = std::min(st.isolate[y], t);
    const Individual& x = g.person(y);
    if (!s.CanReport(x)) return;
    std::int64_t r = kUnset;
    switch (strategy) {
      case TraceStrategy::kFirstOrder: break;
      case TraceStrategy::kSingleStep:
        if (!x.asymptomatic) r = std::max(t, st.exposure[y] + s.Onset(x, step)) + s.delay;
        break;
      case TraceStrategy::kIterative:
      case TraceStrategy::kRetrospective: r = t + s.delay; break;
    }
    if (r < st.report[y]) {
      st.report[y] = r;
      reports.push({r, y});
    }
  };

  infect(out.index_case, kNoNode, t0);

  for (std::int64_t t = t0; t < end; ++t) {
    while (!reports.empty() && reports.top().first <= t) {
      const auto [when, x] = reports.top();
      reports.pop();
      if (st.report[x] != when) continue;  // Superseded by an earlier report.
      const Individual& px = g.person(x);
      const std::int64_t from = st.exposure[x] + s.latent;
      for (std::uint32_t idx : g.close_events(x)) {
        const ContactEvent& e = g.events()[idx];
        if (static_cast<std::int64_t>(e.tick) < from) continue;
        if (static_cast<std::int64_t>(e.tick) > when) break;
        const NodeId y = e.other(x);
        if (s.Linked(px, g.person(y))) alert(y, when);
      }
      if (strategy == TraceStrategy::kRetrospective && st.infector[x] != kNoNode) {
        const NodeId up = st.infector[x];
        if (s.Linked(px, g.person(up))) alert(up, when);
      }
    }

    const std::size_t shedding = active.size();
    for (std::size_t i = 0; i < shedding; ++i) {
      const NodeId x = active[i];
      if (t < st.exposure[x] + s.latent || t >= st.isolate[x]) continue;
      auto ev = g.close_events(x);
      std::uint32_t& c = st.cursor[x];
      while (c < ev.size() && static_cast<std::int64_t>(g.events()[ev[c]].tick) < t) ++c;
      for (; c < ev.size() && static_cast<std::int64_t>(g.events()[ev[c]].tick) == t; ++c) {
        const NodeId y = g.events()[ev[c]].other(x);
        if (!st.infected(y)) infect(y, x, t);
      }
    }
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](NodeId v) { return st.isolate[v] <= t + 1; }),
                 active.end());
  }

  out.cumulative.assign(new_by_step.size(), 0);
  std::uint32_t running = 1;
  for (std::size_t k = 0; k < new_by_step.size(); ++k) {
    running += new_by_step[k];
    out.cumulative[k] = running;
  }
  out.infections = out.cumulative.back();
}

}  // namespace detail

inline AgentSummary Summarize(const std::vector<ReplicateResult>& reps) {
  AgentSummary s;
  s.replicates = reps.size();
  if (reps.empty()) return s;
  const std::size_t steps = reps.front().cumulative.size();
  s.mean_cumulative.assign(steps, 0.0);
  s.sem_cumulative.assign(steps, 0.0);
  std::vector<double> m2(steps, 0.0);
  double serial = 0.0;
  double serial_n = 0.0;
  double mean = 0.0, m2_final = 0.0;
  // Welford updates in replicate order, so the result does not depend on
  // which thread produced which replicate.
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const double n = static_cast<double>(r + 1);
    for (std::size_t k = 0; k < steps; ++k) {
      const double x = reps[r].cumulative[k];
      const double d = x - s.mean_cumulative[k];
      s.mean_cumulative[k] += d / n;
      m2[k] += d * (x - s.mean_cumulative[k]);
    }
    const double x = reps[r].infections;
    const double d = x - mean;
    mean += d / n;
    m2_final += d * (x - mean);
    serial += reps[r].serial_interval_sum_days;
    serial_n += reps[r].serial_interval_count;
  }
  const double n = static_cast<double>(reps.size());
  s.mean_infections = mean;
  s.stddev_infections = n > 1 ? std::sqrt(m2_final / (n - 1)) : 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    s.sem_cumulative[k] = n > 1 ? std::sqrt(m2[k] / (n - 1) / n) : 0.0;
  }
  s.mean_serial_interval_days =
      serial_n > 0 ? serial / serial_n : std::numeric_limits<double>::quiet_NaN();
  return s;
}

inline AgentRun run_agent_sim(const ContactGraph& graph, const CohortParams& params,
                              TraceStrategy strategy, std::uint64_t seed, std::size_t replicates,
                              const AgentOptions& options = {}) {
  if (replicates < 1) throw Error(ErrorCode::kInvalidParams, "replicates must be >= 1");
  if (graph.size() == 0) throw Error(ErrorCode::kInvalidParams, "empty graph");
  if (!options.random_index && options.index_case >= graph.size()) {
    throw Error(ErrorCode::kUnknownIndexCase, "index case is not in the graph");
  }
  const detail::Schedule schedule(params, graph.step_days());

  AgentRun run;
  run.replicates.resize(replicates);
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicates)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    detail::Scratch scratch(graph.size());
    for (std::size_t r; (r = next.fetch_add(1)) < replicates;) {
      detail::RunReplicate(graph, schedule, strategy, options, seed + r, scratch,
                           run.replicates[r]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  run.summary = Summarize(run.replicates);
  return run;
}

// Uncontrolled spread from `seeds` (all exposed at `start_tick`) up to
// `until_tick`, recorded as infection edges on the graph. Isolation happens
// only on the natural schedule; nobody is alerted.
inline void spread_infections(ContactGraph& g, const std::vector<NodeId>& seeds,
                              const CohortParams& params, std::int64_t start_tick,
                              std::int64_t until_tick) {
  const detail::Schedule s(params, g.step_days());
  g.ClearInfections();
  for (NodeId v : seeds) {
    if (v >= g.size()) throw Error(ErrorCode::kUnknownIndexCase, "seed is not in the graph");
    if (g.exposure_tick(v) == kNoTick) g.AddInfection({kNoNode, v, start_tick});
  }
  // Events are in time order, so one pass finds every transmission.
  for (const ContactEvent& e : g.events()) {
    const std::int64_t t = e.tick;
    if (t < start_tick) continue;
    if (t > until_tick) break;
    if (!e.close()) continue;
    auto shedding = [&](NodeId v) {
      const auto x = g.exposure_tick(v);
      if (x == kNoTick) return false;
      const auto stop = x + (g.person(v).long_shedder ? s.long_shed : s.isolation);
      return x + s.latent <= t && t < stop;
    };
    const bool a = shedding(e.a);
    const bool b = shedding(e.b);
    if (a && g.exposure_tick(e.b) == kNoTick) g.AddInfection({e.a, e.b, t});
    if (b && g.exposure_tick(e.a) == kNoTick) g.AddInfection({e.b, e.a, t});
  }
}

}  // namespace ctlab::epi

#endif  // CTLAB_EPI_AGENT_SIM_HPP_
