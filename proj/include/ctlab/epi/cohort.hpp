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

// Deterministic expected-value cohort model of app-based contact tracing.
//
// Time runs on a grid of `step_days`. One index case is exposed at t = 0.
// An individual exposed at e sheds over [e + latent, I) where
//
//   I = min(e + isolation_day, A)          (symptomatic, asymptomatic)
//   I = min(e + long_shed_days, A)         (long shedder)
//
// and A is the time an app alert reaches it (never, if no alert). While
// shedding it creates contacts_per_window / window_days exposures per day,
// each one at the start of a grid step. A reporting-capable individual
// reports at
//
//   R = min(e + universal_symptomatic_day + delay, A + delay)
//
// the first term only for symptomatic kinds; the second is the test taken on
// receiving an alert. A report alerts every infectee of the reporter for
// which the link model holds, so an infectee's A is its infector's R.
//
// Mass is tracked per class (exposure step, alert step, app, kind,
// generation); the index case is generation 0.

#ifndef CTLAB_EPI_COHORT_HPP_
#define CTLAB_EPI_COHORT_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ctlab/error.hpp"

namespace ctlab::epi {

enum class LinkModel { kBothNeedApp, kContactNeedsApp };

inline const char* LinkModelName(LinkModel m) {
  return m == LinkModel::kBothNeedApp ? "both_need_app" : "contact_needs_app";
}

inline LinkModel ParseLinkModel(const std::string& s) {
  if (s == "both_need_app") return LinkModel::kBothNeedApp;
  if (s == "contact_needs_app") return LinkModel::kContactNeedsApp;
  throw Error(ErrorCode::kInvalidParams,
              "link model must be both_need_app or contact_needs_app, got '" + s + "'");
}

struct CohortParams {
  double adoption = 0.0;
  double contacts_per_window = 36.0;
  double window_days = 14.0;
  double latent_days = 5.0;
  double symptomatic_window_start = 5.5;
  double symptomatic_window_end = 11.5;
  double universal_symptomatic_day = 12.0;
  double isolation_day = 13.0;
  double report_delay_days = 1.0;
  LinkModel link_model = LinkModel::kBothNeedApp;
  double horizon_days = 20.0;
  double step_days = 0.5;
  double asymptomatic_fraction = 0.0;
  double long_shedder_fraction = 0.0;
  double long_shed_days = 60.0;

  double beta() const { return contacts_per_window / window_days; }

  // Converts a day mark to grid steps; throws unless it lies on the grid.
  std::int64_t Steps(double days, const char* name) const {
    const double q = days / step_days;
    const double r = std::round(q);
    if (!std::isfinite(q) || std::abs(q - r) > 1e-9) {
      throw Error(ErrorCode::kInvalidParams,
                  std::string(name) + " is not a multiple of step_days");
    }
    return static_cast<std::int64_t>(r);
  }

  void Validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidParams, what); };
    if (!(adoption >= 0.0 && adoption <= 1.0)) fail("adoption must lie in [0, 1]");
    if (!(contacts_per_window > 0.0) || !(window_days > 0.0) || !std::isfinite(beta())) {
      fail("contact rate must be positive");
    }
    if (!(step_days > 0.0)) fail("step_days must be positive");
    if (!(latent_days >= 0.0 && latent_days < symptomatic_window_start &&
          symptomatic_window_start <= symptomatic_window_end &&
          symptomatic_window_end < isolation_day)) {
      fail("need latent < symptomatic window start <= end < isolation day");
    }
    if (!(universal_symptomatic_day >= symptomatic_window_end &&
          universal_symptomatic_day <= isolation_day)) {
      fail("universal symptomatic day must lie between the window end and isolation day");
    }
    if (!(report_delay_days >= 0.0)) fail("report delay must be >= 0");
    if (!(horizon_days >= isolation_day)) fail("horizon must be >= isolation day");
    if (!(asymptomatic_fraction >= 0.0 && long_shedder_fraction >= 0.0 &&
          asymptomatic_fraction + long_shedder_fraction <= 1.0)) {
      fail("asymptomatic and long-shedder fractions must be >= 0 and sum to <= 1");
    }
    if (!(long_shed_days >= isolation_day)) fail("long_shed_days must be >= isolation day");
    Steps(latent_days, "latent_days");
    Steps(symptomatic_window_start, "symptomatic window start");
    Steps(symptomatic_window_end, "symptomatic window end");
    Steps(universal_symptomatic_day, "universal_symptomatic_day");
    Steps(isolation_day, "isolation_day");
    Steps(report_delay_days, "report_delay_days");
    Steps(horizon_days, "horizon_days");
    Steps(long_shed_days, "long_shed_days");
  }
};

enum class Kind : int { kSymptomatic = 0, kAsymptomatic = 1, kLongShedder = 2 };

struct CohortRow {
  double time_days = 0.0;
  // Exposures made during the step ending at time_days.
  double new_exposures = 0.0;
  // Exposures strictly before time_days; the index case is not counted.
  double cumulative_exposures = 0.0;
  // Individuals shedding at time_days, index case included.
  double actively_shedding = 0.0;
  // Individuals whose isolation begins in the step ending at time_days.
  double newly_isolated = 0.0;
  // Exposures made by the index case, strictly before time_days.
  double first_generation_cumulative = 0.0;
};

struct GenerationSummary {
  int generation = 0;
  double exposures = 0.0;
  double app_users = 0.0;
  double app_fraction() const { return exposures > 0.0 ? app_users / exposures : 0.0; }
};

struct CohortTimeSeries {
  CohortParams params;
  std::vector<CohortRow> rows;
  // Exposures up to the horizon, by generation (generation 0 is the index).
  std::vector<GenerationSummary> generations;

  std::size_t RowAt(double day) const {
    const std::int64_t k = params.Steps(day, "day");
    if (k < 0 || static_cast<std::size_t>(k) >= rows.size()) {
      throw Error(ErrorCode::kInvalidParams, "day outside the simulated horizon");
    }
    return static_cast<std::size_t>(k);
  }

  double CumulativeAt(double day) const { return rows[RowAt(day)].cumulative_exposures; }
  double FirstGenerationAt(double day) const {
    return rows[RowAt(day)].first_generation_cumulative;
  }

  // Sums over rows with time in (day - width, day].
  double WindowedNewExposures(double day, double width = 2.0) const {
    return WindowSum(day, width, &CohortRow::new_exposures);
  }
  double WindowedIsolations(double day, double width = 2.0) const {
    return WindowSum(day, width, &CohortRow::newly_isolated);
  }

 private:
  double WindowSum(double day, double width, double CohortRow::*field) const {
    const std::size_t hi = RowAt(day);
    const std::int64_t w = params.Steps(width, "window width");
    double sum = 0.0;
    for (std::int64_t k = static_cast<std::int64_t>(hi); k > static_cast<std::int64_t>(hi) - w &&
                                                         k >= 0;
         --k) {
      sum += rows[static_cast<std::size_t>(k)].*field;
    }
    return sum;
  }
};

namespace detail {

inline constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max() / 4;

struct ClassKey {
  std::int64_t exposed;
  std::int64_t alerted;
  bool app;
  Kind kind;
  int generation;

  bool operator<(const ClassKey& o) const {
    return std::tie(exposed, alerted, app, kind, generation) <
           std::tie(o.exposed, o.alerted, o.app, o.kind, o.generation);
  }
};

}  // namespace detail

inline CohortTimeSeries run_cohort(const CohortParams& params) {
  params.Validate();
  using detail::ClassKey;
  using detail::kNever;

  const std::int64_t latent = params.Steps(params.latent_days, "latent_days");
  const std::int64_t symptomatic = params.Steps(params.universal_symptomatic_day, "");
  const std::int64_t isolation = params.Steps(params.isolation_day, "");
  const std::int64_t long_shed = params.Steps(params.long_shed_days, "");
  const std::int64_t delay = params.Steps(params.report_delay_days, "");
  const std::int64_t steps = params.Steps(params.horizon_days, "");
  const double per_step = params.beta() * params.step_days;
  const double p = params.adoption;
  const bool everyone_reports = params.link_model == LinkModel::kContactNeedsApp;

  const double kind_mass[3] = {
      1.0 - params.asymptomatic_fraction - params.long_shedder_fraction,
      params.asymptomatic_fraction, params.long_shedder_fraction};

  struct Timing {
    std::int64_t isolate;
    std::int64_t report;
  };
  auto timing = [&](const ClassKey& c) {
    Timing t;
    t.isolate = std::min(c.exposed + (c.kind == Kind::kLongShedder ? long_shed : isolation),
                         c.alerted);
    t.report = kNever;
    if (c.app || everyone_reports) {
      if (c.kind != Kind::kAsymptomatic) t.report = c.exposed + symptomatic + delay;
      if (c.alerted != kNever) t.report = std::min(t.report, c.alerted + delay);
    }
    return t;
  };

  std::map<ClassKey, double> classes;
  auto add_exposures = [&](std::int64_t when, std::int64_t infector_report, bool infector_app,
                           int generation, double mass) {
    for (int a = 0; a < 2; ++a) {
      const bool app = a == 1;
      const double pa = app ? p : 1.0 - p;
      if (pa == 0.0) continue;
      const bool linked =
          app && (params.link_model == LinkModel::kContactNeedsApp || infector_app);
      const std::int64_t alerted = linked ? infector_report : kNever;
      for (int k = 0; k < 3; ++k) {
        if (kind_mass[k] == 0.0) continue;
        classes[{when, alerted, app, static_cast<Kind>(k), generation}] +=
            mass * pa * kind_mass[k];
      }
    }
  };
  add_exposures(0, kNever, false, 0, 1.0);

  CohortTimeSeries out;
  out.params = params;
  out.rows.resize(static_cast<std::size_t>(steps) + 1);
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    out.rows[k].time_days = static_cast<double>(k) * params.step_days;
  }
  std::map<int, GenerationSummary> generations;
  generations[0] = {0, 1.0, p};

  for (std::int64_t t = 0; t <= steps; ++t) {
    CohortRow& row = out.rows[static_cast<std::size_t>(t)];
    std::vector<std::tuple<ClassKey, Timing, double>> shedding;
    for (const auto& [c, mass] : classes) {
      const Timing tm = timing(c);
      if (tm.isolate == t) row.newly_isolated += mass;
      if (c.exposed + latent <= t && t < tm.isolate) {
        row.actively_shedding += mass;
        shedding.emplace_back(c, tm, mass);
      }
    }
    if (t == steps) break;
    CohortRow& next = out.rows[static_cast<std::size_t>(t) + 1];
    for (const auto& [c, tm, mass] : shedding) {
      const double x = mass * per_step;
      next.new_exposures += x;
      if (c.generation == 0) next.first_generation_cumulative += x;
      auto& g = generations[c.generation + 1];
      g.generation = c.generation + 1;
      g.exposures += x;
      g.app_users += x * p;
      add_exposures(t, tm.report, c.app, c.generation + 1, x);
    }
  }

  double cumulative = 0.0;
  double first = 0.0;
  for (auto& row : out.rows) {
    cumulative += row.new_exposures;
    first += row.first_generation_cumulative;
    row.cumulative_exposures = cumulative;
    row.first_generation_cumulative = first;
  }
  for (auto& [g, s] : generations) out.generations.push_back(s);
  return out;
}

}  // namespace ctlab::epi

#endif  // CTLAB_EPI_COHORT_HPP_
