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

// Adoption sweeps over the cohort model: the day-by-adoption metric table,
// the least adoption meeting a containment criterion, and install-base
// arithmetic.

#ifndef CTLAB_EPI_SCENARIOS_HPP_
#define CTLAB_EPI_SCENARIOS_HPP_

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ctlab/epi/cohort.hpp"
#include "ctlab/error.hpp"

namespace ctlab::epi {

struct Table1Row {
  double adoption = 0.0;
  double day = 0.0;
  // (i) exposures made by the index case before `day`.
  double cumulative_exposures = 0.0;
  // (ii) new exposures, all generations, over (day - 2, day].
  double windowed_new_exposures = 0.0;
  // (iii) (ii) divided by individuals entering isolation over the same
  // window; NaN when nobody isolates there.
  double normalized = 0.0;
  // Exposures by every generation before `day`.
  double all_generations_cumulative = 0.0;
};

inline const std::vector<double>& DefaultTable1Adoptions() {
  static const std::vector<double> v = {0.80, 0.90, 0.95};
  return v;
}

inline const std::vector<double>& DefaultTable1Days() {
  static const std::vector<double> v = {12, 14, 16, 18, 20};
  return v;
}

inline std::vector<Table1Row> table1(const CohortParams& base,
                                     const std::vector<double>& adoptions =
                                         DefaultTable1Adoptions(),
                                     const std::vector<double>& days = DefaultTable1Days()) {
  std::vector<Table1Row> out;
  for (double a : adoptions) {
    CohortParams params = base;
    params.adoption = a;
    for (double d : days) params.horizon_days = std::max(params.horizon_days, d);
    const CohortTimeSeries series = run_cohort(params);
    for (double d : days) {
      Table1Row row;
      row.adoption = a;
      row.day = d;
      row.cumulative_exposures = series.FirstGenerationAt(d);
      row.windowed_new_exposures = series.WindowedNewExposures(d);
      const double isolated = series.WindowedIsolations(d);
      row.normalized = isolated > 0.0 ? row.windowed_new_exposures / isolated
                                      : std::numeric_limits<double>::quiet_NaN();
      row.all_generations_cumulative = series.CumulativeAt(d);
      out.push_back(row);
    }
  }
  return out;
}

using Criterion = std::function<bool(const CohortTimeSeries&)>;

// Windowed new exposures at day 14, 16, ... up to the horizon never rise.
inline bool Contained(const CohortTimeSeries& s) {
  const double first = 14.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double d = first; d <= s.params.horizon_days + 1e-9; d += 2.0) {
    const double w = s.WindowedNewExposures(d);
    if (w > previous + 1e-12) return false;
    previous = w;
  }
  return true;
}

struct SweetSpotOptions {
  // Grid used to check that the criterion only switches from false to true.
  int monotonicity_samples = 21;
  // Bisection resolution is 1 / resolution_steps.
  int resolution_steps = 1000;
};

// Least adoption p (to the resolution) for which `criterion` holds.
inline double sweet_spot_search(const CohortParams& base, const Criterion& criterion = Contained,
                                const SweetSpotOptions& options = {}) {
  if (options.monotonicity_samples < 2 || options.resolution_steps < 1) {
    throw Error(ErrorCode::kInvalidParams, "bad sweet-spot options");
  }
  auto holds = [&](double p) {
    CohortParams params = base;
    params.adoption = p;
    return criterion(run_cohort(params));
  };

  bool seen_true = false;
  double first_true = 0.0;
  for (int i = 0; i < options.monotonicity_samples; ++i) {
    const double p = static_cast<double>(i) / (options.monotonicity_samples - 1);
    const bool ok = holds(p);
    if (ok && !seen_true) {
      seen_true = true;
      first_true = p;
    } else if (!ok && seen_true) {
      throw Error(ErrorCode::kCriterionNotMonotone,
                  "criterion holds at p = " + std::to_string(first_true) +
                      " but fails at p = " + std::to_string(p));
    }
  }
  if (!seen_true) {
    throw Error(ErrorCode::kCriterionNeverSatisfied, "criterion fails even at p = 1");
  }
  if (holds(0.0)) return 0.0;

  int lo = 0;
  int hi = options.resolution_steps;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (holds(static_cast<double>(mid) / options.resolution_steps)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return static_cast<double>(hi) / options.resolution_steps;
}

struct UptakeInputs {
  double target_population_uptake = 0.6;
  double smartphone_penetration = 0.79;
  double dropout = 0.0;
};

struct UptakeResult {
  double owners_fraction = 0.0;
  double population_fraction = 0.0;
  // Human-readable remarks on the arithmetic, one per line.
  std::vector<std::string> notes;
};

inline UptakeResult required_install_fraction(const UptakeInputs& u) {
  if (!(u.target_population_uptake >= 0.0 && u.target_population_uptake <= 1.0) ||
      !(u.smartphone_penetration > 0.0 && u.smartphone_penetration <= 1.0) ||
      !(u.dropout >= 0.0 && u.dropout < 1.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "need target in [0,1], penetration in (0,1], dropout in [0,1)");
  }
  const double ceiling = u.smartphone_penetration * (1.0 - u.dropout);
  if (u.target_population_uptake > ceiling) {
    throw Error(ErrorCode::kInfeasible, "target uptake " + std::to_string(u.target_population_uptake) +
                                            " exceeds the post-dropout ceiling " +
                                            std::to_string(ceiling));
  }
  UptakeResult r;
  r.owners_fraction = u.target_population_uptake / ceiling;
  r.population_fraction = r.owners_fraction * u.smartphone_penetration;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "owners_fraction = target / (penetration * (1 - dropout)) = %.4f", r.owners_fraction);
  r.notes.push_back(buf);
  if (u.dropout > 0.0) {
    const double additive = u.target_population_uptake / u.smartphone_penetration + u.dropout;
    std::snprintf(buf, sizeof buf,
                  "adding dropout instead of dividing by (1 - dropout) gives %.4f; a quoted "
                  "figure of 82%% for (0.60, 0.79, 0.06) matches that additive reading, not "
                  "the multiplicative one used here",
                  additive);
    r.notes.push_back(buf);
  }
  return r;
}

}  // namespace ctlab::epi

#endif  // CTLAB_EPI_SCENARIOS_HPP_
