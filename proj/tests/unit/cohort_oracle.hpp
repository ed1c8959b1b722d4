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

// Independent cohort oracle: instead of pushing mass forward step by step it
// recurses over one individual's subtree. subtree(e, A, app, kind) is the
// expected number of exposures per step caused by an individual of that type
// and all of its descendants; results are memoized on the type.

#ifndef CTLAB_TESTS_COHORT_ORACLE_HPP_
#define CTLAB_TESTS_COHORT_ORACLE_HPP_

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "ctlab/epi/cohort.hpp"

namespace ctlab::testing {

class CohortOracle {
 public:
  explicit CohortOracle(const epi::CohortParams& p) : p_(p) {
    auto steps = [&](double d) { return static_cast<long>(std::lround(d / p.step_days)); };
    latent_ = steps(p.latent_days);
    iso_ = steps(p.isolation_day);
    long_ = steps(p.long_shed_days);
    sym_ = steps(p.universal_symptomatic_day);
    delay_ = steps(p.report_delay_days);
    horizon_ = steps(p.horizon_days);
    per_step_ = p.contacts_per_window / p.window_days * p.step_days;
    kinds_ = {1.0 - p.asymptomatic_fraction - p.long_shedder_fraction, p.asymptomatic_fraction,
              p.long_shedder_fraction};
  }

  // Expected exposures made at each step 0..horizon-1 by the index case's
  // whole tree; index kinds and app status are mixed as for any exposure.
  std::vector<double> ExposuresByStep() {
    std::vector<double> out(horizon_, 0.0);
    for (int app = 0; app < 2; ++app) {
      for (int k = 0; k < 3; ++k) {
        const double w = (app ? p_.adoption : 1.0 - p_.adoption) * kinds_[k];
        if (w == 0.0) continue;
        const auto& sub = Subtree(0, kNever, app, k);
        for (long t = 0; t < horizon_; ++t) out[t] += w * sub[t];
      }
    }
    return out;
  }

  // Exposures made by the index case alone, per step. Nobody can alert the
  // index case, so only its kind matters.
  std::vector<double> IndexExposuresByStep() const {
    std::vector<double> out(horizon_, 0.0);
    for (int k = 0; k < 3; ++k) {
      const long stop = k == 2 ? long_ : iso_;
      for (long t = latent_; t < std::min(stop, horizon_); ++t) out[t] += kinds_[k] * per_step_;
    }
    return out;
  }

 private:
  static constexpr long kNever = 1L << 40;

  const std::vector<double>& Subtree(long e, long alert, int app, int kind) {
    const auto key = std::make_tuple(e, alert, app, kind);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<double> out(horizon_, 0.0);
    const long stop = std::min(e + (kind == 2 ? long_ : iso_), alert);
    long report = kNever;
    const bool capable = app || p_.link_model == epi::LinkModel::kContactNeedsApp;
    if (capable) {
      if (kind != 1) report = e + sym_ + delay_;
      if (alert != kNever) report = std::min(report, alert + delay_);
    }
    for (long s = e + latent_; s < stop && s < horizon_; ++s) {
      out[s] += per_step_;
      for (int child_app = 0; child_app < 2; ++child_app) {
        const double pa = child_app ? p_.adoption : 1.0 - p_.adoption;
        if (pa == 0.0) continue;
        const bool linked =
            child_app && (p_.link_model == epi::LinkModel::kContactNeedsApp || app);
        const long child_alert = linked ? report : kNever;
        for (int k = 0; k < 3; ++k) {
          if (kinds_[k] == 0.0) continue;
          const auto& sub = Subtree(s, child_alert >= kNever ? kNever : child_alert, child_app, k);
          const double w = per_step_ * pa * kinds_[k];
          for (long t = s; t < horizon_; ++t) out[t] += w * sub[t];
        }
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

  epi::CohortParams p_;
  long latent_, iso_, long_, sym_, delay_, horizon_;
  double per_step_;
  std::vector<double> kinds_;
  std::map<std::tuple<long, long, int, int>, std::vector<double>> memo_;
};

}  // namespace ctlab::testing

#endif  // CTLAB_TESTS_COHORT_ORACLE_HPP_
