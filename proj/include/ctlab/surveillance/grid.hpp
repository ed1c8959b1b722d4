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

// Geographic grid aggregation of surveillance reports: per-cell summaries,
// outbreak flags, GeoJSON heatmaps, narrowcast selection and trajectories.
//
// All outputs are independent of ingestion order: cells are listed in
// (row, col) order and per-cell sums run over sorted probabilities.

#ifndef CTLAB_SURVEILLANCE_GRID_HPP_
#define CTLAB_SURVEILLANCE_GRID_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctlab/error.hpp"
#include "ctlab/surveillance/report.hpp"
#include "ctlab/surveillance/store.hpp"
#include "json.hpp"

namespace ctlab::surveillance {

struct CellId {
  std::int64_t row = 0;
  std::int64_t col = 0;

  auto operator<=>(const CellId&) const = default;
  std::string str() const { return std::to_string(row) + ":" + std::to_string(col); }
};

inline std::optional<CellId> ParseCellId(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return std::nullopt;
  try {
    std::size_t a = 0, b = 0;
    CellId c{std::stoll(s.substr(0, colon), &a), std::stoll(s.substr(colon + 1), &b)};
    if (a != colon || b != s.size() - colon - 1) return std::nullopt;
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct CellBounds {
  double lat_min, lat_max, lon_min, lon_max;
};

// Square cells of `cell_size` degrees; row 0 starts at latitude -90 and
// column 0 at longitude -180. Points on the north pole or the antimeridian
// fall into the last row or column.
struct GridSpec {
  double cell_size = 0.01;

  void Validate() const {
    if (!(cell_size > 0.0 && cell_size <= 180.0)) {
      throw Error(ErrorCode::kInvalidParams, "cell size must lie in (0, 180] degrees");
    }
  }
  std::int64_t rows() const { return static_cast<std::int64_t>(std::ceil(180.0 / cell_size - 1e-9)); }
  std::int64_t cols() const { return static_cast<std::int64_t>(std::ceil(360.0 / cell_size - 1e-9)); }

  CellId CellOf(double lat, double lon) const {
    auto index = [&](double offset, std::int64_t n) {
      // The small bias puts points that sit on a boundary up to rounding
      // error into the cell that starts there.
      const double units = PerDegree() ? offset * *PerDegree() : offset / cell_size;
      const auto i = static_cast<std::int64_t>(std::floor(units + 1e-9));
      return std::clamp<std::int64_t>(i, 0, n - 1);
    };
    return {index(lat + 90.0, rows()), index(lon + 180.0, cols())};
  }

  CellBounds Bounds(const CellId& c) const {
    return {Edge(c.row, 90.0), std::min(90.0, Edge(c.row + 1, 90.0)), Edge(c.col, 180.0),
            std::min(180.0, Edge(c.col + 1, 180.0))};
  }

 private:
  // Cells per degree when the cell size is its exact reciprocal (0.01, 0.5,
  // ...); dividing by it keeps edges such as 51.5 exact.
  std::optional<double> PerDegree() const {
    const double k = std::round(1.0 / cell_size);
    if (k >= 1.0 && std::abs(1.0 / cell_size - k) < 1e-9 * k) return k;
    return std::nullopt;
  }
  // Coordinate of the lower edge of cell i on an axis starting at -origin.
  double Edge(std::int64_t i, double origin) const {
    if (auto k = PerDegree()) return (static_cast<double>(i) - origin * *k) / *k;
    return static_cast<double>(i) * cell_size - origin;
  }
};

// Half-open time window [start, end) in UTC seconds.
struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;

  void Validate() const {
    if (!(end > start)) {
      throw Error(ErrorCode::kInvalidWindow, "window end must be after its start");
    }
  }
  bool contains(std::int64_t t) const { return t >= start && t < end; }
  std::int64_t length() const { return end - start; }
  bool operator==(const TimeWindow&) const = default;
};

struct CellStats {
  std::size_t count = 0;
  // NaN when count is 0.
  double mean_p = std::numeric_limits<double>::quiet_NaN();
  double high_risk_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct GridCellAggregate {
  CellId cell;
  double cell_size = 0.0;
  TimeWindow window;
  double tau = 0.5;
  std::size_t count = 0;
  double mean_p = 0.0;
  // Share of reports with p_covid >= tau.
  double high_risk_fraction = 0.0;
  // Indexed by AgeGroup.
  std::array<CellStats, 2> by_age;

  const CellStats& age(AgeGroup a) const { return by_age[static_cast<int>(a)]; }
};

namespace detail {

inline void CheckTau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidParams, "tau must lie in [0, 1]");
}

// Stats of a set of probabilities, summed in ascending order.
inline CellStats Summarize(std::vector<double>& ps, double tau) {
  CellStats s;
  s.count = ps.size();
  if (ps.empty()) return s;
  std::sort(ps.begin(), ps.end());
  double sum = 0.0;
  std::size_t high = 0;
  for (double p : ps) {
    sum += p;
    high += p >= tau ? 1 : 0;
  }
  s.mean_p = std::clamp(sum / static_cast<double>(ps.size()), ps.front(), ps.back());
  s.high_risk_fraction = static_cast<double>(high) / static_cast<double>(ps.size());
  return s;
}

}  // namespace detail

// Aggregates every report whose timestamp falls in the window, optionally
// restricted to one age group. Empty cells are omitted.
inline std::vector<GridCellAggregate> aggregate_grid(const Snapshot& reports, const TimeWindow& window,
                                                     const GridSpec& grid, double tau,
                                                     std::optional<AgeGroup> age = std::nullopt) {
  window.Validate();
  grid.Validate();
  detail::CheckTau(tau);
  std::map<CellId, std::array<std::vector<double>, 2>> cells;
  reports.for_each([&](const SurveillanceReport& r) {
    if (!window.contains(r.timestamp) || (age && r.age_group != *age)) return;
    cells[grid.CellOf(r.latitude, r.longitude)][static_cast<int>(r.age_group)].push_back(r.p_covid);
  });
  std::vector<GridCellAggregate> out;
  out.reserve(cells.size());
  for (auto& [cell, by_age] : cells) {
    GridCellAggregate a;
    a.cell = cell;
    a.cell_size = grid.cell_size;
    a.window = window;
    a.tau = tau;
    std::vector<double> all;
    all.reserve(by_age[0].size() + by_age[1].size());
    all.insert(all.end(), by_age[0].begin(), by_age[0].end());
    all.insert(all.end(), by_age[1].begin(), by_age[1].end());
    const CellStats total = detail::Summarize(all, tau);
    a.count = total.count;
    a.mean_p = total.mean_p;
    a.high_risk_fraction = total.high_risk_fraction;
    for (int g = 0; g < 2; ++g) a.by_age[g] = detail::Summarize(by_age[g], tau);
    out.push_back(std::move(a));
  }
  return out;
}

struct OutbreakFlag {
  CellId cell;
  TimeWindow window;
  TimeWindow previous;
  std::size_t count = 0;
  double mean_p = 0.0;
  // Mean over the same cell in the previous window; 0 when it had no reports.
  double baseline_mean_p = 0.0;
  std::size_t baseline_count = 0;
  std::size_t min_reports = 0;
  double delta = 0.0;
};

struct OutbreakParams {
  std::size_t min_reports = 5;
  double delta = 0.2;
};

// A cell is flagged when count >= min_reports and mean_p >= baseline + delta.
inline std::vector<OutbreakFlag> detect_outbreaks(const Snapshot& reports, const TimeWindow& current,
                                                  const TimeWindow& previous, const GridSpec& grid,
                                                  const OutbreakParams& params = {}) {
  current.Validate();
  previous.Validate();
  if (previous.end != current.start || previous.length() != current.length()) {
    throw Error(ErrorCode::kInvalidWindow,
                "previous window must end where the current one starts and have the same length");
  }
  if (!std::isfinite(params.delta)) throw Error(ErrorCode::kInvalidParams, "delta must be finite");
  const auto now = aggregate_grid(reports, current, grid, 0.5);
  const auto before = aggregate_grid(reports, previous, grid, 0.5);
  std::map<CellId, const GridCellAggregate*> baseline;
  for (const auto& a : before) baseline[a.cell] = &a;

  std::vector<OutbreakFlag> out;
  for (const auto& a : now) {
    OutbreakFlag f;
    f.cell = a.cell;
    f.window = current;
    f.previous = previous;
    f.count = a.count;
    f.mean_p = a.mean_p;
    if (auto it = baseline.find(a.cell); it != baseline.end()) {
      f.baseline_mean_p = it->second->mean_p;
      f.baseline_count = it->second->count;
    }
    f.min_reports = params.min_reports;
    f.delta = params.delta;
    if (f.count >= params.min_reports && f.mean_p >= f.baseline_mean_p + params.delta) {
      out.push_back(f);
    }
  }
  return out;
}

namespace detail {

inline nlohmann::ordered_json NumberOrNull(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json StatsJson(const CellStats& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["mean_p"] = NumberOrNull(s.mean_p);
  j["high_risk_fraction"] = NumberOrNull(s.high_risk_fraction);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json WindowJson(const TimeWindow& w) {
  nlohmann::ordered_json j;
  j["start"] = w.start;
  j["end"] = w.end;
  return j;
}

inline nlohmann::ordered_json AggregateToJson(const GridCellAggregate& a) {
  nlohmann::ordered_json j;
  j["cell"] = a.cell.str();
  j["row"] = a.cell.row;
  j["col"] = a.cell.col;
  j["count"] = a.count;
  j["mean_p"] = a.mean_p;
  j["high_risk_fraction"] = a.high_risk_fraction;
  j["under65"] = detail::StatsJson(a.age(AgeGroup::kUnder65));
  j["over65"] = detail::StatsJson(a.age(AgeGroup::kOver65));
  return j;
}

// GeoJSON FeatureCollection with one square polygon per non-empty cell,
// ordered by cell id. Coordinates are [longitude, latitude].
inline nlohmann::ordered_json HeatmapGeoJson(const std::vector<GridCellAggregate>& cells,
                                             const TimeWindow& window, const GridSpec& grid,
                                             double tau, std::optional<AgeGroup> age = std::nullopt) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["window"] = WindowJson(window);
  doc["cell_size"] = grid.cell_size;
  doc["tau"] = tau;
  doc["age_group"] = age ? nlohmann::ordered_json(AgeGroupName(*age)) : nlohmann::ordered_json(nullptr);
  auto features = nlohmann::ordered_json::array();
  for (const auto& a : cells) {
    const CellBounds b = grid.Bounds(a.cell);
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["id"] = a.cell.str();
    f["geometry"] = {{"type", "Polygon"},
                     {"coordinates",
                      {{{b.lon_min, b.lat_min},
                        {b.lon_max, b.lat_min},
                        {b.lon_max, b.lat_max},
                        {b.lon_min, b.lat_max},
                        {b.lon_min, b.lat_min}}}}};
    f["properties"] = AggregateToJson(a);
    features.push_back(std::move(f));
  }
  doc["features"] = std::move(features);
  return doc;
}

inline std::string export_heatmap(const Snapshot& reports, const TimeWindow& window,
                                  const GridSpec& grid, double tau,
                                  std::optional<AgeGroup> age = std::nullopt) {
  return HeatmapGeoJson(aggregate_grid(reports, window, grid, tau, age), window, grid, tau, age)
      .dump();
}

inline nlohmann::ordered_json OutbreakToJson(const OutbreakFlag& f) {
  nlohmann::ordered_json j;
  j["cell"] = f.cell.str();
  j["row"] = f.cell.row;
  j["col"] = f.cell.col;
  j["window"] = WindowJson(f.window);
  j["previous"] = WindowJson(f.previous);
  j["count"] = f.count;
  j["mean_p"] = f.mean_p;
  j["baseline_mean_p"] = f.baseline_mean_p;
  j["baseline_count"] = f.baseline_count;
  j["min_reports"] = f.min_reports;
  j["delta"] = f.delta;
  return j;
}

struct NarrowcastSelection {
  std::vector<CellId> cells;
  TimeWindow window;
  // Sorted, deduplicated.
  std::vector<std::string> uids;
};

inline NarrowcastSelection select_narrowcast(const Snapshot& reports, std::vector<CellId> cells,
                                             const TimeWindow& window, const GridSpec& grid) {
  window.Validate();
  grid.Validate();
  if (cells.empty()) throw Error(ErrorCode::kInvalidParams, "no target cells");
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::set<std::string> uids;
  reports.for_each([&](const SurveillanceReport& r) {
    if (!r.app_uid || !window.contains(r.timestamp)) return;
    if (std::binary_search(cells.begin(), cells.end(), grid.CellOf(r.latitude, r.longitude))) {
      uids.insert(*r.app_uid);
    }
  });
  return {std::move(cells), window, {uids.begin(), uids.end()}};
}

inline nlohmann::ordered_json NarrowcastToJson(const NarrowcastSelection& s) {
  nlohmann::ordered_json j;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : s.cells) cells.push_back(c.str());
  j["cells"] = std::move(cells);
  j["window"] = WindowJson(s.window);
  j["uids"] = s.uids;
  return j;
}

// Reports carrying `uid`, by ascending timestamp (ingestion order on ties).
inline std::vector<SurveillanceReport> trajectory(const Snapshot& reports, const std::string& uid) {
  if (uid.empty()) throw Error(ErrorCode::kInvalidParams, "uid must not be empty");
  std::vector<SurveillanceReport> out;
  reports.for_each([&](const SurveillanceReport& r) {
    if (r.app_uid && *r.app_uid == uid) out.push_back(r);
  });
  std::stable_sort(out.begin(), out.end(), [](const SurveillanceReport& a, const SurveillanceReport& b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

}  // namespace ctlab::surveillance

#endif  // CTLAB_SURVEILLANCE_GRID_HPP_
