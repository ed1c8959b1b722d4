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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ctlab/surveillance/grid.hpp"
#include "ctlab/surveillance/report.hpp"
#include "ctlab/surveillance/service.hpp"
#include "ctlab/surveillance/store.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ctlab::surveillance;
using ctlab::Error;
using ctlab::ErrorCode;

constexpr std::int64_t kNow = 1'700'000'000;

Clock FixedClock() {
  return [] { return kNow; };
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("ctlab_surv_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

SurveillanceReport Make(double p, double lat, double lon, AgeGroup age, std::int64_t ts,
                        std::optional<std::string> uid = std::nullopt) {
  return {p, lat, lon, age, ts, std::move(uid)};
}

// Reports scattered over a small area so that cells hold several reports.
std::vector<SurveillanceReport> RandomReports(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p(0.0, 1.0), lat(51.45, 51.55), lon(-0.15, -0.05);
  std::uniform_int_distribution<std::int64_t> ts(kNow - 7 * 86400, kNow);
  std::uniform_int_distribution<int> coin(0, 3), uid(0, 40);
  std::vector<SurveillanceReport> out;
  for (std::size_t i = 0; i < n; ++i) {
    SurveillanceReport r = Make(p(rng), lat(rng), lon(rng),
                                coin(rng) % 2 ? AgeGroup::kOver65 : AgeGroup::kUnder65, ts(rng));
    if (coin(rng) != 0) r.app_uid = "u" + std::to_string(uid(rng));
    out.push_back(std::move(r));
  }
  return out;
}

struct BruteCell {
  std::vector<double> ps;
  std::array<std::vector<double>, 2> by_age;
};

std::map<CellId, BruteCell> BruteForce(const std::vector<SurveillanceReport>& log,
                                       const TimeWindow& w, const GridSpec& g) {
  std::map<CellId, BruteCell> out;
  for (const auto& r : log) {
    if (r.timestamp < w.start || r.timestamp >= w.end) continue;
    auto& c = out[g.CellOf(r.latitude, r.longitude)];
    c.ps.push_back(r.p_covid);
    c.by_age[static_cast<int>(r.age_group)].push_back(r.p_covid);
  }
  return out;
}

double Mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

// Ingests through a store so deduplication matches the service.
std::vector<SurveillanceReport> Accepted(const std::vector<SurveillanceReport>& in) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  for (const auto& r : in) store.ingest(r);
  return store.snapshot().to_vector();
}

TEST(Report, ValidationReasons) {
  auto ok = Make(0.5, 51.5, -0.12, AgeGroup::kOver65, kNow);
  EXPECT_EQ(ValidateReport(ok, kNow), "");
  auto r = ok;
  r.p_covid = 1.2;
  EXPECT_EQ(ValidateReport(r, kNow), "probability out of range");
  r.p_covid = std::nan("");
  EXPECT_EQ(ValidateReport(r, kNow), "probability out of range");
  r = ok;
  r.latitude = 90.5;
  EXPECT_EQ(ValidateReport(r, kNow), "bad coordinates");
  r = ok;
  r.longitude = -180.01;
  EXPECT_EQ(ValidateReport(r, kNow), "bad coordinates");
  r = ok;
  r.timestamp = kNow + kMaxClockSkewSeconds;
  EXPECT_EQ(ValidateReport(r, kNow), "");
  r.timestamp += 1;
  EXPECT_EQ(ValidateReport(r, kNow), "future timestamp");
  r = ok;
  r.app_uid = std::string(kMaxUidLength + 1, 'x');
  EXPECT_EQ(ValidateReport(r, kNow), "bad uid");
  r.app_uid = "";
  EXPECT_EQ(ValidateReport(r, kNow), "bad uid");
}

TEST(Report, JsonDecoding) {
  auto d = ReportFromJson(nlohmann::json::parse(
      R"({"p_covid":0.25,"latitude":1.5,"longitude":2.5,"age_group":"under65","timestamp":7,"app_uid":"a"})"));
  ASSERT_TRUE(d.report);
  EXPECT_EQ(*d.report, Make(0.25, 1.5, 2.5, AgeGroup::kUnder65, 7, "a"));
  EXPECT_EQ(ReportFromJson(nlohmann::json::parse(R"({"p_covid":0.2})")).reason, "bad coordinates");
  EXPECT_EQ(ReportFromJson(nlohmann::json::parse(
                R"({"p_covid":0.2,"latitude":0,"longitude":0,"age_group":"child","timestamp":1})"))
                .reason,
            "bad age group");
  EXPECT_EQ(ReportFromJson(nlohmann::json::parse(
                R"({"p_covid":0.2,"latitude":0,"longitude":0,"age_group":"over65","timestamp":1.5})"))
                .reason,
            "bad timestamp");
  EXPECT_EQ(ReportFromJson(nlohmann::json::parse("[]")).reason, "malformed report");
}

TEST(Store, SingleReportAggregate) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  auto res = store.ingest(Make(1.0, 51.5, -0.12, AgeGroup::kOver65, kNow));
  ASSERT_TRUE(res.accepted);
  const auto cells = aggregate_grid(store.snapshot(), {kNow, kNow + 1}, GridSpec{}, 0.5);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].count, 1u);
  EXPECT_EQ(cells[0].mean_p, 1.0);
  EXPECT_EQ(cells[0].age(AgeGroup::kOver65).count, 1u);
  EXPECT_EQ(cells[0].age(AgeGroup::kUnder65).count, 0u);
}

TEST(Store, RejectsOutOfRangeProbability) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  auto res = store.ingest(Make(1.2, 51.5, -0.12, AgeGroup::kOver65, kNow));
  EXPECT_FALSE(res.accepted);
  EXPECT_EQ(res.reason, "probability out of range");
  EXPECT_EQ(store.size(), 0u);
}

TEST(Store, DeduplicatesOnUidAndTimestamp) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  auto r = Make(0.3, 10, 10, AgeGroup::kUnder65, kNow, "abc");
  EXPECT_FALSE(store.ingest(r).duplicate);
  auto again = store.ingest(r);
  EXPECT_TRUE(again.accepted);
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(store.size(), 1u);
  r.timestamp -= 1;
  EXPECT_FALSE(store.ingest(r).duplicate);
  // Anonymous reports have no key and are never merged.
  auto anon = Make(0.3, 10, 10, AgeGroup::kUnder65, kNow);
  store.ingest(anon);
  store.ingest(anon);
  EXPECT_EQ(store.size(), 4u);
}

TEST(Store, SnapshotIsStableUnderAppends) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  for (int i = 0; i < 10; ++i) store.ingest(Make(0.1, 0, 0, AgeGroup::kUnder65, kNow));
  const Snapshot snap = store.snapshot();
  for (std::size_t i = 0; i < 2 * Snapshot::kChunk; ++i) store.ingest(Make(0.9, 0, 0, AgeGroup::kOver65, kNow));
  EXPECT_EQ(snap.size(), 10u);
  for (std::size_t i = 0; i < snap.size(); ++i) EXPECT_EQ(snap[i].p_covid, 0.1);
  EXPECT_EQ(store.size(), 10 + 2 * Snapshot::kChunk);
}

TEST(Store, ConcurrentIngestAndQueries) {
  ReportStore store(ReportStore::Options{{}, false, FixedClock()});
  const auto reports = RandomReports(4000, 5);
  std::atomic<bool> done{false};
  std::thread reader([&] {
    std::size_t last = 0;
    while (!done) {
      const auto snap = store.snapshot();
      EXPECT_GE(snap.size(), last);
      last = snap.size();
      std::size_t total = 0;
      for (const auto& c : aggregate_grid(snap, {kNow - 8 * 86400, kNow + 1}, GridSpec{}, 0.5)) total += c.count;
      EXPECT_EQ(total, snap.size());
    }
  });
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t) {
    writers.emplace_back([&, t] {
      for (std::size_t i = t; i < reports.size(); i += 4) {
        auto r = reports[i];
        r.app_uid.reset();
        store.ingest(r);
      }
    });
  }
  for (auto& w : writers) w.join();
  done = true;
  reader.join();
  EXPECT_EQ(store.size(), reports.size());
}

TEST(Grid, CellsAndBounds) {
  GridSpec g;
  EXPECT_EQ(g.rows(), 18000);
  EXPECT_EQ(g.cols(), 36000);
  EXPECT_EQ(g.CellOf(-90, -180), (CellId{0, 0}));
  EXPECT_EQ(g.CellOf(90, 180), (CellId{17999, 35999}));
  const CellId c = g.CellOf(51.5, -0.12);
  EXPECT_EQ(c, (CellId{14150, 17988}));
  const auto b = g.Bounds(c);
  EXPECT_EQ(b.lat_min, 51.5);
  EXPECT_EQ(b.lat_max, 51.51);
  EXPECT_EQ(b.lon_min, -0.12);
  EXPECT_EQ(b.lon_max, -0.11);
  const auto coarse = GridSpec{0.3}.Bounds(GridSpec{0.3}.CellOf(0.1, 0.1));
  EXPECT_NEAR(coarse.lat_min, 0.0, 1e-12);
  EXPECT_NEAR(coarse.lat_max, 0.3, 1e-12);
  EXPECT_EQ(ParseCellId("14150:17988"), c);
  EXPECT_FALSE(ParseCellId("14150"));
  EXPECT_FALSE(ParseCellId("1:2x"));
  EXPECT_THROW(GridSpec{0.0}.Validate(), Error);
}

TEST(Grid, EmptyAndInvalidWindow) {
  Snapshot empty;
  EXPECT_TRUE(aggregate_grid(empty, {0, 10}, GridSpec{}, 0.5).empty());
  try {
    aggregate_grid(empty, {10, 10}, GridSpec{}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidWindow);
  }
  EXPECT_THROW(aggregate_grid(empty, {0, 10}, GridSpec{}, 1.5), Error);
}

TEST(Grid, ThreeReportArithmetic) {
  auto snap = Snapshot::FromVector({Make(0.2, 1.001, 1.001, AgeGroup::kUnder65, 5),
                                    Make(0.4, 1.002, 1.002, AgeGroup::kOver65, 6),
                                    Make(0.9, 1.003, 1.003, AgeGroup::kOver65, 7)});
  const auto cells = aggregate_grid(snap, {0, 100}, GridSpec{}, 0.5);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].count, 3u);
  EXPECT_NEAR(cells[0].mean_p, 0.5, 1e-15);
  EXPECT_NEAR(cells[0].high_risk_fraction, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(cells[0].age(AgeGroup::kOver65).count, 2u);
  EXPECT_NEAR(cells[0].age(AgeGroup::kOver65).mean_p, 0.65, 1e-15);
  EXPECT_TRUE(std::isnan(aggregate_grid(snap, {0, 6}, GridSpec{}, 0.5)[0].age(AgeGroup::kOver65).mean_p));
}

TEST(Grid, WindowIsHalfOpen) {
  auto snap = Snapshot::FromVector({Make(0.2, 0, 0, AgeGroup::kUnder65, 10),
                                    Make(0.4, 0, 0, AgeGroup::kUnder65, 20)});
  const auto cells = aggregate_grid(snap, {10, 20}, GridSpec{}, 0.5);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].count, 1u);
  EXPECT_EQ(cells[0].mean_p, 0.2);
}

TEST(Grid, MatchesBruteForceOnRandomReports) {
  const auto log = Accepted(RandomReports(1000, 11));
  const auto snap = Snapshot::FromVector(log);
  for (double cell : {0.01, 0.005, 0.05}) {
    const GridSpec g{cell};
    const TimeWindow w{kNow - 5 * 86400, kNow - 86400};
    const auto cells = aggregate_grid(snap, w, g, 0.7);
    const auto brute = BruteForce(log, w, g);
    ASSERT_EQ(cells.size(), brute.size());
    std::size_t total = 0, in_window = 0;
    for (const auto& r : log) in_window += w.contains(r.timestamp) ? 1 : 0;
    for (const auto& c : cells) {
      const auto& b = brute.at(c.cell);
      ASSERT_EQ(c.count, b.ps.size());
      EXPECT_NEAR(c.mean_p, Mean(b.ps), 1e-12);
      EXPECT_GE(c.mean_p, *std::min_element(b.ps.begin(), b.ps.end()));
      EXPECT_LE(c.mean_p, *std::max_element(b.ps.begin(), b.ps.end()));
      const auto high = std::count_if(b.ps.begin(), b.ps.end(), [](double p) { return p >= 0.7; });
      EXPECT_NEAR(c.high_risk_fraction, static_cast<double>(high) / b.ps.size(), 1e-15);
      EXPECT_EQ(c.age(AgeGroup::kUnder65).count + c.age(AgeGroup::kOver65).count, c.count);
      for (int a = 0; a < 2; ++a) {
        if (b.by_age[a].empty()) continue;
        EXPECT_NEAR(c.by_age[a].mean_p, Mean(b.by_age[a]), 1e-12);
      }
      total += c.count;
    }
    EXPECT_EQ(total, in_window);
  }
}

TEST(Grid, AgeFilterSelectsOneGroup) {
  const auto log = Accepted(RandomReports(500, 3));
  const auto snap = Snapshot::FromVector(log);
  const TimeWindow w{kNow - 8 * 86400, kNow + 1};
  const auto all = aggregate_grid(snap, w, GridSpec{}, 0.5);
  const auto old = aggregate_grid(snap, w, GridSpec{}, 0.5, AgeGroup::kOver65);
  std::map<CellId, const GridCellAggregate*> by_cell;
  for (const auto& c : all) by_cell[c.cell] = &c;
  for (const auto& c : old) {
    EXPECT_EQ(c.age(AgeGroup::kUnder65).count, 0u);
    const auto& full = *by_cell.at(c.cell);
    EXPECT_EQ(c.count, full.age(AgeGroup::kOver65).count);
    EXPECT_EQ(c.mean_p, full.age(AgeGroup::kOver65).mean_p);
  }
}

TEST(Grid, IngestionOrderDoesNotMatter) {
  auto log = Accepted(RandomReports(800, 21));
  const TimeWindow w{kNow - 8 * 86400, kNow + 1};
  const std::string a = export_heatmap(Snapshot::FromVector(log), w, GridSpec{0.02}, 0.5);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 3; ++k) {
    std::shuffle(log.begin(), log.end(), rng);
    EXPECT_EQ(export_heatmap(Snapshot::FromVector(log), w, GridSpec{0.02}, 0.5), a);
  }
}

TEST(Outbreaks, FlagsRiseOverBaseline) {
  std::vector<SurveillanceReport> log;
  for (int i = 0; i < 20; ++i) log.push_back(Make(0.1, 5, 5, AgeGroup::kUnder65, 50 + i));
  for (int i = 0; i < 20; ++i) log.push_back(Make(0.6, 5, 5, AgeGroup::kUnder65, 150 + i));
  const auto flags = detect_outbreaks(Snapshot::FromVector(log), {100, 200}, {0, 100}, GridSpec{},
                                      OutbreakParams{5, 0.2});
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].count, 20u);
  EXPECT_NEAR(flags[0].mean_p, 0.6, 1e-12);
  EXPECT_NEAR(flags[0].baseline_mean_p, 0.1, 1e-12);
  EXPECT_EQ(flags[0].baseline_count, 20u);
  EXPECT_EQ(flags[0].delta, 0.2);
  EXPECT_EQ(flags[0].min_reports, 5u);
  // A larger delta suppresses the flag.
  EXPECT_TRUE(detect_outbreaks(Snapshot::FromVector(log), {100, 200}, {0, 100}, GridSpec{},
                               OutbreakParams{5, 0.6})
                  .empty());
}

TEST(Outbreaks, SupportThresholdAndEmpty) {
  std::vector<SurveillanceReport> log = {Make(1.0, 5, 5, AgeGroup::kUnder65, 150),
                                         Make(1.0, 5, 5, AgeGroup::kUnder65, 151)};
  EXPECT_TRUE(detect_outbreaks(Snapshot::FromVector(log), {100, 200}, {0, 100}, GridSpec{},
                               OutbreakParams{5, 0.2})
                  .empty());
  EXPECT_TRUE(detect_outbreaks(Snapshot{}, {100, 200}, {0, 100}, GridSpec{}).empty());
  // With no previous reports the baseline is 0.
  const auto flags = detect_outbreaks(Snapshot::FromVector(log), {100, 200}, {0, 100}, GridSpec{},
                                      OutbreakParams{2, 0.2});
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].baseline_mean_p, 0.0);
  EXPECT_EQ(flags[0].baseline_count, 0u);
}

TEST(Outbreaks, FlagsOnlyCellsMeetingBothConditions) {
  const auto log = Accepted(RandomReports(2000, 8));
  const auto snap = Snapshot::FromVector(log);
  const GridSpec g{0.02};
  const TimeWindow cur{kNow - 2 * 86400, kNow}, prev{kNow - 4 * 86400, kNow - 2 * 86400};
  const OutbreakParams params{3, 0.1};
  const auto flags = detect_outbreaks(snap, cur, prev, g, params);
  const auto now = BruteForce(log, cur, g), before = BruteForce(log, prev, g);
  std::set<CellId> expected;
  for (const auto& [cell, b] : now) {
    const double base = before.count(cell) ? Mean(before.at(cell).ps) : 0.0;
    if (b.ps.size() >= params.min_reports && Mean(b.ps) >= base + params.delta + 1e-12) expected.insert(cell);
  }
  std::set<CellId> got;
  for (const auto& f : flags) got.insert(f.cell);
  EXPECT_FALSE(expected.empty());
  for (const auto& c : expected) EXPECT_TRUE(got.count(c));
  for (const auto& f : flags) {
    EXPECT_GE(f.count, params.min_reports);
    EXPECT_GE(f.mean_p, f.baseline_mean_p + params.delta);
  }
}

TEST(Outbreaks, RejectsMismatchedWindows) {
  for (auto prev : {TimeWindow{0, 90}, TimeWindow{10, 100}, TimeWindow{0, 120}}) {
    try {
      detect_outbreaks(Snapshot{}, {100, 200}, prev, GridSpec{});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidWindow);
    }
  }
}

TEST(Heatmap, EmptyWindowHasNoFeatures) {
  const auto doc = nlohmann::json::parse(export_heatmap(Snapshot{}, {0, 10}, GridSpec{}, 0.5));
  EXPECT_EQ(doc["type"], "FeatureCollection");
  EXPECT_TRUE(doc["features"].empty());
}

TEST(Heatmap, OneCellIsItsSquare) {
  auto snap = Snapshot::FromVector({Make(0.7, 51.505, -0.115, AgeGroup::kOver65, 5)});
  const auto doc = nlohmann::json::parse(export_heatmap(snap, {0, 10}, GridSpec{}, 0.5));
  ASSERT_EQ(doc["features"].size(), 1u);
  const auto& f = doc["features"][0];
  EXPECT_EQ(f["geometry"]["type"], "Polygon");
  const auto ring = f["geometry"]["coordinates"][0];
  ASSERT_EQ(ring.size(), 5u);
  const double expect[5][2] = {{-0.12, 51.5}, {-0.11, 51.5}, {-0.11, 51.51}, {-0.12, 51.51}, {-0.12, 51.5}};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(ring[i][0].get<double>(), expect[i][0]);
    EXPECT_EQ(ring[i][1].get<double>(), expect[i][1]);
  }
  EXPECT_EQ(f["properties"]["count"], 1);
  EXPECT_EQ(f["properties"]["mean_p"], 0.7);
  EXPECT_EQ(f["properties"]["high_risk_fraction"], 1.0);
  EXPECT_EQ(f["properties"]["over65"]["count"], 1);
  EXPECT_TRUE(f["properties"]["under65"]["mean_p"].is_null());
}

TEST(Heatmap, ByteStableAndSortedByCell) {
  const auto snap = Snapshot::FromVector(Accepted(RandomReports(1000, 13)));
  const TimeWindow w{kNow - 8 * 86400, kNow + 1};
  const std::string a = export_heatmap(snap, w, GridSpec{}, 0.5);
  EXPECT_EQ(export_heatmap(snap, w, GridSpec{}, 0.5), a);
  const auto doc = nlohmann::json::parse(a);
  CellId last{-1, -1};
  for (const auto& f : doc["features"]) {
    CellId c{f["properties"]["row"].get<std::int64_t>(), f["properties"]["col"].get<std::int64_t>()};
    EXPECT_LT(last, c);
    last = c;
  }
}

TEST(Narrowcast, SelectsUidsInCells) {
  const GridSpec g;
  const CellId cell = g.CellOf(5, 5);
  auto snap = Snapshot::FromVector({Make(0.2, 5, 5, AgeGroup::kUnder65, 1),
                                    Make(0.2, 5, 5, AgeGroup::kUnder65, 2, "b"),
                                    Make(0.2, 5, 5, AgeGroup::kUnder65, 3, "a"),
                                    Make(0.2, 5, 5, AgeGroup::kUnder65, 4, "b"),
                                    Make(0.2, 6, 6, AgeGroup::kUnder65, 4, "c")});
  auto sel = select_narrowcast(snap, {cell}, {0, 10}, g);
  EXPECT_EQ(sel.uids, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(select_narrowcast(Snapshot::FromVector({Make(0.2, 5, 5, AgeGroup::kUnder65, 1)}), {cell},
                                {0, 10}, g)
                  .uids.empty());
  EXPECT_THROW(select_narrowcast(snap, {}, {0, 10}, g), Error);
  EXPECT_THROW(select_narrowcast(snap, {cell}, {10, 0}, g), Error);
}

TEST(Narrowcast, MatchesBruteForceFilter) {
  const auto log = Accepted(RandomReports(1500, 17));
  const auto snap = Snapshot::FromVector(log);
  const GridSpec g{0.02};
  const TimeWindow w{kNow - 3 * 86400, kNow - 86400};
  std::vector<CellId> cells;
  for (const auto& c : aggregate_grid(snap, w, g, 0.5)) {
    if (c.mean_p > 0.5) cells.push_back(c.cell);
  }
  ASSERT_FALSE(cells.empty());
  std::set<std::string> expected;
  for (const auto& r : log) {
    if (!r.app_uid || r.timestamp < w.start || r.timestamp >= w.end) continue;
    if (std::find(cells.begin(), cells.end(), g.CellOf(r.latitude, r.longitude)) != cells.end()) {
      expected.insert(*r.app_uid);
    }
  }
  const auto sel = select_narrowcast(snap, cells, w, g);
  EXPECT_EQ(sel.uids, std::vector<std::string>(expected.begin(), expected.end()));
}

TEST(Trajectory, OrderingAndUnknownUid) {
  auto snap = Snapshot::FromVector({Make(0.8, 1, 1, AgeGroup::kUnder65, 30, "x"),
                                    Make(0.1, 1, 1, AgeGroup::kUnder65, 10, "x"),
                                    Make(0.5, 1, 1, AgeGroup::kUnder65, 15),
                                    Make(0.4, 1, 1, AgeGroup::kUnder65, 20, "x")});
  const auto t = trajectory(snap, "x");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].timestamp, 10);
  EXPECT_EQ(t[1].timestamp, 20);
  EXPECT_EQ(t[2].timestamp, 30);
  EXPECT_TRUE(trajectory(snap, "nobody").empty());
  EXPECT_THROW(trajectory(snap, ""), Error);
}

TEST(Log, TrajectoryRoundTripsThroughTheLog) {
  TempDir dir;
  const auto path = dir.path() / kLogFileName;
  const std::vector<double> ps = {0.1, 0.4, 0.8, 1.0 / 3.0, 0.1 + 0.2};
  {
    ReportStore store(ReportStore::Options{path, false, FixedClock()});
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ASSERT_TRUE(store.ingest(Make(ps[i], 51.123456789, -0.987654321, AgeGroup::kOver65, kNow - 100 + i, "u")).accepted);
    }
  }
  ReportStore reopened(ReportStore::Options{path, false, FixedClock()});
  EXPECT_EQ(reopened.replayed(), ps.size());
  const auto t = trajectory(reopened.snapshot(), "u");
  ASSERT_EQ(t.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(t[i].p_covid, ps[i]);
    EXPECT_EQ(t[i].latitude, 51.123456789);
    EXPECT_EQ(t[i].longitude, -0.987654321);
  }
}

TEST(Log, ReplayRestoresIdenticalAggregates) {
  TempDir dir;
  const auto path = dir.path() / kLogFileName;
  const auto reports = RandomReports(3000, 23);
  const TimeWindow w{kNow - 8 * 86400, kNow + 1};
  std::string before;
  {
    ReportStore store(ReportStore::Options{path, false, FixedClock()});
    for (const auto& r : reports) store.ingest(r);
    before = export_heatmap(store.snapshot(), w, GridSpec{}, 0.5);
  }
  ReportStore reopened(ReportStore::Options{path, false, FixedClock()});
  EXPECT_EQ(export_heatmap(reopened.snapshot(), w, GridSpec{}, 0.5), before);
  // Duplicates stay deduplicated after a restart.
  for (const auto& r : reports) {
    if (r.app_uid) {
      EXPECT_TRUE(reopened.ingest(r).duplicate);
      break;
    }
  }
}

TEST(Log, DropsPartialTrailingRecord) {
  TempDir dir;
  const auto path = dir.path() / kLogFileName;
  {
    ReportStore store(ReportStore::Options{path, false, FixedClock()});
    store.ingest(Make(0.5, 1, 1, AgeGroup::kUnder65, kNow));
    store.ingest(Make(0.6, 1, 1, AgeGroup::kUnder65, kNow));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"v":1,"p":0.7,"lat":1)";
  }
  ReportStore store(ReportStore::Options{path, false, FixedClock()});
  EXPECT_EQ(store.size(), 2u);
  EXPECT_GT(store.truncated_bytes(), 0u);
  store.ingest(Make(0.8, 1, 1, AgeGroup::kUnder65, kNow));
  ReportStore again(ReportStore::Options{path, false, FixedClock()});
  EXPECT_EQ(again.size(), 3u);
  EXPECT_EQ(again.truncated_bytes(), 0u);
}

TEST(Log, CorruptRecordIsAnError) {
  TempDir dir;
  const auto path = dir.path() / kLogFileName;
  {
    std::ofstream out(path);
    out << R"({"v":1,"p":0.5,"lat":1,"lon":1,"age":"under65","ts":1})" << "\n";
    out << R"({"v":2,"p":0.5,"lat":1,"lon":1,"age":"under65","ts":1})" << "\n";
  }
  try {
    ReportStore store(ReportStore::Options{path, false, FixedClock()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig config;
    config.data_dir = dir_.path();
    config.port = 0;
    config.clock = FixedClock();
    service_ = std::make_unique<SurveillanceService>(config);
    port_ = service_->Bind();
    thread_ = std::thread([this] { service_->Run(); });
    service_->WaitUntilReady();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    service_->Stop();
    thread_.join();
  }

  httplib::Result PostJson(const std::string& path, const nlohmann::json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<SurveillanceService> service_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, ReportEndpoint) {
  auto res = PostJson("/report", {{"p_covid", 1.0}, {"latitude", 51.5}, {"longitude", -0.12},
                                  {"age_group", "over65"}, {"timestamp", kNow}, {"app_uid", "u1"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 202);
  res = PostJson("/report", {{"p_covid", 1.2}, {"latitude", 51.5}, {"longitude", -0.12},
                             {"age_group", "over65"}, {"timestamp", kNow}});
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["reason"], "probability out of range");
  res = PostJson("/report", {{"p_covid", 0.2}, {"latitude", 51.5}, {"longitude", -0.12},
                             {"age_group", "over65"}, {"timestamp", kNow + 2 * 86400}});
  EXPECT_EQ(nlohmann::json::parse(res->body)["reason"], "future timestamp");
  res = client_->Post("/report", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(service_->store().size(), 1u);
}

TEST_F(ServiceTest, HeatmapMatchesLibrary) {
  for (const auto& r : RandomReports(300, 2)) service_->store().ingest(r);
  const std::string q = "/heatmap?start=" + std::to_string(kNow - 8 * 86400) +
                        "&end=" + std::to_string(kNow + 1) + "&cell=0.02&tau=0.6";
  auto res = client_->Get(q);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, export_heatmap(service_->store().snapshot(), {kNow - 8 * 86400, kNow + 1},
                                      GridSpec{0.02}, 0.6));
  res = client_->Get(q + "&age=under65");
  EXPECT_EQ(res->body, export_heatmap(service_->store().snapshot(), {kNow - 8 * 86400, kNow + 1},
                                      GridSpec{0.02}, 0.6, AgeGroup::kUnder65));
  res = client_->Get("/heatmap?start=10&end=5");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "InvalidWindow");
  EXPECT_EQ(client_->Get("/heatmap?start=1")->status, 400);
  EXPECT_EQ(client_->Get("/heatmap?start=1&end=5&cell=-1")->status, 400);
}

TEST_F(ServiceTest, OutbreaksTrajectoryAndNarrowcast) {
  for (int i = 0; i < 10; ++i) {
    service_->store().ingest(Make(0.9, 5, 5, AgeGroup::kUnder65, kNow - 50 + i, "v" + std::to_string(i % 3)));
  }
  auto res = client_->Get("/outbreaks?start=" + std::to_string(kNow - 100) + "&end=" + std::to_string(kNow) +
                          "&min_reports=5&delta=0.5");
  ASSERT_EQ(res->status, 200);
  auto body = nlohmann::json::parse(res->body);
  ASSERT_EQ(body["flags"].size(), 1u);
  EXPECT_EQ(body["flags"][0]["count"], 10);
  EXPECT_EQ(body["previous"]["start"], kNow - 200);
  res = client_->Get("/outbreaks?start=0&end=100&prev_start=0&prev_end=50");
  EXPECT_EQ(res->status, 400);

  res = client_->Get("/trajectory/v1");
  body = nlohmann::json::parse(res->body);
  ASSERT_EQ(body["reports"].size(), 3u);
  EXPECT_LT(body["reports"][0]["timestamp"], body["reports"][1]["timestamp"]);
  EXPECT_TRUE(nlohmann::json::parse(client_->Get("/trajectory/none")->body)["reports"].empty());

  const CellId cell = GridSpec{}.CellOf(5, 5);
  res = PostJson("/narrowcast", {{"cells", {cell.str()}}, {"start", kNow - 100}, {"end", kNow}});
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["uids"], nlohmann::json({"v0", "v1", "v2"}));
  EXPECT_EQ(PostJson("/narrowcast", {{"cells", nlohmann::json::array()}, {"start", 0}, {"end", 1}})->status, 400);
}

TEST_F(ServiceTest, AssessAndVoiDelegateToTheModel) {
  const auto& model = service_->model();
  nlohmann::json body = {{"evidence", {{"fever", "present"}, {"recent_contact", "yes"}}},
                         {"symptom_duration_days", 8},
                         {"improving", "no"}};
  auto res = PostJson("/assess", body);
  ASSERT_EQ(res->status, 200);
  const auto expected = ctlab::covid::RiskReportToJson(
      ctlab::covid::assess(model, ctlab::covid::CaseInputFromJson(body)));
  EXPECT_EQ(res->body, expected.dump());

  res = PostJson("/voi", {{"evidence", {{"fever", "present"}}}});
  ASSERT_EQ(res->status, 200);
  const auto ranking = ctlab::covid::rank_questions(model, {{"fever", "present"}});
  EXPECT_EQ(nlohmann::json::parse(res->body)["ranking"],
            nlohmann::json::parse(ctlab::covid::RankingToJson(ranking).dump()));
  EXPECT_FALSE(ranking.empty());

  res = PostJson("/assess", {{"evidence", {{"fever", "maybe"}}}});
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "InvalidEvidence");
  res = PostJson("/assess", {{"evidence", {{"test_result", "positive"}, {"recent_contact", "no"}}}});
  ASSERT_EQ(res->status, 200);
  EXPECT_TRUE(nlohmann::json::parse(res->body)["contradiction"].get<bool>());
  EXPECT_EQ(client_->Get("/health")->status, 200);
}

TEST(ServiceConfigTest, BindAddress) {
  ServiceConfig c;
  c.SetBindAddress("0.0.0.0:9000");
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9000);
  c.SetBindAddress("[::1]:0");
  EXPECT_EQ(c.host, "::1");
  EXPECT_EQ(c.port, 0);
  EXPECT_THROW(c.SetBindAddress("localhost"), Error);
  EXPECT_THROW(c.SetBindAddress("localhost:http"), Error);
  EXPECT_THROW(c.SetBindAddress("localhost:70000"), Error);
}

}  // namespace
