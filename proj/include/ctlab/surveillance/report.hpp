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

// Surveillance reports: the minimal (probability, location, age group)
// triple plus a timestamp and an optional opaque app uid.

#ifndef CTLAB_SURVEILLANCE_REPORT_HPP_
#define CTLAB_SURVEILLANCE_REPORT_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

namespace ctlab::surveillance {

enum class AgeGroup { kUnder65, kOver65 };

inline const char* AgeGroupName(AgeGroup a) {
  return a == AgeGroup::kUnder65 ? "under65" : "over65";
}

inline std::optional<AgeGroup> ParseAgeGroup(const std::string& s) {
  if (s == "under65") return AgeGroup::kUnder65;
  if (s == "over65") return AgeGroup::kOver65;
  return std::nullopt;
}

inline constexpr std::size_t kMaxUidLength = 64;
inline constexpr std::int64_t kMaxClockSkewSeconds = 24 * 3600;
inline constexpr int kLogSchemaVersion = 1;

struct SurveillanceReport {
  double p_covid = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
  AgeGroup age_group = AgeGroup::kUnder65;
  // UTC seconds since the epoch.
  std::int64_t timestamp = 0;
  std::optional<std::string> app_uid;

  bool operator==(const SurveillanceReport&) const = default;
};

// Seconds since the epoch; injectable so tests control "now".
using Clock = std::function<std::int64_t()>;

inline std::int64_t SystemNow() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Empty when the report is valid, otherwise the rejection reason. The
// timestamp guard is skipped when `now` is not given.
inline std::string ValidateReport(const SurveillanceReport& r,
                                  std::optional<std::int64_t> now = std::nullopt) {
  if (!(r.p_covid >= 0.0 && r.p_covid <= 1.0)) return "probability out of range";
  if (!(r.latitude >= -90.0 && r.latitude <= 90.0) ||
      !(r.longitude >= -180.0 && r.longitude <= 180.0)) {
    return "bad coordinates";
  }
  if (r.app_uid && (r.app_uid->empty() || r.app_uid->size() > kMaxUidLength)) return "bad uid";
  if (now && r.timestamp > *now + kMaxClockSkewSeconds) return "future timestamp";
  return {};
}

// Outcome of decoding a JSON body: either a report or a rejection reason.
struct DecodedReport {
  std::optional<SurveillanceReport> report;
  std::string reason;
};

// Accepts the wire names p_covid/latitude/longitude/age_group/timestamp/
// app_uid and the short log names p/lat/lon/age/ts/uid.
inline DecodedReport ReportFromJson(const nlohmann::json& j) {
  DecodedReport out;
  if (!j.is_object()) {
    out.reason = "malformed report";
    return out;
  }
  auto field = [&](const char* wire, const char* log) -> const nlohmann::json* {
    if (auto it = j.find(wire); it != j.end()) return &*it;
    if (auto it = j.find(log); it != j.end()) return &*it;
    return nullptr;
  };
  const auto* p = field("p_covid", "p");
  const auto* lat = field("latitude", "lat");
  const auto* lon = field("longitude", "lon");
  const auto* age = field("age_group", "age");
  const auto* ts = field("timestamp", "ts");
  const auto* uid = field("app_uid", "uid");
  SurveillanceReport r;
  if (!p || !p->is_number()) {
    out.reason = p ? "probability out of range" : "missing p_covid";
    return out;
  }
  r.p_covid = p->get<double>();
  if (!lat || !lon || !lat->is_number() || !lon->is_number()) {
    out.reason = "bad coordinates";
    return out;
  }
  r.latitude = lat->get<double>();
  r.longitude = lon->get<double>();
  if (!age || !age->is_string() || !ParseAgeGroup(age->get<std::string>())) {
    out.reason = "bad age group";
    return out;
  }
  r.age_group = *ParseAgeGroup(age->get<std::string>());
  if (!ts || !ts->is_number_integer()) {
    out.reason = "bad timestamp";
    return out;
  }
  r.timestamp = ts->get<std::int64_t>();
  if (uid && !uid->is_null()) {
    if (!uid->is_string()) {
      out.reason = "bad uid";
      return out;
    }
    r.app_uid = uid->get<std::string>();
  }
  out.report = std::move(r);
  return out;
}

// One log line (without the newline). Doubles print in shortest
// round-trip form, so replay restores every value exactly.
inline std::string ReportToLogLine(const SurveillanceReport& r) {
  nlohmann::ordered_json j;
  j["v"] = kLogSchemaVersion;
  j["p"] = r.p_covid;
  j["lat"] = r.latitude;
  j["lon"] = r.longitude;
  j["age"] = AgeGroupName(r.age_group);
  j["ts"] = r.timestamp;
  if (r.app_uid) j["uid"] = *r.app_uid;
  return j.dump();
}

inline nlohmann::ordered_json ReportToJson(const SurveillanceReport& r) {
  nlohmann::ordered_json j;
  j["p_covid"] = r.p_covid;
  j["latitude"] = r.latitude;
  j["longitude"] = r.longitude;
  j["age_group"] = AgeGroupName(r.age_group);
  j["timestamp"] = r.timestamp;
  if (r.app_uid) j["app_uid"] = *r.app_uid;
  return j;
}

}  // namespace ctlab::surveillance

#endif  // CTLAB_SURVEILLANCE_REPORT_HPP_
