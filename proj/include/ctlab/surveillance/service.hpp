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

// HTTP front end for the surveillance store and the diagnostic model.
//
//   POST /report             report JSON; 202 accepted, 400 {reason}
//   GET  /heatmap            start, end, [cell, tau, age]; GeoJSON
//   GET  /outbreaks          start, end, [cell, min_reports, delta,
//                            prev_start, prev_end]
//   GET  /trajectory/{uid}   the uid's reports by time
//   POST /narrowcast         {cells, start, end, [cell]}
//   POST /assess             case JSON; risk report
//   POST /voi                {evidence}; question ranking
//   GET  /health
//   GET  /ui/...             static files from CTLAB_UI_DIR, when set

#ifndef CTLAB_SURVEILLANCE_SERVICE_HPP_
#define CTLAB_SURVEILLANCE_SERVICE_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/covid/model.hpp"
#include "ctlab/covid/model_json.hpp"
#include "ctlab/error.hpp"
#include "ctlab/surveillance/grid.hpp"
#include "ctlab/surveillance/report.hpp"
#include "ctlab/surveillance/store.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ctlab::surveillance {

inline constexpr const char* kLogFileName = "reports.ndjson";

struct ServiceConfig {
  std::filesystem::path data_dir = "ctlab-data";
  std::string model_path = covid::kDefaultModelPath;
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 8080;
  std::filesystem::path ui_dir;
  bool sync_log = false;
  GridSpec grid;
  double tau = 0.5;
  OutbreakParams outbreak;
  Clock clock = SystemNow;

  // Applies CTLAB_DATA_DIR, CTLAB_MODEL_PATH, CTLAB_BIND_ADDR (host:port)
  // and CTLAB_UI_DIR when they are set.
  void ApplyEnvironment() {
    if (const char* v = std::getenv("CTLAB_DATA_DIR"); v && *v) data_dir = v;
    if (const char* v = std::getenv("CTLAB_MODEL_PATH"); v && *v) model_path = v;
    if (const char* v = std::getenv("CTLAB_UI_DIR"); v && *v) ui_dir = v;
    if (const char* v = std::getenv("CTLAB_BIND_ADDR"); v && *v) SetBindAddress(v);
  }

  void SetBindAddress(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidParams, "bind address must be host:port, got '" + addr + "'");
    }
    std::size_t used = 0;
    int p = -1;
    try {
      p = std::stoi(addr.substr(colon + 1), &used);
    } catch (const std::exception&) {
    }
    if (used != addr.size() - colon - 1 || p < 0 || p > 65535) {
      throw Error(ErrorCode::kInvalidParams, "bad port in bind address '" + addr + "'");
    }
    host = addr.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    port = p;
  }
};

class SurveillanceService {
 public:
  explicit SurveillanceService(ServiceConfig config)
      : config_(std::move(config)),
        model_(covid::load_model(config_.model_path)),
        store_(ReportStore::Options{config_.data_dir / kLogFileName, config_.sync_log, config_.clock}) {
    config_.grid.Validate();
    detail::CheckTau(config_.tau);
    Routes();
  }

  ReportStore& store() { return store_; }
  const covid::CovidModel& model() const { return model_; }
  const ServiceConfig& config() const { return config_; }
  httplib::Server& server() { return server_; }

  // Binds the configured address and returns the bound port.
  int Bind() {
    int port = config_.port;
    if (port == 0) {
      port = server_.bind_to_any_port(config_.host);
    } else if (!server_.bind_to_port(config_.host, port)) {
      port = -1;
    }
    if (port < 0) {
      throw Error(ErrorCode::kIoError,
                  "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    bound_port_ = port;
    return port;
  }
  int port() const { return bound_port_; }

  // Blocks until Stop().
  bool Run() { return server_.listen_after_bind(); }
  void Stop() { server_.stop(); }
  void WaitUntilReady() { server_.wait_until_ready(); }

 private:
  using Json = nlohmann::ordered_json;

  static void Send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void SendError(httplib::Response& res, const Error& e) {
    Json j;
    j["error"] = std::string(ErrorCodeName(e.code()));
    j["detail"] = e.detail();
    Send(res, e.code() == ErrorCode::kIoError ? 500 : 400, j);
  }

  // Runs a handler, mapping module errors and malformed input to JSON errors.
  template <typename Fn>
  static httplib::Server::Handler Guard(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        SendError(res, e);
      } catch (const nlohmann::json::exception& e) {
        SendError(res, Error(ErrorCode::kParseError, e.what()));
      }
    };
  }

  static nlohmann::json ParseBody(const httplib::Request& req) {
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kParseError, "request body is not valid JSON");
    return j;
  }

  static std::optional<std::string> Param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  }

  static std::int64_t IntParam(const httplib::Request& req, const char* name, ErrorCode code) {
    auto v = Param(req, name);
    if (!v) throw Error(code, std::string("missing parameter '") + name + "'");
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(*v, &used);
    } catch (const std::exception&) {
    }
    if (v->empty() || used != v->size()) {
      throw Error(code, std::string("parameter '") + name + "' must be an integer");
    }
    return x;
  }

  static double DoubleParam(const httplib::Request& req, const char* name, double fallback) {
    auto v = Param(req, name);
    if (!v) return fallback;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(*v, &used);
    } catch (const std::exception&) {
    }
    if (v->empty() || used != v->size()) {
      throw Error(ErrorCode::kInvalidParams, std::string("parameter '") + name + "' must be a number");
    }
    return x;
  }

  static TimeWindow WindowParams(const httplib::Request& req, const char* start = "start",
                                 const char* end = "end") {
    TimeWindow w{IntParam(req, start, ErrorCode::kInvalidWindow),
                 IntParam(req, end, ErrorCode::kInvalidWindow)};
    w.Validate();
    return w;
  }

  GridSpec GridParam(const httplib::Request& req) const {
    GridSpec g{DoubleParam(req, "cell", config_.grid.cell_size)};
    g.Validate();
    return g;
  }

  static std::optional<AgeGroup> AgeParam(const httplib::Request& req) {
    auto v = Param(req, "age");
    if (!v || v->empty()) return std::nullopt;
    auto a = ParseAgeGroup(*v);
    if (!a) throw Error(ErrorCode::kInvalidParams, "age must be under65 or over65");
    return a;
  }

  void Routes() {
    // Small request/response pairs stall on delayed ACKs otherwise.
    server_.set_tcp_nodelay(true);
    server_.Post("/report", Guard([this](const httplib::Request& req, httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      DecodedReport decoded =
          j.is_discarded() ? DecodedReport{std::nullopt, "malformed report"} : ReportFromJson(j);
      IngestResult r;
      if (decoded.report) {
        r = store_.ingest(*decoded.report);
      } else {
        r.reason = decoded.reason;
      }
      Json body;
      if (r.accepted) {
        body["status"] = "accepted";
        body["duplicate"] = r.duplicate;
        Send(res, 202, body);
      } else {
        body["status"] = "rejected";
        body["reason"] = r.reason;
        Send(res, 400, body);
      }
    }));

    server_.Get("/heatmap", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const TimeWindow w = WindowParams(req);
      const GridSpec g = GridParam(req);
      const double tau = DoubleParam(req, "tau", config_.tau);
      const auto age = AgeParam(req);
      res.status = 200;
      res.set_content(export_heatmap(store_.snapshot(), w, g, tau, age), "application/geo+json");
    }));

    server_.Get("/outbreaks", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const TimeWindow w = WindowParams(req);
      TimeWindow prev{w.start - w.length(), w.start};
      if (req.has_param("prev_start") || req.has_param("prev_end")) {
        prev = WindowParams(req, "prev_start", "prev_end");
      }
      const GridSpec g = GridParam(req);
      OutbreakParams p = config_.outbreak;
      if (req.has_param("min_reports")) {
        const auto m = IntParam(req, "min_reports", ErrorCode::kInvalidParams);
        if (m < 0) throw Error(ErrorCode::kInvalidParams, "min_reports must be >= 0");
        p.min_reports = static_cast<std::size_t>(m);
      }
      p.delta = DoubleParam(req, "delta", p.delta);
      Json body;
      body["window"] = WindowJson(w);
      body["previous"] = WindowJson(prev);
      body["cell_size"] = g.cell_size;
      body["min_reports"] = p.min_reports;
      body["delta"] = p.delta;
      auto flags = Json::array();
      for (const auto& f : detect_outbreaks(store_.snapshot(), w, prev, g, p)) {
        flags.push_back(OutbreakToJson(f));
      }
      body["flags"] = std::move(flags);
      Send(res, 200, body);
    }));

    server_.Get(R"(/trajectory/(.+))", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const std::string uid = req.matches[1];
      Json body;
      body["uid"] = uid;
      auto reports = Json::array();
      for (const auto& r : trajectory(store_.snapshot(), uid)) reports.push_back(ReportToJson(r));
      body["reports"] = std::move(reports);
      Send(res, 200, body);
    }));

    server_.Post("/narrowcast", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto j = ParseBody(req);
      if (!j.is_object()) throw Error(ErrorCode::kParseError, "body must be an object");
      std::vector<CellId> cells;
      for (const auto& c : j.value("cells", nlohmann::json::array())) {
        std::optional<CellId> id;
        if (c.is_string()) id = ParseCellId(c.get<std::string>());
        if (c.is_object()) id = CellId{c.at("row").get<std::int64_t>(), c.at("col").get<std::int64_t>()};
        if (!id) throw Error(ErrorCode::kInvalidParams, "cells must be \"row:col\" or {row, col}");
        cells.push_back(*id);
      }
      if (!j.contains("start") || !j.contains("end")) {
        throw Error(ErrorCode::kInvalidWindow, "start and end are required");
      }
      const TimeWindow w{j.at("start").get<std::int64_t>(), j.at("end").get<std::int64_t>()};
      GridSpec g{j.value("cell", config_.grid.cell_size)};
      Send(res, 200, NarrowcastToJson(select_narrowcast(store_.snapshot(), cells, w, g)));
    }));

    server_.Post("/assess", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto j = ParseBody(req);
      const covid::CaseInput c = covid::CaseInputFromJson(j);
      const covid::AlertPolicy policy = covid::AlertPolicyFromJson(j.value("policy", nlohmann::json()));
      std::size_t top_k = 3;
      if (j.contains("top_k")) {
        const auto k = j.at("top_k").get<std::int64_t>();
        if (k < 0) throw Error(ErrorCode::kInvalidParams, "top_k must be >= 0");
        top_k = static_cast<std::size_t>(k);
      }
      Send(res, 200, covid::RiskReportToJson(covid::assess(model_, c, policy, top_k)));
    }));

    server_.Post("/voi", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto j = ParseBody(req);
      if (!j.is_object()) throw Error(ErrorCode::kParseError, "body must be an object");
      const auto ev = covid::EvidenceFromJson(j.contains("evidence") ? j["evidence"] : j);
      Json body;
      body["target"] = covid::kTarget;
      body["ranking"] = covid::RankingToJson(covid::rank_questions(model_, ev));
      Send(res, 200, body);
    }));

    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      Json body;
      body["status"] = "ok";
      body["reports"] = store_.size();
      Send(res, 200, body);
    });

    if (!config_.ui_dir.empty()) server_.set_mount_point("/ui", config_.ui_dir.string());
  }

  ServiceConfig config_;
  covid::CovidModel model_;
  ReportStore store_;
  httplib::Server server_;
  int bound_port_ = -1;
};

}  // namespace ctlab::surveillance

#endif  // CTLAB_SURVEILLANCE_SERVICE_HPP_
