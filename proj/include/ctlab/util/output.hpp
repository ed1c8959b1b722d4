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

// Tabular command output as CSV or JSON, and atomic file writes.
//
// Doubles are printed in shortest round-trip form so CSV and JSON carry the
// same values. Non-finite doubles print as nan/inf/-inf in CSV and null in
// JSON.

#ifndef CTLAB_UTIL_OUTPUT_HPP_
#define CTLAB_UTIL_OUTPUT_HPP_

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ctlab/error.hpp"
#include "json.hpp"

namespace ctlab::util {

using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  void Add(std::vector<Value> row) {
    if (row.size() != columns.size()) {
      throw Error(ErrorCode::kInvalidParams, "row width does not match the columns");
    }
    rows.push_back(std::move(row));
  }
};

inline std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string CsvField(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return FormatDouble(d); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, v);
}

inline std::string ToCsv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += CsvField(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += CsvField(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json ValueToJson(const Value& v) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
    nlohmann::ordered_json operator()(double d) const {
      return std::isfinite(d) ? nlohmann::ordered_json(d) : nlohmann::ordered_json(nullptr);
    }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

// {"columns": [...], "rows": [{column: value, ...}, ...]}
inline nlohmann::ordered_json ToJson(const Table& t) {
  nlohmann::ordered_json j;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = ValueToJson(row[i]);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

// Flattens a JSON document into (field, value) rows; nested keys and array
// indices are joined with '.'.
inline Table FlattenJson(const nlohmann::ordered_json& doc) {
  Table t{{"field", "value"}, {}};
  auto walk = [&](auto&& self, const nlohmann::ordered_json& j, const std::string& path) -> void {
    auto key = [&](const std::string& k) { return path.empty() ? k : path + "." + k; };
    if (j.is_object()) {
      for (const auto& [k, v] : j.items()) self(self, v, key(k));
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) self(self, j[i], key(std::to_string(i)));
    } else if (j.is_boolean()) {
      t.Add({path, j.get<bool>()});
    } else if (j.is_number_integer()) {
      t.Add({path, j.get<std::int64_t>()});
    } else if (j.is_number()) {
      t.Add({path, j.get<double>()});
    } else if (j.is_string()) {
      t.Add({path, j.get<std::string>()});
    } else {
      t.Add({path, std::numeric_limits<double>::quiet_NaN()});
    }
  };
  walk(walk, doc, "");
  return t;
}

// Writes `content` to a temporary file next to `path`, syncs it and renames
// it over `path`, so readers see either the old or the new file.
inline void WriteFileAtomic(const std::filesystem::path& path, const std::string& content) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kIoError, what + " " + path.string() + ": " + std::strerror(errno));
  };
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::string tmpl = (dir / ("." + path.filename().string() + ".XXXXXX")).string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) fail("cannot create a temporary file for");
  std::size_t done = 0;
  while (done < content.size()) {
    const ssize_t n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(tmpl.c_str());
      fail("cannot write");
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fchmod(fd, 0644) != 0 || ::fsync(fd) != 0) {
    ::close(fd);
    ::unlink(tmpl.c_str());
    fail("cannot sync");
  }
  ::close(fd);
  if (::rename(tmpl.c_str(), path.c_str()) != 0) {
    ::unlink(tmpl.c_str());
    fail("cannot rename into");
  }
}

}  // namespace ctlab::util

#endif  // CTLAB_UTIL_OUTPUT_HPP_
