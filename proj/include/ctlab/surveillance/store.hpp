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

// Durable report storage: an append-only newline-delimited JSON log and an
// in-memory index that readers see through immutable snapshots.

#ifndef CTLAB_SURVEILLANCE_STORE_HPP_
#define CTLAB_SURVEILLANCE_STORE_HPP_

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/error.hpp"
#include "ctlab/surveillance/report.hpp"
#include "json.hpp"

namespace ctlab::surveillance {

// Append-only record log. Each record is written with a single write() so a
// crash can leave at most one partial trailing line, which Open() drops.
class ReportLog {
 public:
  ReportLog() = default;
  ReportLog(const ReportLog&) = delete;
  ReportLog& operator=(const ReportLog&) = delete;
  ~ReportLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  // Opens (creating if needed) the log and returns every complete record.
  std::vector<SurveillanceReport> Open(const std::filesystem::path& path, bool sync = false) {
    sync_ = sync;
    path_ = path;
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) Fail("cannot open");

    std::string data;
    char buf[1 << 16];
    for (;;) {
      const ssize_t n = ::pread(fd_, buf, sizeof(buf), static_cast<off_t>(data.size()));
      if (n < 0) {
        if (errno == EINTR) continue;
        Fail("cannot read");
      }
      if (n == 0) break;
      data.append(buf, static_cast<std::size_t>(n));
    }
    const std::size_t keep = data.rfind('\n') == std::string::npos ? 0 : data.rfind('\n') + 1;
    if (keep < data.size()) {
      truncated_bytes_ = data.size() - keep;
      if (::ftruncate(fd_, static_cast<off_t>(keep)) != 0) Fail("cannot truncate");
      data.resize(keep);
    }

    std::vector<SurveillanceReport> out;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < data.size();) {
      const std::size_t nl = data.find('\n', pos);
      const std::string_view line(data.data() + pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) Corrupt(line_no, "not a JSON object");
      if (j.value("v", 0) != kLogSchemaVersion) Corrupt(line_no, "unsupported schema version");
      auto decoded = ReportFromJson(j);
      if (!decoded.report) Corrupt(line_no, decoded.reason);
      if (auto why = ValidateReport(*decoded.report); !why.empty()) Corrupt(line_no, why);
      out.push_back(std::move(*decoded.report));
    }
    return out;
  }

  bool is_open() const { return fd_ >= 0; }
  std::size_t truncated_bytes() const { return truncated_bytes_; }
  const std::filesystem::path& path() const { return path_; }

  void Append(const SurveillanceReport& r) {
    const std::string line = ReportToLogLine(r) + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        Fail("cannot append to");
      }
      done += static_cast<std::size_t>(n);
    }
    if (sync_ && ::fsync(fd_) != 0) Fail("cannot sync");
  }

 private:
  [[noreturn]] void Fail(const char* what) const {
    throw Error(ErrorCode::kIoError,
                std::string(what) + " " + path_.string() + ": " + std::strerror(errno));
  }
  [[noreturn]] void Corrupt(std::size_t line, const std::string& why) const {
    throw Error(ErrorCode::kIoError,
                path_.string() + " line " + std::to_string(line) + ": " + why);
  }

  int fd_ = -1;
  bool sync_ = false;
  std::size_t truncated_bytes_ = 0;
  std::filesystem::path path_;
};

// Immutable view of the first `size()` ingested reports. Records live in
// fixed-capacity chunks that never move, so a snapshot stays valid while
// later records are appended behind it.
class Snapshot {
 public:
  static constexpr std::size_t kChunk = 4096;
  struct Chunk {
    std::unique_ptr<SurveillanceReport[]> items = std::make_unique<SurveillanceReport[]>(kChunk);
  };
  using ChunkList = std::vector<std::shared_ptr<Chunk>>;

  Snapshot() : chunks_(std::make_shared<const ChunkList>()) {}
  Snapshot(std::shared_ptr<const ChunkList> chunks, std::size_t size)
      : chunks_(std::move(chunks)), size_(size) {}

  static Snapshot FromVector(const std::vector<SurveillanceReport>& reports) {
    auto chunks = std::make_shared<ChunkList>();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i % kChunk == 0) chunks->push_back(std::make_shared<Chunk>());
      chunks->back()->items[i % kChunk] = reports[i];
    }
    return Snapshot(std::move(chunks), reports.size());
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const SurveillanceReport& operator[](std::size_t i) const {
    return (*chunks_)[i / kChunk]->items[i % kChunk];
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < size_; ++i) fn((*this)[i]);
  }

  std::vector<SurveillanceReport> to_vector() const {
    std::vector<SurveillanceReport> out;
    out.reserve(size_);
    for_each([&](const SurveillanceReport& r) { out.push_back(r); });
    return out;
  }

 private:
  std::shared_ptr<const ChunkList> chunks_;
  std::size_t size_ = 0;
};

struct IngestResult {
  bool accepted = false;
  // Accepted but already present under the same (uid, timestamp).
  bool duplicate = false;
  std::string reason;
};

// Thread-safe report index. Appends are serialized by a writer lock; readers
// only take a short lock to copy the latest published snapshot, so queries
// never wait for a log write.
class ReportStore {
 public:
  struct Options {
    // Log location; empty keeps the store in memory only.
    std::filesystem::path log_path;
    bool sync = false;
    Clock clock = SystemNow;
  };

  ReportStore() : ReportStore(Options{}) {}
  explicit ReportStore(Options options) : clock_(std::move(options.clock)) {
    chunks_ = std::make_shared<Snapshot::ChunkList>();
    if (!options.log_path.empty()) {
      log_ = std::make_unique<ReportLog>();
      for (auto& r : log_->Open(options.log_path, options.sync)) {
        if (IsDuplicate(r)) continue;
        Insert(std::move(r));
        ++replayed_;
      }
      Publish();
    }
  }
  ReportStore(const ReportStore&) = delete;
  ReportStore& operator=(const ReportStore&) = delete;

  IngestResult ingest(const SurveillanceReport& r) {
    IngestResult out;
    const std::int64_t now = clock_ ? clock_() : SystemNow();
    if (auto why = ValidateReport(r, now); !why.empty()) {
      out.reason = why;
      return out;
    }
    std::lock_guard<std::mutex> lock(write_mutex_);
    out.accepted = true;
    if (IsDuplicate(r)) {
      out.duplicate = true;
      return out;
    }
    if (log_) log_->Append(r);
    Insert(r);
    Publish();
    return out;
  }

  Snapshot snapshot() const {
    std::lock_guard<std::mutex> lock(snapshot_mutex_);
    return published_;
  }

  std::size_t size() const { return snapshot().size(); }
  // Records restored from the log when the store was opened.
  std::size_t replayed() const { return replayed_; }
  std::size_t truncated_bytes() const { return log_ ? log_->truncated_bytes() : 0; }

 private:
  bool IsDuplicate(const SurveillanceReport& r) {
    if (!r.app_uid) return false;
    return !seen_.emplace(*r.app_uid, r.timestamp).second;
  }

  // Caller holds the writer lock (or is the constructor).
  void Insert(SurveillanceReport r) {
    if (count_ % Snapshot::kChunk == 0) {
      auto next = std::make_shared<Snapshot::ChunkList>(*chunks_);
      next->push_back(std::make_shared<Snapshot::Chunk>());
      chunks_ = std::move(next);
    }
    chunks_->back()->items[count_ % Snapshot::kChunk] = std::move(r);
    ++count_;
  }

  void Publish() {
    Snapshot s(chunks_, count_);
    std::lock_guard<std::mutex> lock(snapshot_mutex_);
    published_ = std::move(s);
  }

  Clock clock_;
  std::unique_ptr<ReportLog> log_;
  std::mutex write_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<Snapshot::ChunkList> chunks_;
  std::size_t count_ = 0;
  std::size_t replayed_ = 0;
  std::set<std::pair<std::string, std::int64_t>> seen_;
  Snapshot published_;
};

}  // namespace ctlab::surveillance

#endif  // CTLAB_SURVEILLANCE_STORE_HPP_
