#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkbs/behavior.hpp"
#include "fkbs/error.hpp"
#include "fkbs/perception.hpp"

namespace fkbs {

struct LogRecord {
  PerceptionEvent event;
  BehaviorDecision decision;
  bool operator==(const LogRecord&) const = default;
};

/// Event fields at the top level, decision under "decision".
nlohmann::json record_to_json(const PerceptionEvent& event, const BehaviorDecision& decision);
std::string record_to_line(const PerceptionEvent& event, const BehaviorDecision& decision);

/// Append-only line-delimited decision log. Appends are serialized by an
/// internal mutex and must arrive in non-decreasing timestamp order; each
/// record is flushed before append returns.
class EventLog {
 public:
  /// Opens (creating if needed) the log at `path`. Existing records are kept
  /// and later appends continue after the last timestamp already stored.
  static EventLog open(const std::filesystem::path& path);

  EventLog(EventLog&&) noexcept = default;
  EventLog& operator=(EventLog&&) noexcept = default;

  /// Returns the zero-based index of the record just written. Throws a
  /// storage error on write failure or an out-of-order timestamp.
  std::uint64_t append(const PerceptionEvent& event, const BehaviorDecision& decision);

  const std::filesystem::path& path() const { return path_; }
  std::uint64_t size() const { return count_; }
  std::optional<std::int64_t> last_timestamp() const { return last_timestamp_; }

 private:
  EventLog() = default;

  std::filesystem::path path_;
  std::unique_ptr<std::mutex> mutex_;
  std::ofstream out_;
  std::uint64_t count_ = 0;
  std::optional<std::int64_t> last_timestamp_;
};

struct LogFilter {
  std::optional<std::int64_t> from_ms;  // inclusive
  std::optional<std::int64_t> to_ms;    // inclusive
  std::optional<std::string> subject;

  bool matches(const LogRecord& record) const;
};

struct LogReadResult {
  // Filtered, in timestamp order.
  std::vector<LogRecord> records;
  // One entry per unreadable line; the rest of the file is still read.
  std::vector<Diagnostic> diagnostics;
};

/// Throws an I/O error when the file cannot be opened.
LogReadResult log_read(const std::filesystem::path& path, const LogFilter& filter = {});
LogReadResult parse_log(std::string_view text, const LogFilter& filter = {});

}  // namespace fkbs
