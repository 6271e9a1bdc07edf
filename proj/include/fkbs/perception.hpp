#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fkbs/error.hpp"
#include "fkbs/fuzzy.hpp"

namespace fkbs {

/// One timestamped perception snapshot. Classifier outputs arrive pre-fused
/// into a single emotion probability vector.
struct PerceptionEvent {
  std::int64_t timestamp_ms = 0;
  std::string subject_id;
  EmotionProbs emotion_probs{};
  double sound_norm = 0.0;      // normalized amplitude, [0, 1]
  double head_angle_deg = 0.0;  // vertical head rotation, [0, 90]
  std::optional<std::string> user_action;
  std::optional<Emotion> truth_emotion;

  bool operator==(const PerceptionEvent&) const = default;
};

inline constexpr int kTraceSchemaVersion = 1;

struct TraceHeader {
  int schema_version = kTraceSchemaVersion;
  std::vector<std::string> subjects;

  bool operator==(const TraceHeader&) const = default;
};

struct Trace {
  TraceHeader header;
  std::vector<PerceptionEvent> events;

  bool operator==(const Trace&) const = default;
};

struct TraceOptions {
  // Accept and ignore unknown keys instead of rejecting them.
  bool lenient = false;
};

/// Parses line-delimited trace text: a header object followed by one event
/// object per line. Throws Error with one diagnostic per violation.
Trace parse_trace(std::string_view text, TraceOptions options = {});
Trace load_trace(const std::filesystem::path& path, TraceOptions options = {});

std::string write_trace(const Trace& trace);
void save_trace(const std::filesystem::path& path, const Trace& trace);

nlohmann::json event_to_json(const PerceptionEvent& event);

/// Decodes one event object, appending violations to `diags` (tagged with
/// `line`). Returns nullopt when the object is unusable.
std::optional<PerceptionEvent> event_from_json(const nlohmann::json& obj, int line, TraceOptions options,
                                               std::vector<Diagnostic>& diags);

/// Throws an input validation error when the event breaks a range constraint.
void validate_event(const PerceptionEvent& event);

/// Index of the most probable class; ties go to the earlier class.
Emotion argmax_emotion(const EmotionProbs& probs);

}  // namespace fkbs
