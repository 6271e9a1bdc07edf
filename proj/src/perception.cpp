#include "fkbs/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fkbs {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kEventKeys = {"timestamp",      "subject_id",  "emotion_probs",
                                                        "sound_norm",     "head_angle_deg",
                                                        "user_action",    "truth_emotion"};
constexpr std::array<std::string_view, 2> kHeaderKeys = {"schema_version", "subjects"};

template <std::size_t N>
bool known_key(const std::array<std::string_view, N>& keys, const std::string& key) {
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

struct LineSink {
  int line;
  std::vector<Diagnostic>& diags;

  void schema(std::string message) { diags.push_back({ErrorKind::kSchema, line, 0, std::move(message)}); }
  void range(std::string message) { diags.push_back({ErrorKind::kRange, line, 0, std::move(message)}); }
};

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::optional<double> number_field(const json& obj, const char* key, LineSink& sink) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    sink.schema(std::string("missing field '") + key + "'");
    return std::nullopt;
  }
  if (!it->is_number()) {
    sink.schema(std::string("field '") + key + "' must be a number");
    return std::nullopt;
  }
  return it->get<double>();
}

std::optional<json> parse_json_line(std::string_view line, LineSink& sink) {
  try {
    return json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    const int column = e.byte > 0 ? static_cast<int>(std::min<std::size_t>(e.byte, line.size() + 1)) : 0;
    sink.diags.push_back({ErrorKind::kSchema, sink.line, column, "malformed record (invalid JSON)"});
  }
  return std::nullopt;
}

std::optional<TraceHeader> header_from_json(const json& obj, TraceOptions options, LineSink& sink) {
  if (!obj.is_object()) {
    sink.schema("header must be an object");
    return std::nullopt;
  }
  const std::size_t before = sink.diags.size();
  TraceHeader header;
  if (!options.lenient) {
    for (const auto& [key, value] : obj.items()) {
      if (!known_key(kHeaderKeys, key)) sink.schema("unknown header key '" + key + "'");
    }
  }
  auto version = obj.find("schema_version");
  if (version == obj.end() || !version->is_number_integer()) {
    sink.schema("header field 'schema_version' must be an integer");
  } else if (version->get<std::int64_t>() != kTraceSchemaVersion) {
    sink.schema("unsupported schema version " + version->dump());
  }
  auto subjects = obj.find("subjects");
  if (subjects == obj.end() || !subjects->is_array()) {
    sink.schema("header field 'subjects' must be an array of strings");
  } else {
    std::set<std::string> seen;
    for (const auto& s : *subjects) {
      if (!s.is_string() || s.get<std::string>().empty()) {
        sink.schema("subject ids must be non-empty strings");
        continue;
      }
      if (!seen.insert(s.get<std::string>()).second) sink.schema("duplicate subject '" + s.get<std::string>() + "'");
      header.subjects.push_back(s.get<std::string>());
    }
  }
  if (sink.diags.size() != before) return std::nullopt;
  return header;
}

}  // namespace

json event_to_json(const PerceptionEvent& event) {
  json obj;
  obj["timestamp"] = event.timestamp_ms;
  obj["subject_id"] = event.subject_id;
  obj["emotion_probs"] = event.emotion_probs;
  obj["sound_norm"] = event.sound_norm;
  obj["head_angle_deg"] = event.head_angle_deg;
  if (event.user_action) obj["user_action"] = *event.user_action;
  if (event.truth_emotion) obj["truth_emotion"] = std::string(to_string(*event.truth_emotion));
  return obj;
}

std::optional<PerceptionEvent> event_from_json(const json& obj, int line, TraceOptions options,
                                               std::vector<Diagnostic>& diags) {
  LineSink sink{line, diags};
  if (!obj.is_object()) {
    sink.schema("event must be an object");
    return std::nullopt;
  }
  const std::size_t before = diags.size();
  PerceptionEvent ev;
  if (!options.lenient) {
    for (const auto& [key, value] : obj.items()) {
      if (!known_key(kEventKeys, key)) sink.schema("unknown key '" + key + "'");
    }
  }

  if (auto it = obj.find("timestamp"); it == obj.end()) {
    sink.schema("missing field 'timestamp'");
  } else if (!it->is_number_integer()) {
    sink.schema("field 'timestamp' must be an integer (milliseconds)");
  } else if (it->is_number_unsigned() && it->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    sink.range("timestamp too large");
  } else {
    ev.timestamp_ms = it->get<std::int64_t>();
    if (ev.timestamp_ms < 0) sink.range("timestamp must be >= 0");
  }

  if (auto it = obj.find("subject_id"); it == obj.end()) {
    sink.schema("missing field 'subject_id'");
  } else if (!it->is_string() || it->get<std::string>().empty()) {
    sink.schema("field 'subject_id' must be a non-empty string");
  } else {
    ev.subject_id = it->get<std::string>();
  }

  if (auto it = obj.find("emotion_probs"); it == obj.end()) {
    sink.schema("missing field 'emotion_probs'");
  } else if (!it->is_array() || it->size() != kEmotionCount ||
             !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_number(); })) {
    sink.schema("field 'emotion_probs' must be an array of 6 numbers");
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      ev.emotion_probs[i] = (*it)[i].get<double>();
      sum += ev.emotion_probs[i];
      if (ev.emotion_probs[i] < 0.0) {
        sink.range("probability of " + std::string(kEmotionNames[i]) + " is negative");
      }
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
      sink.range("emotion_probs sum to " + fmt(sum) + ", expected 1");
    }
  }

  if (auto v = number_field(obj, "sound_norm", sink)) {
    ev.sound_norm = *v;
    if (!(*v >= 0.0 && *v <= 1.0)) sink.range("sound_norm " + fmt(*v) + " outside [0, 1]");
  }
  if (auto v = number_field(obj, "head_angle_deg", sink)) {
    ev.head_angle_deg = *v;
    if (!(*v >= 0.0 && *v <= 90.0)) sink.range("head_angle_deg " + fmt(*v) + " outside [0, 90]");
  }

  if (auto it = obj.find("user_action"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      sink.schema("field 'user_action' must be a string");
    } else {
      ev.user_action = it->get<std::string>();
    }
  }
  if (auto it = obj.find("truth_emotion"); it != obj.end() && !it->is_null()) {
    Emotion e{};
    if (!it->is_string() || !parse_emotion(it->get<std::string>(), e)) {
      sink.schema("field 'truth_emotion' must be one of anger, happiness, sadness, surprise, disgust, fear");
    } else {
      ev.truth_emotion = e;
    }
  }

  if (diags.size() != before) return std::nullopt;
  return ev;
}

Trace parse_trace(std::string_view text, TraceOptions options) {
  std::vector<Diagnostic> diags;
  Trace trace;
  bool have_header = false;
  bool header_ok = false;
  std::set<std::string, std::less<>> roster;
  std::optional<std::int64_t> last_timestamp;

  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    LineSink sink{line_no, diags};
    auto obj = parse_json_line(line, sink);
    if (!have_header) {
      have_header = true;
      if (!obj) continue;
      if (auto header = header_from_json(*obj, options, sink)) {
        trace.header = std::move(*header);
        roster.insert(trace.header.subjects.begin(), trace.header.subjects.end());
        header_ok = true;
      }
      continue;
    }
    if (!obj) continue;
    auto ev = event_from_json(*obj, line_no, options, diags);
    if (!ev) continue;
    if (header_ok && !roster.contains(ev->subject_id)) {
      sink.schema("subject '" + ev->subject_id + "' is not listed in the header");
      continue;
    }
    if (last_timestamp && ev->timestamp_ms < *last_timestamp) {
      sink.range("timestamp " + std::to_string(ev->timestamp_ms) + " is earlier than the previous event (" +
                 std::to_string(*last_timestamp) + ")");
    }
    last_timestamp = ev->timestamp_ms;
    trace.events.push_back(std::move(*ev));
  }

  if (!have_header) {
    diags.push_back({ErrorKind::kSchema, std::max(line_no, 1), 1, "empty trace: no header line"});
  } else if (trace.events.empty() && diags.empty()) {
    diags.push_back({ErrorKind::kSchema, line_no, 1, "empty trace: no events"});
  }
  if (!diags.empty()) throw Error(std::move(diags));
  return trace;
}

Trace load_trace(const std::filesystem::path& path, TraceOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open trace '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "failed reading trace '" + path.string() + "'");
  return parse_trace(buf.str(), options);
}

std::string write_trace(const Trace& trace) {
  std::string out;
  json header;
  header["schema_version"] = trace.header.schema_version;
  header["subjects"] = trace.header.subjects;
  out += header.dump();
  out += '\n';
  for (const auto& ev : trace.events) {
    out += event_to_json(ev).dump();
    out += '\n';
  }
  return out;
}

void save_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write trace '" + path.string() + "'");
  out << write_trace(trace);
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "failed writing trace '" + path.string() + "'");
}

void validate_event(const PerceptionEvent& event) {
  validate_emotion_probs(event.emotion_probs);
  if (!std::isfinite(event.sound_norm) || !std::isfinite(event.head_angle_deg)) {
    throw Error(ErrorKind::kInputValidation, "event has non-finite sensor values");
  }
  if (event.subject_id.empty()) throw Error(ErrorKind::kInputValidation, "event has no subject id");
}

Emotion argmax_emotion(const EmotionProbs& probs) {
  const auto it = std::max_element(probs.begin(), probs.end());
  return static_cast<Emotion>(std::distance(probs.begin(), it));
}

}  // namespace fkbs
