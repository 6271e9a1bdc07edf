#include "fkbs/event_log.hpp"

#include <algorithm>
#include <sstream>

namespace fkbs {

using nlohmann::json;

namespace {

json activations_to_json(const ActivationMap& map) {
  json obj = json::object();
  for (Channel c : kChannels) obj[std::string(to_string(c))] = map[c];
  return obj;
}

// Decoding failures inside a record throw this and are turned into a
// corrupt-record diagnostic by the reader.
struct BadRecord {
  std::string message;
};

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw BadRecord{std::string("missing '") + key + "'"};
  return *it;
}

ActivationMap activations_from_json(const json& obj, const char* key) {
  const json& m = field(obj, key);
  if (!m.is_object()) throw BadRecord{std::string("'") + key + "' must be an object"};
  ActivationMap out;
  for (Channel c : kChannels) {
    const json& v = field(m, std::string(to_string(c)).c_str());
    if (!v.is_number()) throw BadRecord{std::string("'") + key + "' values must be numbers"};
    out[c] = v.get<double>();
  }
  return out;
}

BehaviorDecision decision_from_json(const json& obj) {
  if (!obj.is_object()) throw BadRecord{"'decision' must be an object"};
  BehaviorDecision d;
  const json& actions = field(obj, "actions");
  if (!actions.is_array()) throw BadRecord{"'actions' must be an array"};
  for (const auto& a : actions) {
    auto action = a.is_string() ? parse_action(a.get<std::string>()) : std::nullopt;
    if (!action) throw BadRecord{"unknown action"};
    d.actions.insert(*action);
  }
  const json& expr = field(obj, "expression");
  auto expression = expr.is_string() ? parse_expression(expr.get<std::string>()) : std::nullopt;
  if (!expression) throw BadRecord{"unknown expression"};
  d.expression = *expression;

  const json& fired = field(obj, "fired_rules");
  if (!fired.is_array()) throw BadRecord{"'fired_rules' must be an array"};
  for (const auto& f : fired) {
    if (!f.is_object()) throw BadRecord{"fired rule must be an object"};
    const json& id = field(f, "id");
    const json& strength = field(f, "strength");
    if (!id.is_number_integer() || !strength.is_number()) throw BadRecord{"malformed fired rule"};
    d.fired_rules.push_back(FiredRule{id.get<int>(), strength.get<double>()});
  }

  d.c_o = activations_from_json(obj, "c_o");
  d.x_ea = activations_from_json(obj, "x_ea");
  d.x_fkbs = activations_from_json(obj, "x_fkbs");
  d.x_p = activations_from_json(obj, "x_p");

  const json& degenerate = field(obj, "degenerate");
  if (!degenerate.is_array()) throw BadRecord{"'degenerate' must be an array"};
  for (const auto& name : degenerate) {
    auto c = name.is_string() ? parse_channel(name.get<std::string>()) : std::nullopt;
    if (!c) throw BadRecord{"unknown channel in 'degenerate'"};
    d.degenerate[*c] = true;
  }

  const json& valence = field(obj, "valence");
  if (!valence.is_number()) throw BadRecord{"'valence' must be a number"};
  d.valence = valence.get<double>();
  const json& state = field(obj, "emotion_state");
  if (!state.is_string()) throw BadRecord{"'emotion_state' must be a string"};
  d.emotion_state = state.get<std::string>();
  const json& clamped = field(obj, "clamped");
  if (!clamped.is_array()) throw BadRecord{"'clamped' must be an array"};
  for (const auto& c : clamped) {
    if (!c.is_string()) throw BadRecord{"'clamped' entries must be strings"};
    d.clamped.push_back(c.get<std::string>());
  }
  return d;
}

}  // namespace

json record_to_json(const PerceptionEvent& event, const BehaviorDecision& decision) {
  json obj = event_to_json(event);
  json d;
  json actions = json::array();
  for (Action a : decision.actions) actions.push_back(std::string(to_string(a)));
  d["actions"] = actions;
  d["expression"] = std::string(to_string(decision.expression));
  json fired = json::array();
  for (const auto& f : decision.fired_rules) fired.push_back({{"id", f.id}, {"strength", f.strength}});
  d["fired_rules"] = fired;
  d["c_o"] = activations_to_json(decision.c_o);
  d["x_ea"] = activations_to_json(decision.x_ea);
  d["x_fkbs"] = activations_to_json(decision.x_fkbs);
  d["x_p"] = activations_to_json(decision.x_p);
  json degenerate = json::array();
  for (Channel c : kChannels) {
    if (decision.degenerate[c]) degenerate.push_back(std::string(to_string(c)));
  }
  d["degenerate"] = degenerate;
  d["valence"] = decision.valence;
  d["emotion_state"] = decision.emotion_state;
  d["clamped"] = decision.clamped;
  obj["decision"] = d;
  return obj;
}

std::string record_to_line(const PerceptionEvent& event, const BehaviorDecision& decision) {
  return record_to_json(event, decision).dump() + "\n";
}

EventLog EventLog::open(const std::filesystem::path& path) {
  EventLog log;
  log.path_ = path;
  log.mutex_ = std::make_unique<std::mutex>();

  bool needs_newline = false;
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kStorage, "cannot read existing log '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    needs_newline = !text.empty() && text.back() != '\n';
    const LogReadResult existing = parse_log(text);
    log.count_ = existing.records.size();
    if (!existing.records.empty()) log.last_timestamp_ = existing.records.back().event.timestamp_ms;
  }

  log.out_.open(path, std::ios::binary | std::ios::app);
  if (!log.out_) throw Error(ErrorKind::kStorage, "cannot open log '" + path.string() + "' for appending");
  // A torn final line must not swallow the next record.
  if (needs_newline) {
    log.out_ << '\n';
    log.out_.flush();
    if (!log.out_) throw Error(ErrorKind::kStorage, "failed writing to log '" + path.string() + "'");
  }
  return log;
}

std::uint64_t EventLog::append(const PerceptionEvent& event, const BehaviorDecision& decision) {
  std::lock_guard lock(*mutex_);
  if (last_timestamp_ && event.timestamp_ms < *last_timestamp_) {
    throw Error(ErrorKind::kStorage, "log '" + path_.string() + "' already holds records up to t=" +
                                         std::to_string(*last_timestamp_) + " ms; refusing out-of-order t=" +
                                         std::to_string(event.timestamp_ms) + " ms");
  }
  out_ << record_to_line(event, decision);
  out_.flush();
  if (!out_) throw Error(ErrorKind::kStorage, "failed writing to log '" + path_.string() + "'");
  last_timestamp_ = event.timestamp_ms;
  return count_++;
}

bool LogFilter::matches(const LogRecord& record) const {
  const auto t = record.event.timestamp_ms;
  if (from_ms && t < *from_ms) return false;
  if (to_ms && t > *to_ms) return false;
  if (subject && record.event.subject_id != *subject) return false;
  return true;
}

LogReadResult parse_log(std::string_view text, const LogFilter& filter) {
  LogReadResult result;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    auto corrupt = [&](std::string message) {
      result.diagnostics.push_back({ErrorKind::kCorruptRecord, line_no, 1, std::move(message)});
    };
    json obj;
    try {
      obj = json::parse(line.begin(), line.end());
    } catch (const json::parse_error&) {
      corrupt("record is not valid JSON");
      continue;
    }
    if (!obj.is_object() || !obj.contains("decision")) {
      corrupt("record has no 'decision'");
      continue;
    }
    LogRecord record;
    try {
      record.decision = decision_from_json(obj["decision"]);
    } catch (const BadRecord& bad) {
      corrupt("decision: " + bad.message);
      continue;
    }
    obj.erase("decision");
    std::vector<Diagnostic> event_diags;
    auto event = event_from_json(obj, line_no, TraceOptions{}, event_diags);
    if (!event) {
      corrupt("event: " + event_diags.front().message);
      continue;
    }
    record.event = std::move(*event);
    record.decision.timestamp_ms = record.event.timestamp_ms;
    record.decision.subject_id = record.event.subject_id;
    if (filter.matches(record)) result.records.push_back(std::move(record));
  }
  std::stable_sort(result.records.begin(), result.records.end(), [](const LogRecord& a, const LogRecord& b) {
    return a.event.timestamp_ms < b.event.timestamp_ms;
  });
  return result;
}

LogReadResult log_read(const std::filesystem::path& path, const LogFilter& filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open log '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str(), filter);
}

}  // namespace fkbs
