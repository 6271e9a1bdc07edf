#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fkbs/behavior.hpp"
#include "fkbs/config.hpp"
#include "fkbs/error.hpp"
#include "fkbs/evaluation.hpp"
#include "fkbs/event_log.hpp"
#include "fkbs/perception.hpp"
#include "fkbs/rule_dsl.hpp"

namespace fkbs::cli {

namespace {

constexpr const char* kDefaultLogPath = "fkbs_decisions.jsonl";

struct EngineOptions {
  std::string config_path;
  std::string rules_path;
  std::string weights;
  std::optional<double> threshold;
  std::optional<int> resolution;
};

struct SimulateOptions {
  EngineOptions engine;
  std::string trace_path;
  std::string log_path;
  bool lenient = false;
  bool deterministic = false;
  int parallel = 1;
};

struct ReportOptions {
  std::string log_path;
  std::optional<std::string> subject;
  std::optional<std::int64_t> from_ms;
  std::optional<std::int64_t> to_ms;
};

struct EvalOptions {
  std::string trace_path;
  std::string predictions_path;
  std::string fixture_path;
  bool lenient = false;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kSyntax:
    case ErrorKind::kSemantic: return kExitConfig;
    default: return kExitData;
  }
}

void print_error(std::ostream& err, const std::string& source, const Error& e) {
  for (const auto& d : e.diagnostics()) {
    err << (source.empty() ? "fkbs" : source) << ':' << d.to_string() << '\n';
  }
}

std::string read_file(const std::string& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kind, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

AppraisalWeights parse_weights(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error(ErrorKind::kConfig, "--weights expects three numbers 'w_ea,w_fkbs,w_p'");
    }
    values.push_back(v);
  }
  if (values.size() != 3) throw Error(ErrorKind::kConfig, "--weights expects three numbers 'w_ea,w_fkbs,w_p'");
  return AppraisalWeights::make(values[0], values[1], values[2]);
}

// Config errors carry the file they came from in `source`.
struct LoadedEngine {
  EngineConfig config;
  RuleBase rules;
};

LoadedEngine load_engine(const EngineOptions& opts, std::string& source) {
  source = opts.config_path;
  EngineConfig config = opts.config_path.empty() ? EngineConfig::defaults() : load_config(opts.config_path);
  source = "--weights";
  if (!opts.weights.empty()) config.weights = parse_weights(opts.weights);
  source = "fkbs";
  if (opts.threshold) {
    for (Channel c : kChannels) config.thresholds[c] = *opts.threshold;
  }
  if (opts.resolution) config.resolution = *opts.resolution;
  config.validate();

  RuleBase rules;
  if (!opts.rules_path.empty() || config.rules_path) {
    source = !opts.rules_path.empty() ? opts.rules_path : config.rules_path->string();
    rules = parse_rulebase(read_file(source, ErrorKind::kConfig));
  } else {
    rules = default_rulebase();
  }
  source = "fkbs";
  return LoadedEngine{std::move(config), std::move(rules)};
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string join_actions(const std::set<Action>& actions) {
  std::string out;
  for (Action a : actions) {
    if (!out.empty()) out += ',';
    out += to_string(a);
  }
  return out;
}

// Decides every event, using `workers` threads; results keep trace order.
std::vector<std::pair<std::optional<BehaviorDecision>, std::exception_ptr>> decide_all(
    const Engine& engine, const std::vector<PerceptionEvent>& events, int workers) {
  std::vector<std::pair<std::optional<BehaviorDecision>, std::exception_ptr>> results(events.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < events.size(); i += stride) {
      try {
        results[i].first = engine.decide(events[i]);
      } catch (...) {
        results[i].second = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::thread> threads;
  const auto n = static_cast<std::size_t>(workers);
  for (std::size_t w = 0; w < n; ++w) threads.emplace_back(work, w, n);
  for (auto& t : threads) t.join();
  return results;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  std::string source;
  std::optional<Engine> engine;
  try {
    LoadedEngine loaded = load_engine(opts.engine, source);
    engine.emplace(std::move(loaded.config), std::move(loaded.rules));
  } catch (const Error& e) {
    print_error(err, source, e);
    return kExitConfig;
  }

  Trace trace;
  try {
    trace = load_trace(opts.trace_path, TraceOptions{opts.lenient});
  } catch (const Error& e) {
    print_error(err, opts.trace_path, e);
    return kExitData;
  }

  std::string log_path = opts.log_path;
  if (log_path.empty()) {
    log_path = engine->config().log_path ? engine->config().log_path->string() : kDefaultLogPath;
  }

  std::optional<EventLog> log;
  try {
    log.emplace(EventLog::open(log_path));
  } catch (const Error& e) {
    print_error(err, log_path, e);
    return kExitData;
  }

  const auto results = decide_all(*engine, trace.events, std::max(1, opts.parallel));
  std::size_t alerts = 0;
  std::map<std::string, std::size_t> expressions{{"neutral", 0}, {"smile", 0}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [decision, failure] = results[i];
    try {
      if (failure) std::rethrow_exception(failure);
      log->append(trace.events[i], *decision);
    } catch (const Error& e) {
      print_error(err, opts.trace_path, e);
      err << "stopped at event " << i + 1 << " of " << results.size() << "; earlier decisions are logged\n";
      return kExitData;
    }
    if (decision->has(Action::kCallNurses)) {
      ++alerts;
      err << "ALERT t=" << decision->timestamp_ms << "ms subject=" << decision->subject_id
          << " call_nurses (emotion " << decision->emotion_state << ")\n";
    }
    ++expressions[std::string(to_string(decision->expression))];
  }

  out << "fkbs simulate\n";
  if (!opts.deterministic) out << "started: " << iso_now() << '\n';
  out << "events: " << results.size() << '\n';
  out << "alerts: " << alerts << '\n';
  out << "expressions:";
  for (const auto& [name, count] : expressions) out << ' ' << name << '=' << count;
  out << '\n';
  out << "log: " << log_path << '\n';
  if (!opts.deterministic) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    out << "elapsed: " << elapsed.count() << " ms\n";
  }
  return kExitOk;
}

int cmd_check(const EngineOptions& opts, std::ostream& out, std::ostream& err) {
  std::string source = opts.rules_path;
  try {
    LoadedEngine loaded = load_engine(opts, source);
    source = opts.rules_path;
    // Cross-check against the configuration as well.
    Engine engine(std::move(loaded.config), loaded.rules);
    out << serialize_rulebase(loaded.rules);
  } catch (const Error& e) {
    print_error(err, source, e);
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  const std::string& source = opts.fixture_path.empty() ? opts.trace_path : opts.fixture_path;
  try {
    if (!opts.fixture_path.empty()) {
      out << render_table(report_from_percentages(load_percentage_table(opts.fixture_path)));
      return kExitOk;
    }
    const Trace trace = load_trace(opts.trace_path, TraceOptions{opts.lenient});
    std::vector<std::string> predictions;
    if (!opts.predictions_path.empty()) {
      std::istringstream in(read_file(opts.predictions_path, ErrorKind::kIo));
      std::string line;
      while (std::getline(in, line)) {
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (!line.empty()) predictions.push_back(line);
      }
      if (predictions.size() != trace.events.size()) {
        throw Error(ErrorKind::kSchema, "predictions file has " + std::to_string(predictions.size()) +
                                            " labels for " + std::to_string(trace.events.size()) + " events");
      }
    }
    ConfusionMatrix cm = ConfusionMatrix::emotions();
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& ev = trace.events[i];
      if (!ev.truth_emotion) {
        ++skipped;
        continue;
      }
      const std::string predicted =
          predictions.empty() ? std::string(to_string(argmax_emotion(ev.emotion_probs))) : predictions[i];
      cm.accumulate(to_string(*ev.truth_emotion), predicted);
    }
    AccuracyReport rep = report(cm);
    rep.title = "Emotion recognition accuracy (%)";
    out << render_table(rep);
    out << "samples: " << cm.total() << " (skipped " << skipped << " without truth_emotion)\n";
  } catch (const Error& e) {
    print_error(err, source, e);
    return exit_code_for(e.kind()) == kExitConfig ? kExitConfig : kExitData;
  }
  return kExitOk;
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  LogReadResult result;
  try {
    LogFilter filter{opts.from_ms, opts.to_ms, opts.subject};
    result = log_read(opts.log_path, filter);
  } catch (const Error& e) {
    print_error(err, opts.log_path, e);
    return kExitData;
  }
  for (const auto& d : result.diagnostics) err << opts.log_path << ':' << d.to_string() << '\n';

  std::map<std::string, std::vector<const LogRecord*>> by_subject;
  for (const auto& r : result.records) by_subject[r.event.subject_id].push_back(&r);

  std::size_t total_alerts = 0;
  for (const auto& [subject, records] : by_subject) {
    std::size_t alerts = 0;
    std::map<std::string, std::size_t> states;
    std::map<std::string, std::size_t> expressions;
    for (const auto* r : records) {
      alerts += r->decision.has(Action::kCallNurses) ? 1 : 0;
      ++states[r->decision.emotion_state];
      ++expressions[std::string(to_string(r->decision.expression))];
    }
    total_alerts += alerts;
    out << "subject " << subject << ": " << records.size() << " decisions, " << alerts << " alerts\n";
    out << "  emotion states:";
    for (const auto& [state, n] : states) out << ' ' << state << '=' << n;
    out << "\n  expressions:";
    for (const auto& [expr, n] : expressions) out << ' ' << expr << '=' << n;
    out << '\n';
    for (const auto* r : records) {
      const auto& d = r->decision;
      out << "  t=" << d.timestamp_ms << "ms  emotion=" << d.emotion_state << " (valence " << std::fixed
          << std::setprecision(2) << d.valence << std::defaultfloat << ")  actions=" << join_actions(d.actions)
          << "  expression=" << to_string(d.expression);
      if (d.has(Action::kCallNurses)) out << "  ALERT";
      out << '\n';
    }
  }
  out << "total: " << result.records.size() << " decisions, " << total_alerts << " alerts, "
      << by_subject.size() << " subjects\n";
  return result.diagnostics.empty() ? kExitOk : kExitData;
}

void add_engine_options(CLI::App* cmd, EngineOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Engine configuration (JSON)");
  cmd->add_option("--rules", opts.rules_path, "Rule file; defaults to the embedded rule base");
  cmd->add_option("--weights", opts.weights, "Appraisal weights w_ea,w_fkbs,w_p");
  cmd->add_option("--threshold", opts.threshold, "Activation threshold applied to every channel");
  cmd->add_option("--resolution", opts.resolution, "Defuzzification sample count");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuzzy knowledge-based behavior engine for patient-monitoring robots", "fkbs"};
  app.require_subcommand(1);

  SimulateOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Decide and log a behavior for every event of a trace");
  sim->add_option("--trace", sim_opts.trace_path, "Perception trace (JSON lines)")->required();
  add_engine_options(sim, sim_opts.engine);
  sim->add_option("--log", sim_opts.log_path, "Decision log to append to");
  sim->add_flag("--lenient", sim_opts.lenient, "Ignore unknown keys in the trace");
  sim->add_flag("--deterministic", sim_opts.deterministic, "Omit wall-clock fields from the output");
  sim->add_option("--parallel", sim_opts.parallel, "Worker threads for deciding events")
      ->check(CLI::Range(1, 256));

  EngineOptions check_opts;
  auto* check = app.add_subcommand("check", "Parse and validate a rule file, print its canonical form");
  add_engine_options(check, check_opts);
  check->add_option("rule_file", check_opts.rules_path, "Rule file (same as --rules)");

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Render an accuracy table from a labelled trace or a fixture");
  auto* eval_trace = eval->add_option("--trace", eval_opts.trace_path, "Trace with truth_emotion labels");
  eval->add_option("--predictions", eval_opts.predictions_path,
                   "One predicted label per event; defaults to the argmax of emotion_probs")
      ->needs(eval_trace);
  auto* eval_fixture = eval->add_option("--fixture", eval_opts.fixture_path, "Percentage table (TSV)");
  eval_trace->excludes(eval_fixture);
  eval->add_flag("--lenient", eval_opts.lenient, "Ignore unknown keys in the trace");

  ReportOptions report_opts;
  auto* report_cmd = app.add_subcommand("report", "Per-subject emotion timeline and alert summary from a log");
  report_cmd->add_option("--log", report_opts.log_path, "Decision log")->required();
  report_cmd->add_option("--subject", report_opts.subject, "Only this subject");
  report_cmd->add_option("--from", report_opts.from_ms, "Earliest timestamp (ms, inclusive)");
  report_cmd->add_option("--to", report_opts.to_ms, "Latest timestamp (ms, inclusive)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("fkbs");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (eval->parsed() && eval_opts.trace_path.empty() && eval_opts.fixture_path.empty()) {
      throw CLI::RequiredError("eval needs --trace or --fixture");
    }
    if (check->parsed() && check_opts.rules_path.empty()) {
      throw CLI::RequiredError("check needs a rule file");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (sim->parsed()) return cmd_simulate(sim_opts, out, err);
  if (check->parsed()) return cmd_check(check_opts, out, err);
  if (eval->parsed()) return cmd_eval(eval_opts, out, err);
  return cmd_report(report_opts, out, err);
}

}  // namespace fkbs::cli
