#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "fkbs/behavior.hpp"
#include "fkbs/error.hpp"
#include "fkbs/event_log.hpp"
#include "support.hpp"

using namespace fkbs;

namespace {

const std::set<Action> kAlert{Action::kNoAction, Action::kCallNurses, Action::kRecordData};
const std::set<Action> kRecord{Action::kRecordData};

const Engine& engine() {
  static const Engine e(EngineConfig::defaults(), default_rulebase());
  return e;
}

PerceptionEvent event(EmotionProbs probs, double sound, double head, std::int64_t t = 0,
                      const std::string& subject = "p1") {
  PerceptionEvent e;
  e.timestamp_ms = t;
  e.subject_id = subject;
  e.emotion_probs = probs;
  e.sound_norm = sound;
  e.head_angle_deg = head;
  return e;
}

EmotionProbs random_probs(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.7, 1.0);
  EmotionProbs p{};
  double sum = 0;
  for (double& v : p) sum += (v = g(rng));
  for (double& v : p) v /= sum;
  return p;
}

PerceptionEvent random_event(std::mt19937_64& rng, std::int64_t t) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return event(random_probs(rng), u(rng), 90 * u(rng), t, u(rng) < 0.5 ? "p1" : "p2");
}

}  // namespace

TEST(Decide, AngerCallsTheNurses) {
  const auto d = engine().decide(event({0.9, 0.02, 0.02, 0.02, 0.02, 0.02}, 0.5, 0));
  EXPECT_EQ(d.actions, kAlert);
  EXPECT_EQ(d.expression, Expression::kNeutral);
  EXPECT_EQ(d.emotion_state, "negative");
}

TEST(Decide, NeutralValenceOnlyRecords) {
  const auto d = engine().decide(event({0.1, 0.5, 0.1, 0.1, 0.1, 0.1}, 0.5, 0));
  EXPECT_NEAR(d.valence, 0.0, 1e-12);
  EXPECT_EQ(d.actions, kRecord);
  EXPECT_EQ(d.expression, Expression::kNeutral);
  EXPECT_EQ(d.emotion_state, "neutral");
}

TEST(Decide, HappinessSmiles) {
  const auto d = engine().decide(event({0.01, 0.95, 0.01, 0.01, 0.01, 0.01}, 0.5, 0));
  EXPECT_EQ(d.actions, kRecord);
  EXPECT_EQ(d.expression, Expression::kSmile);
  EXPECT_EQ(d.emotion_state, "positive");
}

TEST(Decide, ReportsEveryIntermediateQuantity) {
  const auto d = engine().decide(event({1, 0, 0, 0, 0, 0}, 0.5, 0, 42, "p9"));
  EXPECT_EQ(d.timestamp_ms, 42);
  EXPECT_EQ(d.subject_id, "p9");
  EXPECT_EQ(d.valence, -1.0);
  EXPECT_EQ(d.x_ea[Channel::kCallNurses], 1.0);
  EXPECT_DOUBLE_EQ(d.x_p[Channel::kCallNurses], 0.5);
  EXPECT_TRUE(d.degenerate[Channel::kSmile]);
  EXPECT_EQ(d.x_fkbs[Channel::kSmile], 0.0);
  ASSERT_FALSE(d.fired_rules.empty());
  EXPECT_EQ(d.fired_rules.front(), (FiredRule{1, 1.0}));
  const auto w = AppraisalWeights::defaults();
  for (Channel c : kChannels) {
    EXPECT_NEAR(d.c_o[c], w.ea() * d.x_ea[c] + w.fkbs() * d.x_fkbs[c] + w.p() * d.x_p[c], 1e-15);
  }
}

TEST(Decide, RejectsInvalidEvents) {
  EXPECT_THROW(engine().decide(event({0.5, 0, 0, 0, 0, 0}, 0.5, 0)), Error);
  EXPECT_THROW(engine().decide(event({1, 0, 0, 0, 0, 0}, std::nan(""), 0)), Error);
}

TEST(Decide, OutOfUniverseInputsAreClampedAndRecorded) {
  const auto d = engine().decide(event({1, 0, 0, 0, 0, 0}, 1.5, -3));
  EXPECT_EQ(d.clamped, (std::vector<std::string>{"head_angle", "sound"}));
  const auto ref = engine().decide(event({1, 0, 0, 0, 0, 0}, 1.0, 0));
  EXPECT_EQ(d.c_o, ref.c_o);
  EXPECT_TRUE(engine().decide(event({1, 0, 0, 0, 0, 0}, 0.5, 0)).clamped.empty());
}

TEST(Decide, InvariantsOnRandomEvents) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const auto d = engine().decide(random_event(rng, i));
    ASSERT_TRUE(d.has(Action::kRecordData));
    ASSERT_EQ(d.has(Action::kCallNurses), d.has(Action::kNoAction));
    if (d.has(Action::kCallNurses)) ASSERT_EQ(d.expression, Expression::kNeutral);
    for (Channel c : kChannels) {
      ASSERT_GE(d.c_o[c], 0.0);
      ASSERT_LE(d.c_o[c], 1.0);
    }
  }
}

TEST(Decide, Deterministic) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    const auto e = random_event(rng, i);
    ASSERT_EQ(engine().decide(e), engine().decide(e));
  }
}

TEST(Decide, MoreAngerNeverCancelsAnAlert) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    auto e = random_event(rng, 0);
    bool alert = engine().decide(e).has(Action::kCallNurses);
    for (int step = 0; step < 5; ++step) {
      const double delta = u(rng);
      for (double& p : e.emotion_probs) p /= (1.0 + delta);
      e.emotion_probs[0] += delta / (1.0 + delta);
      const bool now = engine().decide(e).has(Action::kCallNurses);
      ASSERT_TRUE(!alert || now) << "event " << i << " step " << step;
      alert = now;
    }
  }
}

TEST(Decide, ThresholdsAreConfigurable) {
  EngineConfig cfg = EngineConfig::defaults();
  cfg.thresholds[Channel::kCallNurses] = 0.99;
  const Engine strict(cfg, default_rulebase());
  const auto e = event({0.9, 0.02, 0.02, 0.02, 0.02, 0.02}, 0.5, 0);
  EXPECT_FALSE(strict.decide(e).has(Action::kCallNurses));
  EXPECT_TRUE(engine().decide(e).has(Action::kCallNurses));
}

TEST(Engine, RejectsRulesTheConfigCannotFeed) {
  const RuleBase rb = parse_rulebase("VAR sound: low, quiet\nRULE 1: IF sound IS quiet THEN record_data\n");
  EXPECT_THROW(Engine(EngineConfig::defaults(), rb), Error);
  const RuleBase other = parse_rulebase("VAR pulse: low\nRULE 1: IF pulse IS low THEN record_data\n");
  EXPECT_THROW(Engine(EngineConfig::defaults(), other), Error);
}

TEST(Engine, ConcurrentDecisionsMatchSerialOnes) {
  std::mt19937_64 rng(34);
  std::vector<PerceptionEvent> events;
  for (int i = 0; i < 400; ++i) events.push_back(random_event(rng, i));
  std::vector<BehaviorDecision> serial;
  for (const auto& e : events) serial.push_back(engine().decide(e));
  std::vector<BehaviorDecision> parallel(events.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < 4; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < events.size(); i += 4) parallel[i] = engine().decide(events[i]);
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(parallel, serial);
}

TEST(Arbitrate, AlertSuppressesSmile) {
  BehaviorDecision d;
  arbitrate(ActivationMap{{0.7, 0.1, 0.9}}, ActivationMap{{0.5, 0.5, 0.5}}, d);
  EXPECT_EQ(d.actions, kAlert);
  EXPECT_EQ(d.expression, Expression::kNeutral);
  arbitrate(ActivationMap{{0.2, 0.1, 0.9}}, ActivationMap{{0.5, 0.5, 0.5}}, d);
  EXPECT_EQ(d.actions, kRecord);
  EXPECT_EQ(d.expression, Expression::kSmile);
  arbitrate(ActivationMap{{0.5, 0.1, 0.5}}, ActivationMap{{0.5, 0.5, 0.5}}, d);
  EXPECT_EQ(d.actions, kAlert);
}

TEST(EventLog, AppendThenReadBack) {
  testkit::TempDir dir("log");
  std::mt19937_64 rng(35);
  std::vector<LogRecord> written;
  {
    auto log = EventLog::open(dir / "d.jsonl");
    for (int i = 0; i < 20; ++i) {
      const auto e = random_event(rng, i * 10);
      const auto d = engine().decide(e);
      EXPECT_EQ(log.append(e, d), static_cast<std::uint64_t>(i));
      written.push_back({e, d});
    }
    EXPECT_EQ(log.size(), 20u);
    EXPECT_EQ(log.last_timestamp(), 190);
  }
  const auto read = log_read(dir / "d.jsonl");
  EXPECT_TRUE(read.diagnostics.empty());
  EXPECT_EQ(read.records, written);
}

TEST(EventLog, ReopenContinuesAndRefusesOlderTimestamps) {
  testkit::TempDir dir("log");
  const auto e1 = event({1, 0, 0, 0, 0, 0}, 0.5, 0, 100);
  {
    auto log = EventLog::open(dir / "d.jsonl");
    log.append(e1, engine().decide(e1));
  }
  auto log = EventLog::open(dir / "d.jsonl");
  EXPECT_EQ(log.size(), 1u);
  const auto early = event({1, 0, 0, 0, 0, 0}, 0.5, 0, 50);
  try {
    log.append(early, engine().decide(early));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kStorage);
  }
  const auto same = event({0, 1, 0, 0, 0, 0}, 0.5, 0, 100);
  EXPECT_EQ(log.append(same, engine().decide(same)), 1u);
}

TEST(EventLog, CorruptLinesAreReportedAndSkipped) {
  testkit::TempDir dir("log");
  const auto e1 = event({1, 0, 0, 0, 0, 0}, 0.5, 0, 1);
  const auto e2 = event({0, 1, 0, 0, 0, 0}, 0.5, 0, 2);
  const std::string text = record_to_line(e1, engine().decide(e1)) + "{\"truncated\": \n" + "[1,2,3]\n" +
                           record_to_line(e2, engine().decide(e2));
  testkit::write_text(dir / "d.jsonl", text);
  const auto read = log_read(dir / "d.jsonl");
  ASSERT_EQ(read.records.size(), 2u);
  ASSERT_EQ(read.diagnostics.size(), 2u);
  EXPECT_EQ(read.diagnostics[0].line, 2);
  EXPECT_EQ(read.diagnostics[1].line, 3);
  EXPECT_EQ(read.diagnostics[0].kind, ErrorKind::kCorruptRecord);
}

TEST(EventLog, TornFinalLineDoesNotSwallowTheNextRecord) {
  testkit::TempDir dir("log");
  const auto e1 = event({1, 0, 0, 0, 0, 0}, 0.5, 0, 1);
  const std::string line = record_to_line(e1, engine().decide(e1));
  testkit::write_text(dir / "d.jsonl", line + line.substr(0, line.size() / 2));
  {
    auto log = EventLog::open(dir / "d.jsonl");
    EXPECT_EQ(log.size(), 1u);
    const auto e2 = event({0, 1, 0, 0, 0, 0}, 0.5, 0, 2);
    log.append(e2, engine().decide(e2));
  }
  const auto read = log_read(dir / "d.jsonl");
  EXPECT_EQ(read.records.size(), 2u);
  EXPECT_EQ(read.diagnostics.size(), 1u);
}

TEST(EventLog, FiltersByTimeAndSubject) {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    const auto e = event({1, 0, 0, 0, 0, 0}, 0.5, 0, i * 100, i % 2 ? "odd" : "even");
    text += record_to_line(e, engine().decide(e));
  }
  EXPECT_EQ(parse_log(text).records.size(), 10u);
  EXPECT_EQ(parse_log(text, LogFilter{200, 500, std::nullopt}).records.size(), 4u);
  const auto odd = parse_log(text, LogFilter{std::nullopt, std::nullopt, "odd"});
  ASSERT_EQ(odd.records.size(), 5u);
  for (const auto& r : odd.records) EXPECT_EQ(r.event.subject_id, "odd");
  EXPECT_EQ(parse_log(text, LogFilter{300, 300, "odd"}).records.size(), 1u);
}

TEST(EventLog, ConcurrentAppendsKeepEveryRecord) {
  testkit::TempDir dir("log");
  auto log = EventLog::open(dir / "d.jsonl");
  const auto e = event({1, 0, 0, 0, 0, 0}, 0.5, 0, 7);
  const auto d = engine().decide(e);
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) log.append(e, d);
    });
  }
  for (auto& t : threads) t.join();
  const auto read = log_read(dir / "d.jsonl");
  EXPECT_EQ(read.records.size(), 200u);
  EXPECT_TRUE(read.diagnostics.empty());
}

TEST(EventLog, MissingFileIsIoError) {
  try {
    log_read("/nonexistent/log.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
