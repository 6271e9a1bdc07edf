#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fkbs/appraisal.hpp"
#include "fkbs/config.hpp"
#include "fkbs/inference.hpp"
#include "fkbs/perception.hpp"
#include "fkbs/rule_dsl.hpp"

namespace fkbs {

struct FiredRule {
  int id = 0;
  double strength = 0.0;
  bool operator==(const FiredRule&) const = default;
};

/// Outcome of one pass through the pipeline for one perception event.
struct BehaviorDecision {
  std::int64_t timestamp_ms = 0;
  std::string subject_id;
  std::set<Action> actions;
  Expression expression = Expression::kNeutral;
  // Rules with non-zero strength, ascending id.
  std::vector<FiredRule> fired_rules;
  ActivationMap c_o;
  ActivationMap x_ea;
  ActivationMap x_fkbs;
  ActivationMap x_p;
  // Channels whose aggregated output carried no mass.
  ChannelMap<bool> degenerate;
  double valence = 0.0;
  std::string emotion_state;
  // Input variables whose crisp value was clamped into the universe.
  std::vector<std::string> clamped;

  bool has(Action a) const { return actions.contains(a); }
  bool operator==(const BehaviorDecision&) const = default;
};

/// Validated configuration plus rule base. Immutable, so one engine can serve
/// concurrent `decide` calls.
class Engine {
 public:
  /// Throws a config error when the rule base references a variable or term
  /// the configuration does not define.
  Engine(EngineConfig config, RuleBase rules);

  /// Fuzzify, fire rules, defuzzify each channel, fuse with the emotion and
  /// perception channels, threshold, then arbitrate.
  BehaviorDecision decide(const PerceptionEvent& event) const;

  /// The inputs `decide` feeds to the rule base for `event`.
  FuzzifiedInputs fuzzify_event(const PerceptionEvent& event) const;

  const EngineConfig& config() const { return config_; }
  const RuleBase& rules() const { return rules_; }

 private:
  EngineConfig config_;
  RuleBase rules_;
};

/// Turns fused activations into actions and an expression. record_data is
/// always present; call_nurses brings no_action along and suppresses smile.
void arbitrate(const ActivationMap& c_o, const ActivationMap& thresholds, BehaviorDecision& decision);

}  // namespace fkbs
