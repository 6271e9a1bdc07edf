#include "fkbs/behavior.hpp"

#include <algorithm>

#include "fkbs/error.hpp"

namespace fkbs {

Engine::Engine(EngineConfig config, RuleBase rules) : config_(std::move(config)), rules_(std::move(rules)) {
  config_.validate();
  validate_rulebase(rules_);
  for (const auto& decl : rules_.variables) {
    if (decl.name != defaults::kEmotionVariable && decl.name != defaults::kSoundVariable &&
        decl.name != defaults::kHeadAngleVariable) {
      throw Error(ErrorKind::kConfig, "rule base declares variable '" + decl.name +
                                          "', but perception only feeds emotion, sound and head_angle");
    }
    const LinguisticVariable* var = nullptr;
    for (const auto& v : config_.inputs) {
      if (v.name() == decl.name) var = &v;
    }
    if (var == nullptr) {
      throw Error(ErrorKind::kConfig, "rule base declares variable '" + decl.name + "' with no definition");
    }
    for (const auto& term : decl.terms) {
      if (!var->has_term(term)) {
        throw Error(ErrorKind::kConfig,
                    "rule base declares term '" + term + "' that variable '" + decl.name + "' does not define");
      }
    }
  }
}

FuzzifiedInputs Engine::fuzzify_event(const PerceptionEvent& event) const {
  FuzzifiedInputs inputs;
  const double valence = valence_score(event.emotion_probs);
  auto add = [&](std::string_view name, double x) {
    inputs.emplace(std::string(name), config_.input(name).fuzzify(x));
  };
  add(defaults::kEmotionVariable, valence);
  add(defaults::kSoundVariable, event.sound_norm);
  add(defaults::kHeadAngleVariable, event.head_angle_deg);
  return inputs;
}

void arbitrate(const ActivationMap& c_o, const ActivationMap& thresholds, BehaviorDecision& decision) {
  decision.actions.clear();
  decision.actions.insert(Action::kRecordData);
  const bool alert = c_o[Channel::kCallNurses] >= thresholds[Channel::kCallNurses];
  if (alert) {
    decision.actions.insert(Action::kCallNurses);
    decision.actions.insert(Action::kNoAction);
  }
  const bool smile = !alert && c_o[Channel::kSmile] >= thresholds[Channel::kSmile];
  decision.expression = smile ? Expression::kSmile : Expression::kNeutral;
}

BehaviorDecision Engine::decide(const PerceptionEvent& event) const {
  validate_event(event);

  BehaviorDecision d;
  d.timestamp_ms = event.timestamp_ms;
  d.subject_id = event.subject_id;
  d.valence = valence_score(event.emotion_probs);

  const FuzzifiedInputs inputs = fuzzify_event(event);
  for (const auto& [name, value] : inputs) {
    if (value.clamped) d.clamped.push_back(name);
  }
  d.emotion_state = std::string(inputs.at(std::string(defaults::kEmotionVariable)).dominant_term());

  const auto firings = fire_rules(rules_, inputs);
  for (const auto& f : firings) {
    if (f.strength > 0.0) d.fired_rules.push_back(FiredRule{f.rule_id, f.strength});
  }

  for (Channel c : kChannels) {
    const OutputChannel& out = config_.output(c);
    const AggregatedOutput agg = aggregate(firings, rules_, out);
    const CrispOutput crisp = defuzzify_wcog(agg, out.variable, config_.resolution);
    d.degenerate[c] = crisp.degenerate;
    // A degenerate channel carries no evidence for its action.
    const Universe u = out.variable.universe();
    d.x_fkbs[c] = crisp.degenerate ? 0.0 : std::clamp((crisp.value - u.min) / u.span(), 0.0, 1.0);
  }

  d.x_ea = ea_activations(d.valence);
  d.x_p = p_activations(event, config_.input(defaults::kHeadAngleVariable));
  const CognitiveOutput fused = fuse(config_.weights, ChannelActivations{d.x_ea, d.x_fkbs, d.x_p});
  d.c_o = fused.c_o;

  arbitrate(d.c_o, config_.thresholds, d);
  return d;
}

}  // namespace fkbs
