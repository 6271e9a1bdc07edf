#include "fkbs/inference.hpp"

#include <algorithm>

#include "fkbs/error.hpp"

namespace fkbs {

double evaluate_condition(const Condition& cond, const FuzzifiedInputs& inputs, int rule_id,
                          std::vector<AtomDegree>* atoms) {
  if (!cond.is_atom()) {
    const double lhs = evaluate_condition(cond.lhs(), inputs, rule_id, atoms);
    const double rhs = evaluate_condition(cond.rhs(), inputs, rule_id, atoms);
    return cond.op() == Connective::kAnd ? std::min(lhs, rhs) : std::max(lhs, rhs);
  }
  auto it = inputs.find(cond.variable());
  if (it == inputs.end()) {
    throw Error(ErrorKind::kEvaluation,
                "rule " + std::to_string(rule_id) + ": no input for variable '" + cond.variable() + "'");
  }
  const double degree = it->second.degree_of(cond.term());
  if (degree < 0.0) {
    throw Error(ErrorKind::kEvaluation, "rule " + std::to_string(rule_id) + ": variable '" + cond.variable() +
                                            "' has no term '" + cond.term() + "'");
  }
  if (atoms != nullptr) atoms->push_back(AtomDegree{cond.variable(), cond.term(), degree});
  return degree;
}

std::vector<FiringRecord> fire_rules(const RuleBase& rb, const FuzzifiedInputs& inputs) {
  std::vector<FiringRecord> out;
  out.reserve(rb.rules.size());
  for (const auto& rule : rb.rules) {
    FiringRecord rec;
    rec.rule_id = rule.id;
    rec.strength = evaluate_condition(rule.antecedent, inputs, rule.id, &rec.atoms);
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FiringRecord& a, const FiringRecord& b) { return a.rule_id < b.rule_id; });
  return out;
}

OutputChannel default_output_channel(Channel channel) {
  std::string name;
  switch (channel) {
    case Channel::kCallNurses: name = "call_nurses_intensity"; break;
    case Channel::kRecordData: name = "record_intensity"; break;
    case Channel::kSmile: name = "expression_intensity"; break;
  }
  LinguisticVariable var(std::move(name), Universe{0.0, 1.0},
                         {Term{"low", MembershipFunction::trapezoidal(0.0, 0.0, 0.0, 1.0)},
                          Term{"high", MembershipFunction::trapezoidal(0.0, 1.0, 1.0, 1.0)}});
  return OutputChannel{channel, std::move(var), "high", "low"};
}

double AggregatedOutput::clipped_degree(std::string_view term) const {
  for (const auto& [name, degree] : clipped) {
    if (name == term) return degree;
  }
  return 0.0;
}

AggregatedOutput aggregate(const std::vector<FiringRecord>& firings, const RuleBase& rb,
                           const OutputChannel& output) {
  AggregatedOutput agg;
  agg.variable = output.variable.name();
  for (const auto& term : output.variable.terms()) agg.clipped.emplace_back(term.name, 0.0);

  auto clip = [&agg](const std::string& term, double degree) {
    for (auto& [name, value] : agg.clipped) {
      if (name == term) value = std::max(value, degree);
    }
  };

  for (const auto& firing : firings) {
    const Rule* rule = rb.find_rule(firing.rule_id);
    if (rule == nullptr) {
      throw Error(ErrorKind::kEvaluation, "firing for unknown rule " + std::to_string(firing.rule_id));
    }
    const bool asserts = asserts_channel(rule->consequent, output.channel);
    const bool denies = denies_channel(rule->consequent, output.channel);
    if (!asserts && !denies) continue;
    const double degree = std::clamp(rule->weight * firing.strength, 0.0, 1.0);
    if (degree <= 0.0) continue;
    clip(asserts ? output.assert_term : output.deny_term, degree);
    agg.contributing_rules.push_back(rule->id);
  }
  return agg;
}

double aggregated_membership(const AggregatedOutput& agg, const LinguisticVariable& var, double x) {
  double mu = 0.0;
  for (std::size_t t = 0; t < var.terms().size(); ++t) {
    const double clip = agg.clipped_degree(var.terms()[t].name);
    if (clip <= 0.0) continue;
    mu = std::max(mu, std::min(clip, var.terms()[t].mf.degree(x)));
  }
  return mu;
}

CrispOutput defuzzify_wcog(const AggregatedOutput& agg, const LinguisticVariable& var, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::kConfig, "defuzzification resolution must be at least 2");

  // Resolve clip levels once instead of per sample.
  std::vector<std::pair<const MembershipFunction*, double>> active;
  for (const auto& term : var.terms()) {
    const double clip = agg.clipped_degree(term.name);
    if (clip > 0.0) active.emplace_back(&term.mf, clip);
  }

  const Universe u = var.universe();
  CrispOutput out{var.name(), u.midpoint(), true};
  if (active.empty()) return out;

  double weighted = 0.0;
  double mass = 0.0;
  const double last = static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double x = i == resolution - 1 ? u.max : u.min + u.span() * (static_cast<double>(i) / last);
    double mu = 0.0;
    for (const auto& [mf, clip] : active) mu = std::max(mu, std::min(clip, mf->degree(x)));
    weighted += x * mu;
    mass += mu;
  }
  if (mass <= 0.0) return out;
  out.value = std::clamp(weighted / mass, u.min, u.max);
  out.degenerate = false;
  return out;
}

}  // namespace fkbs
