#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fkbs/channel.hpp"
#include "fkbs/fuzzy.hpp"
#include "fkbs/rule_dsl.hpp"

namespace fkbs {

using FuzzifiedInputs = std::map<std::string, FuzzifiedValue, std::less<>>;

struct AtomDegree {
  std::string variable;
  std::string term;
  double degree = 0.0;
};

struct FiringRecord {
  int rule_id = 0;
  // min over AND, max over OR of the atom degrees.
  double strength = 0.0;
  std::vector<AtomDegree> atoms;
};

/// Antecedent strength of `cond`. Missing variables or terms raise an
/// evaluation error naming `rule_id`.
double evaluate_condition(const Condition& cond, const FuzzifiedInputs& inputs, int rule_id,
                          std::vector<AtomDegree>* atoms = nullptr);

/// One record per rule, in ascending rule id order.
std::vector<FiringRecord> fire_rules(const RuleBase& rb, const FuzzifiedInputs& inputs);

/// Continuous output variable behind one action channel. Rules asserting the
/// channel clip `assert_term`; rules denying it clip `deny_term`.
struct OutputChannel {
  Channel channel = Channel::kCallNurses;
  LinguisticVariable variable;
  std::string assert_term = "high";
  std::string deny_term = "low";
};

/// Default intensity variable on [0, 1] with shoulder terms low and high.
OutputChannel default_output_channel(Channel channel);

struct AggregatedOutput {
  std::string variable;
  // Every term of the output variable, in declaration order.
  std::vector<std::pair<std::string, double>> clipped;
  std::vector<int> contributing_rules;

  double clipped_degree(std::string_view term) const;
};

/// Min-implication / max-aggregation. Rule weights scale the strength before
/// clipping.
AggregatedOutput aggregate(const std::vector<FiringRecord>& firings, const RuleBase& rb,
                           const OutputChannel& output);

struct CrispOutput {
  std::string variable;
  double value = 0.0;
  // No term carried any mass; `value` is the universe midpoint.
  bool degenerate = false;
};

inline constexpr int kDefaultResolution = 1001;

/// Aggregated membership at `x`: max over terms of min(clip, membership).
double aggregated_membership(const AggregatedOutput& agg, const LinguisticVariable& var, double x);

/// Weighted centre of gravity over `resolution` uniform samples of the
/// universe, endpoints included.
CrispOutput defuzzify_wcog(const AggregatedOutput& agg, const LinguisticVariable& var,
                           int resolution = kDefaultResolution);

}  // namespace fkbs
