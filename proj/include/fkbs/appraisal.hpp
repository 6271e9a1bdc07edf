#pragma once

#include "fkbs/channel.hpp"
#include "fkbs/fuzzy.hpp"
#include "fkbs/perception.hpp"

namespace fkbs {

inline constexpr double kWeightSumTolerance = 1e-9;

/// Channel weights for cognitive appraisal fusion. Always valid once built:
/// each weight non-negative and the three summing to one.
class AppraisalWeights {
 public:
  /// Throws a config error on a negative or non-finite weight, or when the
  /// sum deviates from 1 by more than kWeightSumTolerance.
  static AppraisalWeights make(double ea, double fkbs, double p);
  /// 0.25 emotion appraisal, 0.5 fuzzy knowledge base, 0.25 perception.
  static AppraisalWeights defaults();

  double ea() const { return ea_; }
  double fkbs() const { return fkbs_; }
  double p() const { return p_; }

  bool operator==(const AppraisalWeights&) const = default;

 private:
  AppraisalWeights(double ea, double fkbs, double p) : ea_(ea), fkbs_(fkbs), p_(p) {}
  double ea_;
  double fkbs_;
  double p_;
};

struct ChannelActivations {
  ActivationMap ea;
  ActivationMap fkbs;
  ActivationMap p;
};

/// Throws an input validation error unless every activation is in [0, 1].
void validate_activations(const ChannelActivations& acts);

struct CognitiveOutput {
  ActivationMap c_o;
  AppraisalWeights weights = AppraisalWeights::defaults();
  ChannelActivations inputs;
};

/// Per channel: c_o = w_ea * x_ea + w_fkbs * x_fkbs + w_p * x_p.
CognitiveOutput fuse(const AppraisalWeights& weights, const ChannelActivations& acts);

/// call_nurses = max(0, -valence), smile = max(0, valence), record_data = 1.
ActivationMap ea_activations(double valence);

/// call_nurses = max(1 - sound, 1 - head_normalcy), smile = 0, record_data = 1.
ActivationMap p_activations(double sound_norm, double head_normalcy);

/// Head normalcy is the event's membership in the head variable's `normal` term.
ActivationMap p_activations(const PerceptionEvent& event, const LinguisticVariable& head_angle);

}  // namespace fkbs
