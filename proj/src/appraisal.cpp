#include "fkbs/appraisal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fkbs/error.hpp"

namespace fkbs {

AppraisalWeights AppraisalWeights::make(double ea, double fkbs, double p) {
  for (double w : {ea, fkbs, p}) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
      throw Error(ErrorKind::kConfig, "appraisal weights must lie in [0, 1]");
    }
  }
  const double sum = ea + fkbs + p;
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "appraisal weights must sum to 1 (got " << sum << ")";
    throw Error(ErrorKind::kConfig, msg.str());
  }
  return AppraisalWeights(ea, fkbs, p);
}

AppraisalWeights AppraisalWeights::defaults() { return AppraisalWeights(0.25, 0.5, 0.25); }

void validate_activations(const ChannelActivations& acts) {
  for (const ActivationMap* map : {&acts.ea, &acts.fkbs, &acts.p}) {
    for (double v : map->values) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::kInputValidation, "activation outside [0, 1]");
    }
  }
}

CognitiveOutput fuse(const AppraisalWeights& weights, const ChannelActivations& acts) {
  validate_activations(acts);
  CognitiveOutput out{ActivationMap{}, weights, acts};
  for (Channel c : kChannels) {
    const double x_ea = acts.ea[c];
    const double x_fkbs = acts.fkbs[c];
    const double x_p = acts.p[c];
    const double fused = weights.ea() * x_ea + weights.fkbs() * x_fkbs + weights.p() * x_p;
    // Rounding can step one ulp outside the inputs' hull.
    out.c_o[c] = std::clamp(fused, std::min({x_ea, x_fkbs, x_p}), std::max({x_ea, x_fkbs, x_p}));
  }
  return out;
}

ActivationMap ea_activations(double valence) {
  const double v = std::clamp(valence, -1.0, 1.0);
  ActivationMap out;
  out[Channel::kCallNurses] = std::max(0.0, -v);
  out[Channel::kSmile] = std::max(0.0, v);
  out[Channel::kRecordData] = 1.0;
  return out;
}

ActivationMap p_activations(double sound_norm, double head_normalcy) {
  const double sound = std::clamp(sound_norm, 0.0, 1.0);
  const double normalcy = std::clamp(head_normalcy, 0.0, 1.0);
  ActivationMap out;
  out[Channel::kCallNurses] = std::max(1.0 - sound, 1.0 - normalcy);
  out[Channel::kSmile] = 0.0;
  out[Channel::kRecordData] = 1.0;
  return out;
}

ActivationMap p_activations(const PerceptionEvent& event, const LinguisticVariable& head_angle) {
  const Term* normal = head_angle.find_term("normal");
  if (normal == nullptr) {
    throw Error(ErrorKind::kConfig, "variable '" + head_angle.name() + "' has no 'normal' term");
  }
  const double angle = head_angle.universe().clamp(event.head_angle_deg);
  return p_activations(event.sound_norm, normal->mf.degree(angle));
}

}  // namespace fkbs
