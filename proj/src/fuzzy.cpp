#include "fkbs/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fkbs/error.hpp"

namespace fkbs {

double Universe::clamp(double x) const { return std::clamp(x, min, max); }

const char* to_string(MfShape shape) {
  return shape == MfShape::kTriangular ? "triangular" : "trapezoidal";
}

namespace {

void check_breakpoints(std::span<const double> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) {
      throw Error(ErrorKind::kConfig, "membership function breakpoint is not finite");
    }
    if (i > 0 && points[i] < points[i - 1]) {
      throw Error(ErrorKind::kConfig, "membership function breakpoints must be non-decreasing");
    }
  }
}

}  // namespace

MembershipFunction::MembershipFunction(MfShape shape, std::array<double, 4> params)
    : shape_(shape), params_(params) {
  if (shape == MfShape::kTriangular) {
    points_ = {params[0], params[1], params[1], params[2]};
  } else {
    points_ = params;
  }
}

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
  check_breakpoints(std::array<double, 3>{a, b, c});
  return MembershipFunction(MfShape::kTriangular, {a, b, c, 0.0});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
  check_breakpoints(std::array<double, 4>{a, b, c, d});
  return MembershipFunction(MfShape::kTrapezoidal, {a, b, c, d});
}

std::span<const double> MembershipFunction::params() const {
  return {params_.data(), shape_ == MfShape::kTriangular ? 3u : 4u};
}

double MembershipFunction::degree(double x) const {
  const auto [a, b, c, d] = points_;
  if (!(x >= a && x <= d)) return 0.0;
  if (x >= b && x <= c) return 1.0;
  const double y = x < b ? (x - a) / (b - a) : (d - x) / (d - c);
  return std::clamp(y, 0.0, 1.0);
}

double membership_degree(const MembershipFunction& mf, double x) { return mf.degree(x); }

double FuzzifiedValue::degree_of(std::string_view term) const {
  for (const auto& [name, degree] : degrees) {
    if (name == term) return degree;
  }
  return -1.0;
}

double FuzzifiedValue::max_degree() const {
  double best = 0.0;
  for (const auto& entry : degrees) best = std::max(best, entry.second);
  return best;
}

std::string_view FuzzifiedValue::dominant_term() const {
  // First term wins ties so the answer is stable.
  std::string_view best;
  double best_degree = -1.0;
  for (const auto& [name, degree] : degrees) {
    if (degree > best_degree) {
      best = name;
      best_degree = degree;
    }
  }
  return best;
}

LinguisticVariable::LinguisticVariable(std::string name, Universe universe, std::vector<Term> terms)
    : name_(std::move(name)), universe_(universe), terms_(std::move(terms)) {
  const std::string where = "variable '" + name_ + "'";
  if (name_.empty()) throw Error(ErrorKind::kConfig, "variable name is empty");
  if (!std::isfinite(universe_.min) || !std::isfinite(universe_.max) ||
      !(universe_.min < universe_.max)) {
    throw Error(ErrorKind::kConfig, where + ": universe must be a finite interval with min < max");
  }
  if (terms_.empty()) throw Error(ErrorKind::kConfig, where + ": no terms");

  std::set<std::string_view> seen;
  std::vector<double> critical{universe_.min, universe_.max};
  for (const auto& term : terms_) {
    if (term.name.empty()) throw Error(ErrorKind::kConfig, where + ": empty term name");
    if (!seen.insert(term.name).second) {
      throw Error(ErrorKind::kConfig, where + ": duplicate term '" + term.name + "'");
    }
    if (term.mf.support_min() < universe_.min || term.mf.support_max() > universe_.max) {
      throw Error(ErrorKind::kConfig,
                  where + ": support of term '" + term.name + "' leaves the universe");
    }
    for (double p : term.mf.params()) critical.push_back(p);
  }

  // Every MF is linear between consecutive breakpoints, so checking the
  // breakpoints and the midpoints between them decides coverage exactly.
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());
  auto covered = [this](double x) {
    return std::any_of(terms_.begin(), terms_.end(),
                       [x](const Term& t) { return t.mf.degree(x) > 0.0; });
  };
  for (std::size_t i = 0; i < critical.size(); ++i) {
    const double x = critical[i];
    bool ok = covered(x);
    double at = x;
    if (ok && i + 1 < critical.size()) {
      at = 0.5 * (x + critical[i + 1]);
      ok = covered(at);
    }
    if (!ok) {
      throw Error(ErrorKind::kConfig,
                  where + ": terms do not cover the universe near " + std::to_string(at));
    }
  }
}

const Term* LinguisticVariable::find_term(std::string_view term) const {
  for (const auto& t : terms_) {
    if (t.name == term) return &t;
  }
  return nullptr;
}

FuzzifiedValue LinguisticVariable::fuzzify(double x) const {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::kInputValidation, "variable '" + name_ + "': input is not finite");
  }
  FuzzifiedValue out;
  out.variable = name_;
  out.crisp_input = x;
  out.evaluated_at = universe_.clamp(x);
  out.clamped = out.evaluated_at != x;
  out.degrees.reserve(terms_.size());
  for (const auto& term : terms_) {
    out.degrees.emplace_back(term.name, term.mf.degree(out.evaluated_at));
  }
  return out;
}

FuzzifiedValue fuzzify(const LinguisticVariable& var, double x) { return var.fuzzify(x); }

LinguisticVariable make_anchored_variable(std::string name, Universe universe,
                                          std::span<const std::pair<std::string, double>> anchors) {
  if (anchors.size() < 2) {
    throw Error(ErrorKind::kConfig, "variable '" + name + "': at least two anchors are required");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double a = anchors[i].second;
    if (!universe.contains(a) || (i > 0 && !(a > anchors[i - 1].second))) {
      throw Error(ErrorKind::kConfig, "variable '" + name +
                                          "': anchors must be strictly increasing inside the universe");
    }
  }
  std::vector<Term> terms;
  const std::size_t n = anchors.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = anchors[i].second;
    MembershipFunction mf = [&] {
      if (i == 0) {
        return MembershipFunction::trapezoidal(universe.min, universe.min, a, anchors[1].second);
      }
      if (i + 1 == n) {
        return MembershipFunction::trapezoidal(anchors[i - 1].second, a, universe.max, universe.max);
      }
      return MembershipFunction::triangular(anchors[i - 1].second, a, anchors[i + 1].second);
    }();
    terms.push_back(Term{anchors[i].first, mf});
  }
  return LinguisticVariable(std::move(name), universe, std::move(terms));
}

const LinguisticVariable& find_variable(std::span<const LinguisticVariable> variables,
                                        std::string_view name) {
  for (const auto& v : variables) {
    if (v.name() == name) return v;
  }
  throw Error(ErrorKind::kConfig, "unknown variable '" + std::string(name) + "'");
}

std::string_view to_string(Emotion emotion) {
  return kEmotionNames[static_cast<std::size_t>(emotion)];
}

bool parse_emotion(std::string_view name, Emotion& out) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == name) {
      out = static_cast<Emotion>(i);
      return true;
    }
  }
  return false;
}

void validate_emotion_probs(const EmotionProbs& probs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorKind::kInputValidation,
                  "probability of " + std::string(kEmotionNames[i]) + " must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorKind::kInputValidation,
                "emotion probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

double valence_score(const EmotionProbs& probs) {
  validate_emotion_probs(probs);
  const double positive = probs[static_cast<std::size_t>(Emotion::kHappiness)];
  // Summed in sorted order so the result does not depend on class order.
  std::array<double, kEmotionCount - 1> others{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (i != static_cast<std::size_t>(Emotion::kHappiness)) others[n++] = probs[i];
  }
  std::sort(others.begin(), others.end());
  double negative = 0.0;
  for (double v : others) negative += v;
  return std::clamp(positive - negative, -1.0, 1.0);
}

namespace defaults {

LinguisticVariable emotion_variable() {
  return LinguisticVariable(
      std::string(kEmotionVariable), Universe{-1.0, 1.0},
      {Term{"negative", MembershipFunction::trapezoidal(-1.0, -1.0, -1.0, 0.0)},
       Term{"neutral", MembershipFunction::triangular(-0.5, 0.0, 0.5)},
       Term{"positive", MembershipFunction::trapezoidal(0.0, 1.0, 1.0, 1.0)}});
}

LinguisticVariable sound_variable() {
  const std::array<std::pair<std::string, double>, 3> anchors{
      {{"low", 0.1}, {"normal", 0.5}, {"high", 0.9}}};
  return make_anchored_variable(std::string(kSoundVariable), Universe{0.0, 1.0}, anchors);
}

LinguisticVariable head_angle_variable() {
  const std::array<std::pair<std::string, double>, 3> anchors{
      {{"normal", 0.0}, {"low", 25.0}, {"high", 45.0}}};
  return make_anchored_variable(std::string(kHeadAngleVariable), Universe{0.0, 90.0}, anchors);
}

}  // namespace defaults

}  // namespace fkbs
