#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fkbs {

/// Closed real interval a variable's crisp values live in.
struct Universe {
  double min = 0.0;
  double max = 1.0;

  double span() const { return max - min; }
  double midpoint() const { return 0.5 * (min + max); }
  bool contains(double x) const { return x >= min && x <= max; }
  double clamp(double x) const;
  bool operator==(const Universe&) const = default;
};

enum class MfShape { kTriangular, kTrapezoidal };

const char* to_string(MfShape shape);

/// Piecewise-linear membership function. Triangles are stored as (a, b, c) and
/// trapezoids as (a, b, c, d); a coincident pair of breakpoints gives a
/// vertical edge, which is how shoulders at the universe bounds are built.
class MembershipFunction {
 public:
  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);

  MfShape shape() const { return shape_; }
  std::span<const double> params() const;
  double support_min() const { return points_[0]; }
  double support_max() const { return points_[3]; }

  /// Degree in [0, 1]. Out-of-support inputs give 0.
  double degree(double x) const;

  bool operator==(const MembershipFunction&) const = default;

 private:
  MembershipFunction(MfShape shape, std::array<double, 4> params);

  MfShape shape_ = MfShape::kTriangular;
  // Breakpoints as given; a triangle uses the first three slots.
  std::array<double, 4> params_{};
  // Evaluation points (a, b, c, d); a triangle repeats its peak.
  std::array<double, 4> points_{};
};

double membership_degree(const MembershipFunction& mf, double x);

struct Term {
  std::string name;
  MembershipFunction mf;
  bool operator==(const Term&) const = default;
};

struct FuzzifiedValue {
  std::string variable;
  double crisp_input = 0.0;
  // The value actually evaluated; differs from crisp_input when clamped.
  double evaluated_at = 0.0;
  bool clamped = false;
  // Same order as the owning variable's terms.
  std::vector<std::pair<std::string, double>> degrees;

  /// Degree of `term`, or a negative value when the term is absent.
  double degree_of(std::string_view term) const;
  double max_degree() const;
  std::string_view dominant_term() const;
};

class LinguisticVariable {
 public:
  /// Validates the definition: finite universe, unique term names, supports
  /// inside the universe, and full coverage. Throws a config error otherwise.
  LinguisticVariable(std::string name, Universe universe, std::vector<Term> terms);

  const std::string& name() const { return name_; }
  const Universe& universe() const { return universe_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Term* find_term(std::string_view term) const;
  bool has_term(std::string_view term) const { return find_term(term) != nullptr; }

  /// Out-of-universe inputs are clamped and flagged on the result.
  FuzzifiedValue fuzzify(double x) const;

  bool operator==(const LinguisticVariable&) const = default;

 private:
  std::string name_;
  Universe universe_;
  std::vector<Term> terms_;
};

FuzzifiedValue fuzzify(const LinguisticVariable& var, double x);

/// Builds a variable from ordered anchor points: the first term is a shoulder
/// saturated from the lower bound to its anchor, inner terms are triangles
/// spanning their neighbouring anchors, and the last term is a shoulder
/// saturated from its anchor to the upper bound.
LinguisticVariable make_anchored_variable(std::string name, Universe universe,
                                          std::span<const std::pair<std::string, double>> anchors);

/// Looks a variable up by name; throws a config error when it is missing.
const LinguisticVariable& find_variable(std::span<const LinguisticVariable> variables,
                                        std::string_view name);

// Emotion classes in the order used by every probability vector.
enum class Emotion { kAnger, kHappiness, kSadness, kSurprise, kDisgust, kFear };

inline constexpr std::size_t kEmotionCount = 6;
using EmotionProbs = std::array<double, kEmotionCount>;

inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "happiness", "sadness", "surprise", "disgust", "fear"};

std::string_view to_string(Emotion emotion);
bool parse_emotion(std::string_view name, Emotion& out);

inline constexpr double kProbabilitySumTolerance = 1e-6;

/// Throws an input validation error unless every entry is finite and
/// non-negative and the vector sums to 1 within tolerance.
void validate_emotion_probs(const EmotionProbs& probs);

/// P(happiness) minus the summed probability of the five negative classes.
double valence_score(const EmotionProbs& probs);

/// Stock variables used when no configuration overrides them.
namespace defaults {

inline constexpr std::string_view kEmotionVariable = "emotion";
inline constexpr std::string_view kSoundVariable = "sound";
inline constexpr std::string_view kHeadAngleVariable = "head_angle";

LinguisticVariable emotion_variable();
LinguisticVariable sound_variable();
LinguisticVariable head_angle_variable();

}  // namespace defaults

}  // namespace fkbs
