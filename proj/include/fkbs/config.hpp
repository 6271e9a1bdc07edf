#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fkbs/appraisal.hpp"
#include "fkbs/channel.hpp"
#include "fkbs/fuzzy.hpp"
#include "fkbs/inference.hpp"

namespace fkbs {

inline constexpr double kDefaultThreshold = 0.5;

/// Everything the decision pipeline needs besides the rule base. Built from
/// embedded defaults, optionally overridden by a JSON file.
struct EngineConfig {
  // Must define `emotion`, `sound` and `head_angle`.
  std::vector<LinguisticVariable> inputs;
  // One entry per channel, in Channel order.
  std::vector<OutputChannel> outputs;
  AppraisalWeights weights = AppraisalWeights::defaults();
  ActivationMap thresholds{{kDefaultThreshold, kDefaultThreshold, kDefaultThreshold}};
  int resolution = kDefaultResolution;
  std::string defuzzification = "wcog";
  std::optional<std::filesystem::path> rules_path;
  std::optional<std::filesystem::path> log_path;

  static EngineConfig defaults();

  /// Throws a config error describing the first violated constraint.
  void validate() const;

  const LinguisticVariable& input(std::string_view name) const;
  const OutputChannel& output(Channel channel) const;
};

/// Overrides defaults with the keys present in `json_text`. Relative paths
/// are resolved against `base_dir`.
EngineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
EngineConfig load_config(const std::filesystem::path& path);

/// Full JSON rendering, loadable by parse_config.
std::string config_to_json(const EngineConfig& config);

}  // namespace fkbs
