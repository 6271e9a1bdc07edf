#include <gtest/gtest.h>

#include "fkbs/config.hpp"
#include "fkbs/error.hpp"
#include "support.hpp"

using namespace fkbs;

namespace {

ErrorKind kind_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << json;
  return ErrorKind::kIo;
}

}  // namespace

TEST(Config, ShippedDefaultFileMatchesBuiltInDefaults) {
  const EngineConfig loaded = load_config(testkit::source_dir() / "config" / "default.json");
  EXPECT_EQ(config_to_json(loaded), config_to_json(EngineConfig::defaults()));
}

TEST(Config, EmptyObjectKeepsDefaults) {
  EXPECT_EQ(config_to_json(parse_config("{}")), config_to_json(EngineConfig::defaults()));
}

TEST(Config, RenderedConfigReloadsIdentically) {
  const auto cfg = parse_config(R"({"appraisal":{"w_ea":0.2,"w_fkbs":0.6,"w_p":0.2},
                                    "thresholds":{"smile":0.4},
                                    "defuzzification":{"method":"wcog","resolution":501}})");
  EXPECT_EQ(cfg.weights, AppraisalWeights::make(0.2, 0.6, 0.2));
  EXPECT_EQ(cfg.thresholds[Channel::kSmile], 0.4);
  EXPECT_EQ(cfg.thresholds[Channel::kCallNurses], 0.5);
  EXPECT_EQ(cfg.resolution, 501);
  EXPECT_EQ(config_to_json(parse_config(config_to_json(cfg))), config_to_json(cfg));
}

TEST(Config, AnchoredVariableOverride) {
  const auto cfg = parse_config(R"({"variables":[{"name":"head_angle","universe":[0,90],
      "anchors":[{"term":"normal","at":0},{"term":"low","at":30},{"term":"high","at":60}]}]})");
  const auto v = cfg.input("head_angle").fuzzify(30);
  EXPECT_DOUBLE_EQ(v.degree_of("low"), 1.0);
  EXPECT_EQ(cfg.input("sound"), defaults::sound_variable());
}

TEST(Config, ExplicitTermsOverride) {
  const auto cfg = parse_config(R"({"variables":[{"name":"sound","universe":[0,1],"terms":[
      {"name":"low","shape":"trapezoidal","params":[0,0,0.2,0.6]},
      {"name":"normal","shape":"triangular","params":[0.2,0.6,0.9]},
      {"name":"high","shape":"trapezoidal","params":[0.6,0.9,1,1]}]}]})");
  EXPECT_DOUBLE_EQ(cfg.input("sound").fuzzify(0.6).degree_of("normal"), 1.0);
}

TEST(Config, RelativeRulesPathResolvesAgainstBaseDir) {
  const auto cfg = parse_config(R"({"rules":"rules/x.fkb","log":"/tmp/a.jsonl"})", "/etc/fkbs");
  ASSERT_TRUE(cfg.rules_path);
  EXPECT_EQ(*cfg.rules_path, std::filesystem::path("/etc/fkbs/rules/x.fkb"));
  EXPECT_EQ(*cfg.log_path, std::filesystem::path("/tmp/a.jsonl"));
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_EQ(kind_of("not json"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of("[]"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"colour":"red"})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"appraisal":{"w_ea":0.3,"w_fkbs":0.5,"w_p":0.25}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"thresholds":{"smile":1.5}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"thresholds":{"dance":0.5}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"defuzzification":{"method":"mom"}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"defuzzification":{"resolution":1}})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"variables":[{"name":"head_angle","universe":[0,90],
      "anchors":[{"term":"flat","at":0},{"term":"tilted","at":45}]}]})"),
            ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"variables":[{"name":"sound","universe":[0,1],"terms":[
      {"name":"low","shape":"gaussian","params":[0,1]}]}]})"),
            ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"variables":[{"name":"sound","universe":[0,1],"terms":[
      {"name":"low","shape":"trapezoidal","params":[0,0,0.2,0.3]},
      {"name":"high","shape":"trapezoidal","params":[0.6,0.9,1,1]}]}]})"),
            ErrorKind::kConfig);
}

TEST(Config, MissingFileIsConfigError) {
  try {
    load_config("/nonexistent/fkbs.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}
