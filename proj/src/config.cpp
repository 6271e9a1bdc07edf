#include "fkbs/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fkbs/error.hpp"

namespace fkbs {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::kConfig, message); }

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(where + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) config_error(where + " must be a number");
  return v.get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) config_error(where + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

Universe parse_universe(const json& obj, const std::string& where) {
  auto it = obj.find("universe");
  if (it == obj.end() || !it->is_array() || it->size() != 2) {
    config_error(where + ": 'universe' must be [min, max]");
  }
  return Universe{number((*it)[0], where + " universe"), number((*it)[1], where + " universe")};
}

MembershipFunction parse_mf(const json& term, const std::string& where) {
  const std::string shape = string_field(term, "shape", where);
  auto it = term.find("params");
  if (it == term.end() || !it->is_array()) config_error(where + ": 'params' must be an array");
  std::vector<double> p;
  for (const auto& v : *it) p.push_back(number(v, where + " params"));
  if (shape == "triangular") {
    if (p.size() != 3) config_error(where + ": triangular terms take 3 params");
    return MembershipFunction::triangular(p[0], p[1], p[2]);
  }
  if (shape == "trapezoidal") {
    if (p.size() != 4) config_error(where + ": trapezoidal terms take 4 params");
    return MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3]);
  }
  config_error(where + ": unknown shape '" + shape + "' (expected triangular or trapezoidal)");
}

LinguisticVariable parse_variable(const json& obj, const std::string& where,
                                  std::initializer_list<std::string_view> extra_keys = {}) {
  if (!obj.is_object()) config_error(where + " must be an object");
  std::vector<std::string_view> allowed{"name", "universe", "terms", "anchors"};
  allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(where + ": unknown key '" + key + "'");
    }
  }
  const std::string name = string_field(obj, "name", where);
  const std::string here = where + " '" + name + "'";
  const Universe universe = parse_universe(obj, here);
  const bool has_terms = obj.contains("terms");
  const bool has_anchors = obj.contains("anchors");
  if (has_terms == has_anchors) config_error(here + ": give exactly one of 'terms' or 'anchors'");

  if (has_anchors) {
    const json& anchors = obj["anchors"];
    if (!anchors.is_array()) config_error(here + ": 'anchors' must be an array");
    std::vector<std::pair<std::string, double>> points;
    for (const auto& a : anchors) {
      if (!a.is_object()) config_error(here + ": each anchor is {\"term\": ..., \"at\": ...}");
      reject_unknown_keys(a, {"term", "at"}, here + " anchor");
      points.emplace_back(string_field(a, "term", here + " anchor"),
                          number(a.value("at", json()), here + " anchor 'at'"));
    }
    return make_anchored_variable(name, universe, points);
  }

  const json& terms = obj["terms"];
  if (!terms.is_array()) config_error(here + ": 'terms' must be an array");
  std::vector<Term> out;
  for (const auto& t : terms) {
    if (!t.is_object()) config_error(here + ": each term is an object");
    reject_unknown_keys(t, {"name", "shape", "params"}, here + " term");
    const std::string term_name = string_field(t, "name", here + " term");
    out.push_back(Term{term_name, parse_mf(t, here + " term '" + term_name + "'")});
  }
  return LinguisticVariable(name, universe, std::move(out));
}

json variable_to_json(const LinguisticVariable& var) {
  json obj;
  obj["name"] = var.name();
  obj["universe"] = {var.universe().min, var.universe().max};
  json terms = json::array();
  for (const auto& t : var.terms()) {
    json term;
    term["name"] = t.name;
    term["shape"] = to_string(t.mf.shape());
    term["params"] = std::vector<double>(t.mf.params().begin(), t.mf.params().end());
    terms.push_back(term);
  }
  obj["terms"] = terms;
  return obj;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) return base / p;
  return p;
}

}  // namespace

EngineConfig EngineConfig::defaults() {
  EngineConfig cfg;
  cfg.inputs = {defaults::emotion_variable(), defaults::sound_variable(), defaults::head_angle_variable()};
  for (Channel c : kChannels) cfg.outputs.push_back(default_output_channel(c));
  return cfg;
}

const LinguisticVariable& EngineConfig::input(std::string_view name) const { return find_variable(inputs, name); }

const OutputChannel& EngineConfig::output(Channel channel) const {
  for (const auto& out : outputs) {
    if (out.channel == channel) return out;
  }
  config_error("no output variable for channel '" + std::string(to_string(channel)) + "'");
}

void EngineConfig::validate() const {
  std::set<std::string_view> names;
  for (const auto& v : inputs) {
    if (!names.insert(v.name()).second) config_error("input variable '" + v.name() + "' defined twice");
  }
  for (auto required : {defaults::kEmotionVariable, defaults::kSoundVariable, defaults::kHeadAngleVariable}) {
    input(required);
  }
  if (!input(defaults::kHeadAngleVariable).has_term("normal")) {
    config_error("variable 'head_angle' must define a 'normal' term");
  }
  std::set<Channel> seen;
  for (const auto& out : outputs) {
    if (!seen.insert(out.channel).second) {
      config_error("channel '" + std::string(to_string(out.channel)) + "' has two output variables");
    }
    for (const auto* term : {&out.assert_term, &out.deny_term}) {
      if (!out.variable.has_term(*term)) {
        config_error("output variable '" + out.variable.name() + "' has no term '" + *term + "'");
      }
    }
  }
  for (Channel c : kChannels) output(c);
  for (Channel c : kChannels) {
    const double t = thresholds[c];
    if (!(t > 0.0 && t < 1.0)) {
      config_error("threshold for '" + std::string(to_string(c)) + "' must lie in (0, 1)");
    }
  }
  if (resolution < 2) config_error("defuzzification resolution must be at least 2");
  if (defuzzification != "wcog") config_error("unsupported defuzzification method '" + defuzzification + "'");
}

EngineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config root must be an object");
  reject_unknown_keys(root, {"variables", "outputs", "appraisal", "thresholds", "defuzzification", "rules", "log"},
                      "config");

  EngineConfig cfg = EngineConfig::defaults();

  if (auto it = root.find("variables"); it != root.end()) {
    if (!it->is_array()) config_error("'variables' must be an array");
    std::set<std::string> overridden;
    for (const auto& obj : *it) {
      LinguisticVariable var = parse_variable(obj, "variable");
      if (!overridden.insert(var.name()).second) config_error("variable '" + var.name() + "' defined twice");
      auto slot = std::find_if(cfg.inputs.begin(), cfg.inputs.end(),
                               [&](const LinguisticVariable& v) { return v.name() == var.name(); });
      if (slot != cfg.inputs.end()) {
        *slot = std::move(var);
      } else {
        cfg.inputs.push_back(std::move(var));
      }
    }
  }

  if (auto it = root.find("outputs"); it != root.end()) {
    if (!it->is_array()) config_error("'outputs' must be an array");
    for (const auto& obj : *it) {
      const std::string channel_name = string_field(obj, "channel", "output");
      auto channel = parse_channel(channel_name);
      if (!channel) config_error("output: unknown channel '" + channel_name + "'");
      OutputChannel out{*channel, parse_variable(obj, "output", {"channel", "assert_term", "deny_term"})};
      if (obj.contains("assert_term")) out.assert_term = string_field(obj, "assert_term", "output");
      if (obj.contains("deny_term")) out.deny_term = string_field(obj, "deny_term", "output");
      auto slot = std::find_if(cfg.outputs.begin(), cfg.outputs.end(),
                               [&](const OutputChannel& o) { return o.channel == *channel; });
      *slot = std::move(out);
    }
  }

  if (auto it = root.find("appraisal"); it != root.end()) {
    if (!it->is_object()) config_error("'appraisal' must be an object");
    reject_unknown_keys(*it, {"w_ea", "w_fkbs", "w_p"}, "appraisal");
    const AppraisalWeights d = AppraisalWeights::defaults();
    auto get = [&](const char* key, double fallback) {
      return it->contains(key) ? number((*it)[key], std::string("appraisal.") + key) : fallback;
    };
    cfg.weights = AppraisalWeights::make(get("w_ea", d.ea()), get("w_fkbs", d.fkbs()), get("w_p", d.p()));
  }

  if (auto it = root.find("thresholds"); it != root.end()) {
    if (!it->is_object()) config_error("'thresholds' must be an object");
    for (const auto& [key, value] : it->items()) {
      auto channel = parse_channel(key);
      if (!channel) config_error("thresholds: unknown channel '" + key + "'");
      cfg.thresholds[*channel] = number(value, "thresholds." + key);
    }
  }

  if (auto it = root.find("defuzzification"); it != root.end()) {
    if (!it->is_object()) config_error("'defuzzification' must be an object");
    reject_unknown_keys(*it, {"method", "resolution"}, "defuzzification");
    if (it->contains("method")) cfg.defuzzification = string_field(*it, "method", "defuzzification");
    if (it->contains("resolution")) {
      const json& r = (*it)["resolution"];
      if (!r.is_number_integer() || r.get<std::int64_t>() < 2 || r.get<std::int64_t>() > 10'000'000) {
        config_error("defuzzification.resolution must be an integer in [2, 10000000]");
      }
      cfg.resolution = static_cast<int>(r.get<std::int64_t>());
    }
  }

  if (root.contains("rules")) cfg.rules_path = resolve(base_dir, string_field(root, "rules", "config"));
  if (root.contains("log")) cfg.log_path = resolve(base_dir, string_field(root, "log", "config"));

  cfg.validate();
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const EngineConfig& config) {
  json root;
  json vars = json::array();
  for (const auto& v : config.inputs) vars.push_back(variable_to_json(v));
  root["variables"] = vars;
  json outs = json::array();
  for (const auto& o : config.outputs) {
    json obj = variable_to_json(o.variable);
    obj["channel"] = std::string(to_string(o.channel));
    obj["assert_term"] = o.assert_term;
    obj["deny_term"] = o.deny_term;
    outs.push_back(obj);
  }
  root["outputs"] = outs;
  root["appraisal"] = {{"w_ea", config.weights.ea()}, {"w_fkbs", config.weights.fkbs()}, {"w_p", config.weights.p()}};
  json th;
  for (Channel c : kChannels) th[std::string(to_string(c))] = config.thresholds[c];
  root["thresholds"] = th;
  root["defuzzification"] = {{"method", config.defuzzification}, {"resolution", config.resolution}};
  if (config.rules_path) root["rules"] = config.rules_path->generic_string();
  if (config.log_path) root["log"] = config.log_path->generic_string();
  return root.dump(2) + "\n";
}

}  // namespace fkbs
