#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aortamc/aorta.hpp"
#include "aortamc/apl.hpp"
#include "aortamc/errors.hpp"
#include "aortamc/runtime.hpp"

namespace aortamc {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A loaded MAS: the initial state plus what it was built from.
struct MasConfig {
  std::filesystem::path path;
  std::vector<runtime::AgentSetup> agents;
  aorta::OrgSpec org;
  logic::FactBase percepts;
  std::optional<std::filesystem::path> properties; // default property file, if named

  runtime::MasState initial() const { return runtime::initial_state(agents, org, percepts); }
};

/// Reads a MAS configuration file:
///
///   { "agents": [ {"name": "alice", "apl": "agents.gwen", "aorta": "aorta.rules"}, ... ],
///     "org": "org.spec", "percepts": ["f(a)", ...], "properties": "props.psl" }
///
/// File paths are relative to the configuration file. An APL file may hold
/// several `:name:` programs; each agent takes the one carrying its name.
inline MasConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto dir = path.parent_path();
  MasConfig cfg;
  cfg.path = path;

  // Each source file is parsed once, however many agents share it.
  std::map<std::string, std::vector<apl::AplProgram>> programs;
  std::map<std::string, aorta::RuleSet> rules;

  auto with_file = [&](const std::string& rel, auto&& parse) {
    auto p = dir / rel;
    try {
      return parse(read_file(p));
    } catch (const SyntaxError& e) {
      throw SyntaxError(e, p.string());
    }
  };

  try {
    if (!j.contains("agents") || !j["agents"].is_array())
      throw ConfigError(path.string() + ": 'agents' must be an array");
    for (const auto& ja : j["agents"]) {
      runtime::AgentSetup setup;
      setup.name = ja.at("name").get<std::string>();

      const auto apl_file = ja.at("apl").get<std::string>();
      if (!programs.count(apl_file))
        programs[apl_file] = with_file(apl_file, [](const std::string& s) { return apl::parse_apl(s); });
      for (const auto& prog : programs[apl_file])
        if (prog.name == setup.name) setup.program = std::make_shared<const apl::AplProgram>(prog);
      if (!setup.program)
        throw ConfigError(apl_file + " has no program for agent " + setup.name);

      if (ja.contains("aorta")) {
        const auto rules_file = ja["aorta"].get<std::string>();
        if (!rules.count(rules_file))
          rules[rules_file] = std::make_shared<const std::vector<aorta::ReasoningRule>>(with_file(
              rules_file, [](const std::string& s) { return aorta::parse_aorta_program(s); }));
        setup.rules = rules[rules_file];
      }
      cfg.agents.push_back(std::move(setup));
    }
    if (j.contains("org"))
      cfg.org = with_file(j["org"].get<std::string>(),
                          [](const std::string& s) { return aorta::parse_org_spec(s); });
    if (j.contains("properties")) cfg.properties = dir / j["properties"].get<std::string>();
    if (j.contains("percepts"))
      for (const auto& p : j["percepts"]) {
        auto t = logic::parse_term(p.get<std::string>());
        if (!t.is_ground()) throw ConfigError("percept must be ground: " + t.to_string());
        cfg.percepts.insert(t);
      }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return cfg;
}

} // namespace aortamc
