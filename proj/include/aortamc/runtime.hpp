#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aortamc/aorta.hpp"
#include "aortamc/apl.hpp"
#include "aortamc/errors.hpp"
#include "aortamc/term.hpp"

namespace aortamc::runtime {

using aorta::Message;
using logic::FactBase;
using logic::Term;

/// Static description of one agent: its program and reasoning rules.
struct AgentSetup {
  std::string name;
  std::shared_ptr<const apl::AplProgram> program;
  aorta::RuleSet rules;
};

struct AgentState {
  aorta::AortaAgent aorta;
  apl::AplAgentState apl;
  std::shared_ptr<const apl::AplProgram> program;
  bool active = true;
  std::optional<Term> last_action;
  std::deque<Message> inbox; // this agent's ether queue

  const std::string& name() const { return aorta.name; }
};

using Registry = std::shared_ptr<const std::vector<std::string>>;

/// Global configuration. A value: copy it to branch.
struct MasState {
  std::vector<AgentState> agents; // declaration order
  FactBase percepts;
  Registry registry = std::make_shared<const std::vector<std::string>>();

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (agents[i].name() == name) return i;
    return std::nullopt;
  }

  const AgentState& agent(std::string_view name) const {
    auto i = index_of(name);
    if (!i) throw UnknownAgent("unknown agent: " + std::string(name));
    return agents[*i];
  }
};

inline MasState initial_state(const std::vector<AgentSetup>& setups, const aorta::OrgSpec& spec,
                              const FactBase& percepts = {}) {
  if (setups.empty()) throw ConfigError("agent registry is empty");
  std::vector<std::string> names;
  for (const auto& s : setups) {
    if (std::find(names.begin(), names.end(), s.name) != names.end())
      throw DuplicateAgentName("duplicate agent name: " + s.name);
    names.push_back(s.name);
  }
  spec.validate();

  MasState st;
  st.registry = std::make_shared<const std::vector<std::string>>(names);
  st.percepts = percepts;
  for (const auto& s : setups) {
    AgentState a;
    a.aorta.name = s.name;
    a.aorta.rules = s.rules ? s.rules : std::make_shared<const std::vector<aorta::ReasoningRule>>();
    a.program = s.program ? s.program : std::make_shared<const apl::AplProgram>();
    for (const auto& b : a.program->initial_beliefs) a.aorta.ms.beliefs.insert(b);
    a.aorta.ms.beliefs.insert(logic::compound("me", {logic::atom(s.name)}));
    for (const auto& n : names) a.aorta.ms.beliefs.insert(logic::compound("agent", {logic::atom(n)}));
    for (const auto& g : a.program->initial_goals) a.aorta.ms.goals.insert(g);
    a.aorta.ms.org = spec.facts();
    st.agents.push_back(std::move(a));
  }
  return st;
}

inline std::vector<std::string> active_agents(const MasState& s) {
  std::vector<std::string> out;
  for (const auto& a : s.agents)
    if (a.active) out.push_back(a.name());
  return out;
}

inline bool is_end_state(const MasState& s) {
  return std::none_of(s.agents.begin(), s.agents.end(), [](const AgentState& a) { return a.active; });
}

/// What one macro-step did, for traces.
struct StepRecord {
  std::string agent;
  std::optional<Term> action;
  std::vector<Message> delivered;
};

/// One macro-step of `chosen`: inbox into a full AORTA cycle, then one
/// interpreter step; outgoing messages are queued at their recipients.
inline MasState mas_step(MasState s, std::string_view chosen, StepRecord* record = nullptr) {
  auto idx = s.index_of(chosen);
  if (!idx) throw UnknownAgent("unknown agent: " + std::string(chosen));
  AgentState& a = s.agents[*idx];
  if (!a.active) throw InactiveAgentChosen("agent is not active: " + std::string(chosen));

  std::vector<Message> incoming(a.inbox.begin(), a.inbox.end());
  a.inbox.clear();

  auto cycle = aorta::aorta_cycle(std::move(a.aorta), incoming, *s.registry);
  a.aorta = std::move(cycle.agent);
  bool apl_changed =
      apl::apl_step(a.aorta.ms.beliefs, a.aorta.ms.goals, a.apl, a.program->plans);
  a.last_action = cycle.action;

  for (const auto& m : cycle.outbox) {
    auto r = s.index_of(m.recipient);
    if (!r) throw UnknownRecipient("unknown recipient: " + m.recipient);
    s.agents[*r].inbox.push_back(m);
    s.agents[*r].active = true;
  }
  AgentState& self = s.agents[*idx];
  self.active = self.aorta.changed || apl_changed || !self.inbox.empty();

  if (record) {
    record->agent = std::string(chosen);
    record->action = cycle.action;
    record->delivered = std::move(cycle.outbox);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Canonical serialization

namespace detail {

inline nlohmann::json terms_json(const FactBase& fb) {
  auto arr = nlohmann::json::array();
  for (const auto& t : fb) arr.push_back(t.to_string());
  return arr;
}

inline nlohmann::json terms_json(const std::vector<Term>& ts) {
  auto arr = nlohmann::json::array();
  for (const auto& t : ts) arr.push_back(t.to_string());
  return arr;
}

inline FactBase fact_base(const nlohmann::json& arr) {
  FactBase fb;
  for (const auto& s : arr) fb.insert(logic::parse_term(s.get<std::string>()));
  return fb;
}

inline std::vector<Term> term_list(const nlohmann::json& arr) {
  std::vector<Term> out;
  for (const auto& s : arr) out.push_back(logic::parse_term(s.get<std::string>()));
  return out;
}

} // namespace detail

/// Canonical JSON form. Sets are written in canonical term order; the
/// ordered parts (pending goals, intentions, inboxes) keep their order.
inline nlohmann::json to_json(const MasState& s) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : s.agents) {
    nlohmann::json j;
    j["name"] = a.name();
    j["active"] = a.active;
    j["beliefs"] = detail::terms_json(a.aorta.ms.beliefs);
    j["goals"] = detail::terms_json(a.aorta.ms.goals);
    j["org"] = detail::terms_json(a.aorta.ms.org);
    j["options"] = detail::terms_json(a.aorta.ms.options);
    j["pending"] = detail::terms_json(a.apl.pending);
    auto ints = nlohmann::json::array();
    for (const auto& in : a.apl.intentions)
      ints.push_back({{"goal", in.goal.to_string()},
                      {"plan", in.plan},
                      {"body", detail::terms_json(in.body)},
                      {"pc", in.pc}});
    j["intentions"] = std::move(ints);
    j["lastAction"] = a.last_action ? nlohmann::json(a.last_action->to_string()) : nlohmann::json();
    auto inbox = nlohmann::json::array();
    for (const auto& m : a.inbox) inbox.push_back({{"from", m.sender}, {"content", m.content.to_string()}});
    j["inbox"] = std::move(inbox);
    agents.push_back(std::move(j));
  }
  return {{"agents", std::move(agents)}, {"percepts", detail::terms_json(s.percepts)}};
}

/// Rebuilds a state. Programs and rules are taken from `templ` by agent
/// name when given; without one the result is only fit for evaluation.
inline MasState from_json(const nlohmann::json& j, const MasState* templ = nullptr) {
  MasState s;
  std::vector<std::string> names;
  for (const auto& ja : j.at("agents")) {
    AgentState a;
    a.aorta.name = ja.at("name").get<std::string>();
    names.push_back(a.aorta.name);
    a.active = ja.at("active").get<bool>();
    a.aorta.ms.beliefs = detail::fact_base(ja.at("beliefs"));
    a.aorta.ms.goals = detail::fact_base(ja.at("goals"));
    a.aorta.ms.org = detail::fact_base(ja.at("org"));
    a.aorta.ms.options = detail::fact_base(ja.at("options"));
    a.apl.pending = detail::term_list(ja.at("pending"));
    for (const auto& ji : ja.at("intentions")) {
      apl::Intention in;
      in.goal = logic::parse_term(ji.at("goal").get<std::string>());
      in.plan = ji.at("plan").get<std::size_t>();
      in.body = detail::term_list(ji.at("body"));
      in.pc = ji.at("pc").get<std::size_t>();
      a.apl.intentions.push_back(std::move(in));
    }
    if (!ja.at("lastAction").is_null())
      a.last_action = logic::parse_term(ja.at("lastAction").get<std::string>());
    for (const auto& jm : ja.at("inbox"))
      a.inbox.push_back(Message{jm.at("from").get<std::string>(), a.aorta.name,
                                logic::parse_term(jm.at("content").get<std::string>())});
    if (templ) {
      const AgentState& t = templ->agent(a.aorta.name);
      a.program = t.program;
      a.aorta.rules = t.aorta.rules;
    } else {
      a.program = std::make_shared<const apl::AplProgram>();
    }
    s.agents.push_back(std::move(a));
  }
  s.percepts = detail::fact_base(j.at("percepts"));
  s.registry = templ ? templ->registry : std::make_shared<const std::vector<std::string>>(names);
  return s;
}

inline std::string serialize(const MasState& s) { return to_json(s).dump(); }

inline MasState deserialize(std::string_view bytes, const MasState* templ = nullptr) {
  return from_json(nlohmann::json::parse(bytes), templ);
}

/// 64-bit FNV-1a.
inline std::uint64_t digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Fingerprint {
  std::uint64_t digest = 0;
  std::string bytes;

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) out[static_cast<std::size_t>(15 - i)] = digits[(digest >> (4 * i)) & 0xF];
    return out;
  }
};

inline Fingerprint fingerprint(const MasState& s) {
  Fingerprint f;
  f.bytes = serialize(s);
  f.digest = digest(f.bytes);
  return f;
}

} // namespace aortamc::runtime
