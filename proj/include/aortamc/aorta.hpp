#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aortamc/errors.hpp"
#include "aortamc/lexer.hpp"
#include "aortamc/term.hpp"

namespace aortamc::aorta {

using logic::FactBase;
using logic::QueryGoal;
using logic::Substitution;
using logic::Term;

// ---------------------------------------------------------------------------
// Belief formulas used by cond/obl facts: `true`, `false`, or bel(c1, ..., cn)
// meaning the conjunction of the ci against the belief base.

inline bool is_belief_formula(const Term& t) {
  if (t.is_atom() && (t.name() == "true" || t.name() == "false")) return true;
  return t.is_compound() && t.name() == "bel";
}

inline std::optional<QueryGoal> belief_query(const Term& formula) {
  if (formula.is_atom() && formula.name() == "true") return QueryGoal{};
  if (formula.is_atom() && formula.name() == "false") return std::nullopt;
  if (!(formula.is_compound() && formula.name() == "bel"))
    throw InvalidOrgSpec("not a belief formula: " + formula.to_string());
  QueryGoal q;
  for (const auto& a : formula.args()) q.conjuncts.push_back(logic::Positive{a});
  return q;
}

inline bool belief_formula_holds(const FactBase& beliefs, const Term& formula,
                                 const Substitution& s = {}) {
  auto q = belief_query(formula);
  return q && logic::holds(beliefs, *q, s);
}

// ---------------------------------------------------------------------------
// Organization spec

/// The static part of an organization: role/2, obj/2, dep/3 and cond/4
/// facts. rea/obl/viol are the dynamic functors and only ever appear in an
/// agent's organizational base at run time.
class OrgSpec {
public:
  OrgSpec() = default;

  static bool is_static_functor(const Term& t) {
    return t.has_functor("role", 2) || t.has_functor("obj", 2) || t.has_functor("dep", 3) ||
           t.has_functor("cond", 4);
  }
  static bool is_dynamic_functor(const Term& t) {
    return t.has_functor("rea", 2) || t.has_functor("obl", 4) || t.has_functor("viol", 3);
  }

  void add(const Term& fact) {
    if (!is_static_functor(fact))
      throw InvalidOrgSpec("unexpected org spec fact: " + fact.to_string());
    facts_.insert(fact);
  }

  /// Checks the structural invariants; throws InvalidOrgSpec / UnknownRoleInSpec.
  void validate() const {
    std::set<Term, logic::TermLess> roles;
    std::set<Term, logic::TermLess> objectives;
    for (const auto& f : facts_) {
      if (f.has_functor("role", 2) || f.has_functor("obj", 2)) {
        if (!f.arg(1).is_list())
          throw InvalidOrgSpec("objective set must be a list: " + f.to_string());
        for (const auto& o : f.arg(1).args()) objectives.insert(o);
        if (f.has_functor("role", 2)) roles.insert(f.arg(0));
      }
    }
    auto require_role = [&](const Term& r, const Term& where) {
      if (!roles.count(r))
        throw UnknownRoleInSpec("unknown role " + r.to_string() + " in " + where.to_string());
    };
    auto require_objective = [&](const Term& o, const Term& where) {
      if (!objectives.count(o))
        throw InvalidOrgSpec("objective " + o.to_string() + " in " + where.to_string() +
                             " is not listed by any role or objective");
    };
    for (const auto& f : facts_) {
      if (f.has_functor("obj", 2)) {
        require_objective(f.arg(0), f);
      } else if (f.has_functor("dep", 3)) {
        require_role(f.arg(0), f);
        require_role(f.arg(1), f);
        require_objective(f.arg(2), f);
      } else if (f.has_functor("cond", 4)) {
        require_role(f.arg(0), f);
        const Term& obj = f.arg(1);
        if (!(obj.is_compound() && obj.name() == "bel"))
          throw InvalidOrgSpec("cond objective must be bel(...): " + f.to_string());
        for (const auto& o : obj.args()) require_objective(o, f);
        if (!is_belief_formula(f.arg(2)) || !is_belief_formula(f.arg(3)))
          throw InvalidOrgSpec("cond deadline/condition must be belief formulas: " + f.to_string());
      }
    }
  }

  const FactBase& facts() const noexcept { return facts_; }

  std::vector<Term> roles() const {
    std::vector<Term> out;
    auto [b, e] = facts_.with_functor("role", 2);
    for (auto it = b; it != e; ++it) out.push_back(it->arg(0));
    return out;
  }

private:
  FactBase facts_;
};

/// One fact per line (optionally '.'-terminated), `%` comments.
inline OrgSpec parse_org_spec(std::string_view text) {
  OrgSpec spec;
  Lexer lex(text);
  logic::TermReader reader(lex);
  while (!lex.at_end()) {
    Term f = reader.term();
    if (!f.is_ground()) lex.fail("org spec fact must be ground: " + f.to_string());
    try {
      spec.add(f);
    } catch (const InvalidOrgSpec& e) {
      lex.fail(e.what());
    }
    lex.accept(".");
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Mental state and options

struct MentalState {
  FactBase beliefs;  // Σa
  FactBase goals;    // Γa
  FactBase org;      // Σo: static spec + rea/obl/viol
  FactBase options;  // Γo

  friend bool operator==(const MentalState&, const MentalState&) = default;
};

enum class Ilf { Tell, Achieve };

inline std::string_view to_string(Ilf ilf) { return ilf == Ilf::Tell ? "tell" : "achieve"; }

/// role(R) | obj(bel(φ)) | send(R, tell|achieve, φ)
struct OptionTerm {
  enum class Kind { Role, Objective, Send };

  Kind kind = Kind::Role;
  Term subject;  // role for Role/Send, completion formula for Objective
  Ilf ilf = Ilf::Tell;
  Term content;

  static OptionTerm role(Term r) { return {Kind::Role, std::move(r), Ilf::Tell, {}}; }
  static OptionTerm objective(Term formula) {
    return {Kind::Objective, std::move(formula), Ilf::Tell, {}};
  }
  static OptionTerm send(Term r, Ilf ilf, Term content) {
    return {Kind::Send, std::move(r), ilf, std::move(content)};
  }

  Term to_term() const {
    switch (kind) {
    case Kind::Role: return logic::compound("role", {subject});
    case Kind::Objective: return logic::compound("obj", {subject});
    case Kind::Send:
      return logic::compound("send", {subject, logic::atom(std::string(to_string(ilf))), content});
    }
    return {};
  }

  /// Accepts patterns too: the ilf position may be a variable.
  static bool well_formed(const Term& t, bool allow_variables = false) {
    if (t.has_functor("role", 1)) return true;
    if (t.has_functor("obj", 1)) return true;
    if (t.has_functor("send", 3)) {
      const Term& ilf = t.arg(1);
      if (ilf.is_var()) return allow_variables;
      return ilf.is_atom() && (ilf.name() == "tell" || ilf.name() == "achieve");
    }
    return false;
  }
};

/// Placeholder recipient role of information options that go to every agent.
inline const Term& any_role() {
  static const Term t = logic::atom("all");
  return t;
}

// ---------------------------------------------------------------------------
// Reasoning formulas

struct ReasoningFormula {
  enum class Kind { Top, Org, Opt, Bel, Goal, Neg, And };

  Kind kind = Kind::Top;
  Term pattern;                           // Org, Opt, Goal
  QueryGoal query;                        // Bel
  std::vector<ReasoningFormula> children; // Neg: 1, And: 2

  static ReasoningFormula top() { return {}; }
  static ReasoningFormula org(Term t) { return {Kind::Org, std::move(t), {}, {}}; }
  static ReasoningFormula opt(Term t) { return {Kind::Opt, std::move(t), {}, {}}; }
  static ReasoningFormula goal(Term t) { return {Kind::Goal, std::move(t), {}, {}}; }
  static ReasoningFormula bel(QueryGoal q) { return {Kind::Bel, {}, std::move(q), {}}; }
  static ReasoningFormula negate(ReasoningFormula f) { return {Kind::Neg, {}, {}, {std::move(f)}}; }
  static ReasoningFormula conj(ReasoningFormula a, ReasoningFormula b) {
    return {Kind::And, {}, {}, {std::move(a), std::move(b)}};
  }

  void collect_variables(std::set<std::string>& out) const {
    switch (kind) {
    case Kind::Top: break;
    case Kind::Org:
    case Kind::Opt:
    case Kind::Goal: pattern.collect_variables(out); break;
    case Kind::Bel: {
      auto v = query.variables();
      out.insert(v.begin(), v.end());
      break;
    }
    case Kind::Neg:
    case Kind::And:
      for (const auto& c : children) c.collect_variables(out);
      break;
    }
  }

  /// Variables a successful evaluation is guaranteed to bind.
  void collect_binding_variables(std::set<std::string>& out) const {
    switch (kind) {
    case Kind::Org:
    case Kind::Opt:
    case Kind::Goal: pattern.collect_variables(out); break;
    case Kind::Bel: {
      auto v = query.binding_variables();
      out.insert(v.begin(), v.end());
      break;
    }
    case Kind::And:
      for (const auto& c : children) c.collect_binding_variables(out);
      break;
    case Kind::Top:
    case Kind::Neg: break;
    }
  }

  std::string to_string() const {
    switch (kind) {
    case Kind::Top: return "true";
    case Kind::Org: return "org(" + pattern.to_string() + ")";
    case Kind::Opt: return "opt(" + pattern.to_string() + ")";
    case Kind::Goal: return "goal(" + pattern.to_string() + ")";
    case Kind::Bel: return "bel(" + query.to_string() + ")";
    case Kind::Neg: return "~(" + children[0].to_string() + ")";
    case Kind::And: return children[0].to_string() + ", " + children[1].to_string();
    }
    return {};
  }
};

namespace detail {

inline bool match_base(const FactBase& base, const Term& pattern, const Substitution& s,
                       const logic::SolutionSink& sink) {
  logic::QueryGoal q{{logic::Positive{pattern}}};
  return logic::for_each_solution(base, q, s, sink);
}

inline bool eval_from(const MentalState& ms, const ReasoningFormula& f, const Substitution& s,
                      const logic::SolutionSink& sink) {
  using K = ReasoningFormula::Kind;
  switch (f.kind) {
  case K::Top: return sink(s);
  case K::Org: return match_base(ms.org, f.pattern, s, sink);
  case K::Opt: return match_base(ms.options, f.pattern, s, sink);
  case K::Goal: return match_base(ms.goals, f.pattern, s, sink);
  case K::Bel: return logic::for_each_solution(ms.beliefs, f.query, s, sink);
  case K::Neg: {
    std::set<std::string> vars;
    f.children[0].collect_variables(vars);
    for (const auto& v : vars) {
      const Term* b = s.lookup(v);
      if (!b || !b->is_ground())
        throw NonGroundNegation("negated formula not ground: " + f.to_string());
    }
    bool found = false;
    eval_from(ms, f.children[0], s, [&](const Substitution&) {
      found = true;
      return false;
    });
    return found ? true : sink(s);
  }
  case K::And:
    return eval_from(ms, f.children[0], s, [&](const Substitution& s1) {
      return eval_from(ms, f.children[1], s1, sink);
    });
  }
  return true;
}

} // namespace detail

/// Lazily enumerates the substitutions under which `f` holds in `ms`.
inline bool for_each_solution(const MentalState& ms, const ReasoningFormula& f,
                              const Substitution& start, const logic::SolutionSink& sink) {
  return detail::eval_from(ms, f, start, sink);
}

inline std::vector<Substitution> eval_reasoning_formula(const MentalState& ms,
                                                        const ReasoningFormula& f,
                                                        const Substitution& start = {}) {
  std::vector<Substitution> out;
  detail::eval_from(ms, f, start, [&](const Substitution& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Reasoning rules

/// `option : context => action.`
struct ReasoningRule {
  Term option;
  ReasoningFormula context;
  Term action;
  std::size_t line = 0;

  std::string to_string() const {
    return option.to_string() + " : " + context.to_string() + " => " + action.to_string() + ".";
  }
};

inline bool is_action_term(const Term& a) {
  return a.has_functor("enact", 1) || a.has_functor("deact", 1) || a.has_functor("commit", 1) ||
         a.has_functor("drop", 1) || a.has_functor("send", 2);
}

namespace detail {

class RuleReader {
public:
  explicit RuleReader(Lexer& lex) : lex_(lex), terms_(lex) {}

  std::vector<ReasoningRule> program() {
    std::vector<ReasoningRule> rules;
    while (!lex_.at_end()) rules.push_back(rule());
    return rules;
  }

private:
  ReasoningRule rule() {
    ReasoningRule r;
    r.line = lex_.peek().line;
    std::size_t col = lex_.peek().column;
    r.option = terms_.term();
    if (!OptionTerm::well_formed(r.option, true))
      throw SyntaxError("not an option pattern: " + r.option.to_string(), r.line, col);
    lex_.expect(":");
    r.context = context();
    lex_.expect("=>");
    std::size_t aline = lex_.peek().line, acol = lex_.peek().column;
    r.action = terms_.term();
    if (!is_action_term(r.action))
      throw SyntaxError("not an action: " + r.action.to_string(), aline, acol);
    lex_.expect(".");

    std::set<std::string> bound = r.option.variables();
    r.context.collect_binding_variables(bound);
    for (const auto& v : r.action.variables()) {
      if (!bound.count(v))
        throw UnboundActionVariable("line " + std::to_string(r.line) + ": variable " + v +
                                    " in action " + r.action.to_string() + " is not bound");
    }
    return r;
  }

  ReasoningFormula context() {
    ReasoningFormula f = formula();
    while (lex_.accept(",")) f = ReasoningFormula::conj(std::move(f), formula());
    return f;
  }

  ReasoningFormula formula() {
    if (lex_.accept("~")) {
      if (lex_.accept("(")) {
        ReasoningFormula inner = context();
        lex_.expect(")");
        return ReasoningFormula::negate(std::move(inner));
      }
      return ReasoningFormula::negate(formula());
    }
    if (lex_.accept("(")) {
      ReasoningFormula inner = context();
      lex_.expect(")");
      return inner;
    }
    const Token& t = lex_.peek();
    if (t.kind != TokenKind::Atom) lex_.fail("expected a reasoning formula, found " + Lexer::describe(t));
    std::string head = lex_.next().text;
    if (head == "true") return ReasoningFormula::top();
    if (head != "org" && head != "opt" && head != "bel" && head != "goal")
      lex_.fail("unknown reasoning formula '" + head + "'");
    lex_.expect("(");
    ReasoningFormula out;
    if (head == "bel") {
      out = ReasoningFormula::bel(terms_.query());
    } else {
      Term p = terms_.term();
      out = head == "org" ? ReasoningFormula::org(std::move(p))
            : head == "opt" ? ReasoningFormula::opt(std::move(p))
                            : ReasoningFormula::goal(std::move(p));
    }
    lex_.expect(")");
    return out;
  }

  Lexer& lex_;
  logic::TermReader terms_;
};

} // namespace detail

inline std::vector<ReasoningRule> parse_aorta_program(std::string_view text) {
  Lexer lex(text);
  detail::RuleReader reader(lex);
  return reader.program();
}

// ---------------------------------------------------------------------------
// Agents

struct Message {
  std::string sender;
  std::string recipient;
  Term content;

  std::string to_string() const { return sender + "->" + recipient + ":" + content.to_string(); }
  friend bool operator==(const Message&, const Message&) = default;
};

struct Mailbox {
  std::deque<Message> in;
  std::deque<Message> out;
};

enum class Phase { ObligationCheck, OptionGeneration, ActionExecution };

using RuleSet = std::shared_ptr<const std::vector<ReasoningRule>>;

struct AortaAgent {
  static constexpr Phase pipeline[] = {Phase::ObligationCheck, Phase::OptionGeneration,
                                       Phase::ActionExecution};

  std::string name;
  MentalState ms;
  RuleSet rules = std::make_shared<const std::vector<ReasoningRule>>();
  Mailbox mailbox;
  bool changed = false;

  Term self() const { return logic::atom(name); }
};

// ---------------------------------------------------------------------------
// Obligation check

inline AortaAgent check_obligations(AortaAgent agent) {
  const MentalState before = agent.ms;
  const Term self = agent.self();

  auto [cb, ce] = before.org.with_functor("cond", 4);
  for (auto it = cb; it != ce; ++it) {
    const Term& cond = *it;
    const Term& role = cond.arg(0);
    if (!before.org.contains(logic::compound("rea", {self, role}))) continue;
    auto condition = belief_query(cond.arg(3));
    if (!condition) continue;
    logic::for_each_solution(before.beliefs, *condition, {}, [&](const Substitution& s) {
      Term obj = s.apply(cond.arg(1));
      Term deadline = s.apply(cond.arg(2));
      if (!obj.is_ground() || !deadline.is_ground()) return true;
      if (belief_formula_holds(before.beliefs, obj)) return true;
      Term existing = logic::compound("obl", {self, role, obj, logic::var("_D")});
      bool active = false;
      logic::for_each_solution(agent.ms.org, QueryGoal{{logic::Positive{existing}}}, {},
                               [&](const Substitution&) {
                                 active = true;
                                 return false;
                               });
      if (active || agent.ms.org.contains(logic::compound("viol", {self, role, obj}))) return true;
      agent.ms.org.insert(logic::compound("obl", {self, role, obj, deadline}));
      return true;
    });
  }

  auto [ob, oe] = before.org.with_functor("obl", 4);
  for (auto it = ob; it != oe; ++it) {
    const Term& obl = *it;
    if (obl.arg(0) != self) continue;
    if (belief_formula_holds(before.beliefs, obl.arg(2))) {
      agent.ms.org.erase(obl);
    } else if (belief_formula_holds(before.beliefs, obl.arg(3))) {
      agent.ms.org.erase(obl);
      agent.ms.org.insert(logic::compound("viol", {self, obl.arg(1), obl.arg(2)}));
    }
  }
  return agent;
}

// ---------------------------------------------------------------------------
// Option generation

namespace detail {

inline bool believes(const FactBase& beliefs, const Term& t) {
  return logic::holds(beliefs, QueryGoal{{logic::Positive{t}}});
}

} // namespace detail

/// Options derived from (Σa, Γa, Σo); independent of the previous Γo.
inline FactBase compute_options(const std::string& name, const MentalState& ms) {
  FactBase out;
  const Term self = logic::atom(name);
  auto enacts = [&](const Term& role) { return ms.org.contains(logic::compound("rea", {self, role})); };

  // enactment and deactment
  auto [rb, re] = ms.org.with_functor("role", 2);
  for (auto it = rb; it != re; ++it) {
    const Term& role = it->arg(0);
    const auto& objectives = it->arg(1).args();
    if (!enacts(role)) {
      bool wanted = std::any_of(ms.goals.begin(), ms.goals.end(), [&](const Term& g) {
        return g == role || std::find(objectives.begin(), objectives.end(), g) != objectives.end();
      });
      if (wanted) out.insert(OptionTerm::role(role).to_term());
    } else {
      bool fulfilled = std::all_of(objectives.begin(), objectives.end(),
                                   [&](const Term& o) { return detail::believes(ms.beliefs, o); });
      if (fulfilled) out.insert(OptionTerm::role(role).to_term());
    }
  }

  // obligations
  auto [ob, oe] = ms.org.with_functor("obl", 4);
  for (auto it = ob; it != oe; ++it) {
    if (it->arg(0) != self) continue;
    if (!belief_formula_holds(ms.beliefs, it->arg(2)))
      out.insert(OptionTerm::objective(it->arg(2)).to_term());
  }

  // delegation and information
  auto [db, de] = ms.org.with_functor("dep", 3);
  for (auto it = db; it != de; ++it) {
    const Term& dependent = it->arg(0);
    const Term& dependee = it->arg(1);
    const Term& objective = it->arg(2);
    bool achieved = detail::believes(ms.beliefs, objective);
    if (enacts(dependent) && !achieved)
      out.insert(OptionTerm::send(dependee, Ilf::Achieve, objective).to_term());
    if (enacts(dependee) && achieved)
      out.insert(OptionTerm::send(dependent, Ilf::Tell, objective).to_term());
  }

  auto [ab, ae] = ms.org.with_functor("rea", 2);
  for (auto it = ab; it != ae; ++it) {
    if (it->arg(0) != self) continue;
    out.insert(OptionTerm::send(any_role(), Ilf::Tell, logic::compound("org", {*it})).to_term());
  }
  return out;
}

inline AortaAgent generate_options(AortaAgent agent) {
  agent.ms.options = compute_options(agent.name, agent.ms);
  return agent;
}

// ---------------------------------------------------------------------------
// Action execution

struct ActionOutcome {
  AortaAgent agent;
  std::optional<Term> action;
  std::optional<Message> message;
};

namespace detail {

/// Actions that would leave the mental state untouched are not applicable.
inline bool applicable(const AortaAgent& agent, const Term& action) {
  const Term self = agent.self();
  if (action.has_functor("enact", 1))
    return !agent.ms.org.contains(logic::compound("rea", {self, action.arg(0)}));
  if (action.has_functor("deact", 1))
    return agent.ms.org.contains(logic::compound("rea", {self, action.arg(0)}));
  if (action.has_functor("commit", 1)) return !agent.ms.goals.contains(action.arg(0));
  if (action.has_functor("drop", 1)) return agent.ms.goals.contains(action.arg(0));
  return action.has_functor("send", 2);
}

inline bool valid_message_content(const Term& c) {
  return c.has_functor("org", 1) || c.has_functor("bel", 1) || c.has_functor("goal", 1);
}

} // namespace detail

/// Fires at most one action: rules in textual order, options in canonical
/// order, context solutions in enumeration order.
inline ActionOutcome execute_action(AortaAgent agent, std::span<const std::string> registry) {
  std::optional<Term> fired;
  for (const auto& rule : *agent.rules) {
    for (const auto& option : agent.ms.options) {
      auto theta = logic::unify(rule.option, option);
      if (!theta) continue;
      for_each_solution(agent.ms, rule.context, *theta, [&](const Substitution& s) {
        Term action = s.apply(rule.action);
        if (!action.is_ground())
          throw UnboundActionVariable("action not ground after matching: " + action.to_string());
        if (!detail::applicable(agent, action)) return true;
        fired = std::move(action);
        return false;
      });
      if (fired) break;
    }
    if (fired) break;
  }

  ActionOutcome out{std::move(agent), fired, std::nullopt};
  if (!fired) return out;

  AortaAgent& a = out.agent;
  const Term& act = *fired;
  const Term self = a.self();
  if (act.has_functor("enact", 1)) {
    a.ms.org.insert(logic::compound("rea", {self, act.arg(0)}));
  } else if (act.has_functor("deact", 1)) {
    a.ms.org.erase(logic::compound("rea", {self, act.arg(0)}));
  } else if (act.has_functor("commit", 1)) {
    a.ms.goals.insert(act.arg(0));
  } else if (act.has_functor("drop", 1)) {
    a.ms.goals.erase(act.arg(0));
  } else if (act.has_functor("send", 2)) {
    const Term& to = act.arg(0);
    if (!to.is_atom() || std::find(registry.begin(), registry.end(), to.name()) == registry.end())
      throw UnknownRecipient("unknown recipient " + to.to_string() + " in " + act.to_string());
    if (!detail::valid_message_content(act.arg(1)))
      throw Error("message content must be org(..), bel(..) or goal(..): " + act.to_string());
    Message m{a.name, to.name(), act.arg(1)};
    a.ms.beliefs.insert(logic::compound("sent", {to, act.arg(1)}));
    a.mailbox.out.push_back(m);
    out.message = std::move(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full cycle

struct CycleResult {
  AortaAgent agent;
  std::vector<Message> outbox;
  std::optional<Term> action;
};

/// Applies one incoming message to the mental state.
inline void receive(MentalState& ms, const Message& m) {
  const Term& c = m.content;
  if (c.has_functor("org", 1)) {
    if (!OrgSpec::is_dynamic_functor(c.arg(0)))
      throw Error("organizational message must carry rea/obl/viol: " + c.to_string());
    ms.org.insert(c.arg(0));
  } else if (c.has_functor("bel", 1)) {
    ms.beliefs.insert(c.arg(0));
  } else if (c.has_functor("goal", 1)) {
    ms.goals.insert(c.arg(0));
  } else {
    throw Error("unrecognised message content: " + c.to_string());
  }
}

/// Messages, then obligation check, option generation and action execution.
inline CycleResult aorta_cycle(AortaAgent agent, std::span<const Message> incoming,
                               std::span<const std::string> registry) {
  const MentalState start = agent.ms;
  for (const auto& m : agent.mailbox.in) receive(agent.ms, m);
  agent.mailbox.in.clear();
  for (const auto& m : incoming) receive(agent.ms, m);

  for (Phase p : AortaAgent::pipeline) {
    switch (p) {
    case Phase::ObligationCheck: agent = check_obligations(std::move(agent)); break;
    case Phase::OptionGeneration: agent = generate_options(std::move(agent)); break;
    case Phase::ActionExecution: break;
    }
  }
  ActionOutcome outcome = execute_action(std::move(agent), registry);

  CycleResult result{std::move(outcome.agent), {}, std::move(outcome.action)};
  auto& out = result.agent.mailbox.out;
  result.outbox.assign(out.begin(), out.end());
  out.clear();
  result.agent.changed = !(result.agent.ms == start);
  return result;
}

} // namespace aortamc::aorta
