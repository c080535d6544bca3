#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aortamc/errors.hpp"
#include "aortamc/lexer.hpp"
#include "aortamc/term.hpp"

namespace aortamc::apl {

using logic::FactBase;
using logic::QueryGoal;
using logic::Term;

struct Plan {
  Term trigger;             // achieve goal
  QueryGoal guard;          // empty for {True}
  std::vector<Term> body;   // belief additions, in order
};

struct AplProgram {
  std::string name;
  std::vector<Term> initial_beliefs;
  std::vector<Term> belief_rules; // always empty: not supported
  std::vector<Term> initial_goals;
  std::vector<Plan> plans;
};

struct Intention {
  Term goal;
  std::size_t plan = 0;
  std::vector<Term> body; // instantiated
  std::size_t pc = 0;

  friend bool operator==(const Intention&, const Intention&) = default;
};

/// Interpreter state beyond the belief and goal bases, which are shared
/// with the AORTA component.
struct AplAgentState {
  std::vector<Term> pending;          // adopted but not yet intended, adoption order
  std::vector<Intention> intentions;  // running, creation order
  std::vector<Term> stuck;            // pending goals with no applicable plan at the last step

  bool intends(const Term& goal) const {
    return std::any_of(intentions.begin(), intentions.end(),
                       [&](const Intention& i) { return i.goal == goal; });
  }

  friend bool operator==(const AplAgentState& a, const AplAgentState& b) {
    return a.pending == b.pending && a.intentions == b.intentions;
  }
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class ProgramReader {
public:
  explicit ProgramReader(Lexer& lex) : lex_(lex), terms_(lex) {}

  std::vector<AplProgram> programs() {
    std::vector<AplProgram> out;
    if (lex_.peek().is_word("GWENDOLEN")) lex_.next();
    while (!lex_.at_end()) {
      std::string header = read_header();
      if (header != "name") lex_.fail("expected ':name:' header, found ':" + header + ":'");
      out.push_back(program());
    }
    return out;
  }

private:
  AplProgram program() {
    AplProgram p;
    if (lex_.peek().kind != TokenKind::Atom) lex_.fail("expected agent name");
    p.name = lex_.next().text;
    while (!lex_.at_end() && !next_is_name_header()) {
      std::size_t line = lex_.peek().line, col = lex_.peek().column;
      std::string header = read_header();
      if (header == "Initial Beliefs") {
        while (!at_section_end()) {
          Term b = terms_.term();
          if (!b.is_ground()) lex_.fail("initial belief must be ground");
          p.initial_beliefs.push_back(std::move(b));
          if (!lex_.accept(",")) lex_.accept(".");
        }
      } else if (header == "Belief Rules") {
        if (!at_section_end())
          throw UnsupportedFeature("belief rules are not supported (agent " + p.name + ")");
      } else if (header == "Initial Goals") {
        while (!at_section_end()) {
          Term g = terms_.term();
          if (!g.is_ground()) lex_.fail("initial goal must be ground");
          goal_kind();
          p.initial_goals.push_back(std::move(g));
          if (!lex_.accept(",")) lex_.accept(".");
        }
      } else if (header == "Plans") {
        while (!at_section_end()) p.plans.push_back(plan());
      } else {
        throw SyntaxError("unknown section ':" + header + ":'", line, col);
      }
    }
    return p;
  }

  Plan plan() {
    Plan pl;
    if (!lex_.accept("+")) {
      if (lex_.peek().is("-")) throw UnsupportedFeature("deletion events are not supported");
      lex_.fail("expected '+!' plan trigger");
    }
    if (!lex_.accept("!")) throw UnsupportedFeature("only achieve-goal triggers are supported");
    pl.trigger = terms_.term();
    goal_kind();
    if (lex_.accept(":")) pl.guard = guard();
    lex_.expect("<-");
    do {
      pl.body.push_back(body_step());
    } while (lex_.accept(","));
    lex_.expect(";");
    return pl;
  }

  QueryGoal guard() {
    QueryGoal q;
    lex_.expect("{");
    if (lex_.peek().is_word("True")) {
      lex_.next();
      lex_.expect("}");
      return q;
    }
    do {
      bool negated = lex_.accept("~");
      if (!lex_.peek().is_word("B"))
        throw UnsupportedFeature("only belief guards (B f / ~B f) are supported");
      lex_.next();
      Term t = terms_.term();
      if (negated)
        q.conjuncts.push_back(logic::Negated{std::move(t)});
      else
        q.conjuncts.push_back(logic::Positive{std::move(t)});
    } while (lex_.accept(","));
    lex_.expect("}");
    return q;
  }

  Term body_step() {
    if (lex_.accept("+")) {
      if (lex_.peek().is("!")) throw UnsupportedFeature("subgoal body steps are not supported");
      return terms_.term();
    }
    if (lex_.peek().is("-")) throw UnsupportedFeature("belief removal body steps are not supported");
    throw UnsupportedFeature("unsupported plan body step at " + std::to_string(lex_.peek().line) +
                             ":" + std::to_string(lex_.peek().column));
  }

  void goal_kind() {
    lex_.expect("[");
    if (lex_.peek().kind != TokenKind::Atom) lex_.fail("expected goal kind");
    std::string kind = lex_.next().text;
    if (kind != "achieve") throw UnsupportedFeature("only [achieve] goals are supported, found " + kind);
    lex_.expect("]");
  }

  std::string read_header() {
    lex_.expect(":");
    std::string out;
    while (!lex_.peek().is(":")) {
      const Token& t = lex_.peek();
      if (t.kind != TokenKind::Atom && t.kind != TokenKind::Variable)
        lex_.fail("malformed section header");
      if (!out.empty()) out += ' ';
      out += lex_.next().text;
    }
    lex_.expect(":");
    return out;
  }

  bool at_section_end() const { return lex_.at_end() || lex_.peek().is(":"); }

  bool next_is_name_header() {
    // Headers are only ever followed by a word; ':name:' starts a new program.
    if (!lex_.peek().is(":")) return false;
    Lexer probe = lex_;
    probe.next();
    return probe.peek().is_word("name");
  }

  Lexer& lex_;
  logic::TermReader terms_;
};

} // namespace detail

/// Parses a Gwendolen-subset source holding one or more `:name:` blocks.
inline std::vector<AplProgram> parse_apl(std::string_view text) {
  Lexer lex(text);
  detail::ProgramReader reader(lex);
  return reader.programs();
}

// ---------------------------------------------------------------------------
// Interpreter

/// One reasoning step over the shared belief/goal bases. Returns whether
/// anything (bases or interpreter state) changed.
inline bool apl_step(FactBase& beliefs, FactBase& goals, AplAgentState& state,
                     std::span<const Plan> plans) {
  const AplAgentState before = state;
  const FactBase beliefs_before = beliefs;
  const FactBase goals_before = goals;

  // pick up goals adopted since the last step; forget dropped ones
  std::erase_if(state.pending, [&](const Term& g) { return !goals.contains(g); });
  std::erase_if(state.intentions, [&](const Intention& i) { return !goals.contains(i.goal); });
  for (const auto& g : goals) {
    if (std::find(state.pending.begin(), state.pending.end(), g) == state.pending.end() &&
        !state.intends(g))
      state.pending.push_back(g);
  }

  // (1) achieved goals are dropped together with their intentions
  for (auto it = goals.begin(); it != goals.end();) {
    if (beliefs.contains(*it)) {
      const Term g = *it;
      it = std::next(it);
      goals.erase(g);
      std::erase(state.pending, g);
      std::erase_if(state.intentions, [&](const Intention& i) { return i.goal == g; });
    } else {
      ++it;
    }
  }

  // (2) intend the first pending goal that has an applicable plan
  state.stuck.clear();
  bool intended = false;
  for (std::size_t k = 0; k < state.pending.size() && !intended; ++k) {
    const Term goal = state.pending[k];
    for (std::size_t p = 0; p < plans.size(); ++p) {
      auto theta = logic::unify(plans[p].trigger, goal);
      if (!theta) continue;
      std::optional<logic::Substitution> sigma;
      logic::for_each_solution(beliefs, plans[p].guard, *theta, [&](const logic::Substitution& s) {
        sigma = s;
        return false;
      });
      if (!sigma) continue;
      Intention in{goal, p, {}, 0};
      for (const auto& step : plans[p].body) in.body.push_back(sigma->apply(step));
      state.intentions.push_back(std::move(in));
      state.pending.erase(state.pending.begin() + static_cast<std::ptrdiff_t>(k));
      intended = true;
      break;
    }
    if (!intended) state.stuck.push_back(goal);
  }

  // (3) otherwise advance the oldest intention by one body step
  if (!intended && !state.intentions.empty()) {
    Intention& in = state.intentions.front();
    const Term& step = in.body[in.pc];
    if (!step.is_ground()) throw Error("plan body step not ground: " + step.to_string());
    beliefs.insert(step);
    ++in.pc;
    if (in.pc == in.body.size()) {
      Term g = in.goal;
      state.intentions.erase(state.intentions.begin());
      if (goals.contains(g) && !beliefs.contains(g)) state.pending.push_back(std::move(g));
    }
  }

  return !(state == before) || !(beliefs == beliefs_before) || !(goals == goals_before);
}

} // namespace aortamc::apl
