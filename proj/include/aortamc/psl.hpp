#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aortamc/aorta.hpp"
#include "aortamc/errors.hpp"
#include "aortamc/lexer.hpp"
#include "aortamc/runtime.hpp"
#include "aortamc/term.hpp"

namespace aortamc::psl {

using logic::FactBase;
using logic::Term;

enum class Modality { B, G, A, I, P, Org, Opt };

inline std::string_view to_string(Modality m) {
  switch (m) {
  case Modality::B: return "B";
  case Modality::G: return "G";
  case Modality::A: return "A";
  case Modality::I: return "I";
  case Modality::P: return "P";
  case Modality::Org: return "Org";
  case Modality::Opt: return "Opt";
  }
  return "?";
}

inline std::optional<Modality> modality_from(std::string_view w) {
  if (w == "B") return Modality::B;
  if (w == "G") return Modality::G;
  if (w == "A") return Modality::A;
  if (w == "I") return Modality::I;
  if (w == "P") return Modality::P;
  if (w == "Org") return Modality::Org;
  if (w == "Opt") return Modality::Opt;
  return std::nullopt;
}

/// `M(agent, fact)`, or `P(fact)` with no agent.
struct ModalAtom {
  Modality modality = Modality::B;
  Term agent; // unused for P
  Term fact;

  bool is_ground() const { return (modality == Modality::P || agent.is_ground()) && fact.is_ground(); }

  std::string to_string() const {
    std::string out(psl::to_string(modality));
    out += '(';
    if (modality != Modality::P) out += agent.to_string() + ", ";
    return out + fact.to_string() + ")";
  }

  friend auto operator<=>(const ModalAtom& a, const ModalAtom& b) {
    if (auto c = a.modality <=> b.modality; c != 0) return c;
    if (auto c = a.agent <=> b.agent; c != 0) return c;
    return a.fact <=> b.fact;
  }
  friend bool operator==(const ModalAtom& a, const ModalAtom& b) { return (a <=> b) == 0; }
};

// ---------------------------------------------------------------------------
// Formulas

class Formula {
public:
  enum class Kind {
    True, False, Atom, Not, And, Or, Implies, Next, Until, Release, Eventually, Always,
    Forall // unexpanded macro; only seen between parsing and expansion
  };

  Formula() = default; // true

  static Formula truth() { return Formula(Kind::True); }
  static Formula falsity() { return Formula(Kind::False); }
  static Formula atom(ModalAtom a) {
    Formula f(Kind::Atom);
    f.atom_ = std::make_shared<const ModalAtom>(std::move(a));
    return f;
  }
  static Formula negate(Formula a) { return Formula(Kind::Not, {std::move(a)}); }
  static Formula conj(Formula a, Formula b) { return Formula(Kind::And, {std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return Formula(Kind::Or, {std::move(a), std::move(b)}); }
  static Formula implies(Formula a, Formula b) {
    return Formula(Kind::Implies, {std::move(a), std::move(b)});
  }
  static Formula next(Formula a) { return Formula(Kind::Next, {std::move(a)}); }
  static Formula until(Formula a, Formula b) { return Formula(Kind::Until, {std::move(a), std::move(b)}); }
  static Formula release(Formula a, Formula b) {
    return Formula(Kind::Release, {std::move(a), std::move(b)});
  }
  static Formula eventually(Formula a) { return Formula(Kind::Eventually, {std::move(a)}); }
  static Formula always(Formula a) { return Formula(Kind::Always, {std::move(a)}); }
  static Formula forall(Term pattern, std::string domain, Formula body) {
    Formula f(Kind::Forall, {std::move(body)});
    f.atom_ = std::make_shared<const ModalAtom>(
        ModalAtom{Modality::P, logic::atom(std::move(domain)), std::move(pattern)});
    return f;
  }

  /// Left-nested conjunction; the empty conjunction is `true`.
  static Formula conj_all(std::vector<Formula> parts) {
    if (parts.empty()) return truth();
    Formula out = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) out = conj(std::move(out), std::move(parts[i]));
    return out;
  }

  Kind kind() const noexcept { return kind_; }
  const ModalAtom& modal_atom() const { return *atom_; }
  const Term& forall_pattern() const { return atom_->fact; }
  const std::string& forall_domain() const { return atom_->agent.name(); }
  const Formula& lhs() const { return kids_->at(0); }
  const Formula& rhs() const { return kids_->at(1); }
  const Formula& sub() const { return kids_->at(0); }
  std::size_t arity() const noexcept { return kids_ ? kids_->size() : 0; }

  bool is_literal() const {
    return kind_ == Kind::Atom || kind_ == Kind::True || kind_ == Kind::False ||
           (kind_ == Kind::Not && sub().kind_ == Kind::Atom);
  }

  /// Negation only on atoms; no Implies/Eventually/Always.
  bool is_nnf() const {
    switch (kind_) {
    case Kind::True:
    case Kind::False:
    case Kind::Atom: return true;
    case Kind::Not: return sub().kind_ == Kind::Atom;
    case Kind::Implies:
    case Kind::Eventually:
    case Kind::Always:
    case Kind::Forall: return false;
    default:
      for (std::size_t i = 0; i < arity(); ++i)
        if (!(*kids_)[i].is_nnf()) return false;
      return true;
    }
  }

  void collect_atoms(std::vector<ModalAtom>& out) const {
    if (kind_ == Kind::Atom) {
      if (std::find(out.begin(), out.end(), *atom_) == out.end()) out.push_back(*atom_);
      return;
    }
    for (std::size_t i = 0; i < arity(); ++i) (*kids_)[i].collect_atoms(out);
  }

  /// Number of nodes in the syntax tree.
  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < arity(); ++i) n += (*kids_)[i].size();
    return n;
  }

  std::string to_string() const {
    switch (kind_) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: return atom_->to_string();
    case Kind::Not: return "~" + sub().to_string();
    case Kind::And: return "(" + lhs().to_string() + " && " + rhs().to_string() + ")";
    case Kind::Or: return "(" + lhs().to_string() + " || " + rhs().to_string() + ")";
    case Kind::Implies: return "(" + lhs().to_string() + " -> " + rhs().to_string() + ")";
    case Kind::Next: return "X " + sub().to_string();
    case Kind::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
    case Kind::Release: return "(" + lhs().to_string() + " R " + rhs().to_string() + ")";
    case Kind::Eventually: return "<> " + sub().to_string();
    case Kind::Always: return "[] " + sub().to_string();
    case Kind::Forall:
      return "(forall " + forall_pattern().to_string() + " in " + forall_domain() + ": " +
             sub().to_string() + ")";
    }
    return "?";
  }

  /// Applies a substitution to every atom.
  Formula substitute(const logic::Substitution& s) const {
    if (kind_ == Kind::Atom) {
      ModalAtom a = *atom_;
      a.agent = s.apply(a.agent);
      a.fact = s.apply(a.fact);
      return atom(std::move(a));
    }
    if (!kids_) return *this;
    std::vector<Formula> kids;
    for (const auto& k : *kids_) kids.push_back(k.substitute(s));
    Formula out(kind_, std::move(kids));
    if (kind_ == Kind::Forall)
      out.atom_ = std::make_shared<const ModalAtom>(
          ModalAtom{Modality::P, atom_->agent, s.apply(atom_->fact)});
    return out;
  }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.kind_ != b.kind_) return false;
    if ((a.kind_ == Kind::Atom || a.kind_ == Kind::Forall) && !(*a.atom_ == *b.atom_)) return false;
    if (a.arity() != b.arity()) return false;
    for (std::size_t i = 0; i < a.arity(); ++i)
      if (!((*a.kids_)[i] == (*b.kids_)[i])) return false;
    return true;
  }

private:
  explicit Formula(Kind k) : kind_(k) {}
  Formula(Kind k, std::vector<Formula> kids)
      : kind_(k), kids_(std::make_shared<const std::vector<Formula>>(std::move(kids))) {}

  Kind kind_ = Kind::True;
  std::shared_ptr<const ModalAtom> atom_;
  std::shared_ptr<const std::vector<Formula>> kids_;
};

// ---------------------------------------------------------------------------
// Negation normal form

inline Formula to_nnf(const Formula& f, bool negated = false) {
  using K = Formula::Kind;
  switch (f.kind()) {
  case K::True: return negated ? Formula::falsity() : Formula::truth();
  case K::False: return negated ? Formula::truth() : Formula::falsity();
  case K::Atom: return negated ? Formula::negate(f) : f;
  case K::Not: return to_nnf(f.sub(), !negated);
  case K::And:
    return negated ? Formula::disj(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                   : Formula::conj(to_nnf(f.lhs()), to_nnf(f.rhs()));
  case K::Or:
    return negated ? Formula::conj(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                   : Formula::disj(to_nnf(f.lhs()), to_nnf(f.rhs()));
  case K::Implies:
    return negated ? Formula::conj(to_nnf(f.lhs()), to_nnf(f.rhs(), true))
                   : Formula::disj(to_nnf(f.lhs(), true), to_nnf(f.rhs()));
  case K::Next: return Formula::next(to_nnf(f.sub(), negated));
  case K::Until:
    return negated ? Formula::release(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                   : Formula::until(to_nnf(f.lhs()), to_nnf(f.rhs()));
  case K::Release:
    return negated ? Formula::until(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                   : Formula::release(to_nnf(f.lhs()), to_nnf(f.rhs()));
  case K::Eventually: // <>a = true U a;  ~<>a = false R ~a
    return negated ? Formula::release(Formula::falsity(), to_nnf(f.sub(), true))
                   : Formula::until(Formula::truth(), to_nnf(f.sub()));
  case K::Always: // []a = false R a;  ~[]a = true U ~a
    return negated ? Formula::until(Formula::truth(), to_nnf(f.sub(), true))
                   : Formula::release(Formula::falsity(), to_nnf(f.sub()));
  case K::Forall: throw Error("unexpanded forall in formula");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Macro domains

/// What `forall` quantifies over: declared agents and the static org spec.
struct Domains {
  std::vector<std::string> agents;
  FactBase org;

  static Domains from(const runtime::MasState& s) {
    Domains d;
    for (const auto& a : s.agents) d.agents.push_back(a.name());
    if (!s.agents.empty())
      for (const auto& f : s.agents.front().aorta.ms.org)
        if (aorta::OrgSpec::is_static_functor(f)) d.org.insert(f);
    return d;
  }

  /// bel(x) -> x; anything else unchanged.
  static Term unwrap(const Term& t) { return t.has_functor("bel", 1) ? t.arg(0) : t; }

  std::vector<Term> elements(std::string_view domain) const {
    std::vector<Term> out;
    auto facts = [&](std::string_view name, std::size_t n) {
      std::vector<Term> fs;
      auto [b, e] = org.with_functor(name, n);
      fs.assign(b, e);
      return fs;
    };
    if (domain == "agents") {
      for (const auto& a : agents) out.push_back(logic::atom(a));
    } else if (domain == "roles") {
      for (const auto& r : facts("role", 2)) out.push_back(r.arg(0));
    } else if (domain == "dependencies") {
      out = facts("dep", 3);
    } else if (domain == "obligations") {
      for (const auto& a : agents)
        for (const auto& c : facts("cond", 4))
          out.push_back(logic::compound(
              "obl", {logic::atom(a), c.arg(0), unwrap(c.arg(1)), unwrap(c.arg(2))}));
    } else {
      throw Error("unknown forall domain: " + std::string(domain));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Parser

using PropertyTable = std::map<std::string, Formula, std::less<>>;

namespace detail {

/// Precedence, loosest first: `->` (right), `||`, `&&`, `U`/`R` (right),
/// then the prefix operators `~ <> [] X` and `forall`.
class FormulaReader {
public:
  FormulaReader(Lexer& lex, const Domains* domains, const PropertyTable* refs)
      : lex_(lex), terms_(lex), domains_(domains), refs_(refs) {}

  Formula formula() { return implication(); }

private:
  Formula implication() {
    Formula lhs = disjunction();
    if (lex_.accept("->")) return Formula::implies(std::move(lhs), implication());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (lex_.accept("||")) f = Formula::disj(std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = binary();
    while (lex_.accept("&&")) f = Formula::conj(std::move(f), binary());
    return f;
  }

  Formula binary() {
    Formula f = unary();
    if (lex_.peek().is_word("U")) {
      lex_.next();
      return Formula::until(std::move(f), binary());
    }
    if (lex_.peek().is_word("R")) {
      lex_.next();
      return Formula::release(std::move(f), binary());
    }
    return f;
  }

  Formula unary() {
    const Token& t = lex_.peek();
    if (lex_.accept("~") || lex_.accept("!")) return Formula::negate(unary());
    if (lex_.accept("<>")) return Formula::eventually(unary());
    if (t.is("[")) {
      lex_.next();
      lex_.expect("]");
      return Formula::always(unary());
    }
    if (t.is_word("X")) {
      lex_.next();
      return Formula::next(unary());
    }
    if (t.is_word("forall")) return forall();
    return primary();
  }

  // forall <pattern> in <domain> : <formula>
  Formula forall() {
    lex_.next();
    Term pattern = terms_.term();
    if (!lex_.peek().is_word("in")) lex_.fail("expected 'in' after forall pattern");
    lex_.next();
    if (lex_.peek().kind != TokenKind::Atom) lex_.fail("expected a forall domain");
    Token domain = lex_.next();
    lex_.expect(":");
    Formula body = implication();
    if (!domains_) throw SyntaxError("forall needs agent/org domains", domain.line, domain.column);
    static constexpr std::string_view known[] = {"agents", "roles", "dependencies", "obligations"};
    if (std::find(std::begin(known), std::end(known), domain.text) == std::end(known))
      throw SyntaxError("unknown forall domain: " + domain.text, domain.line, domain.column);
    return Formula::forall(std::move(pattern), domain.text, std::move(body));
  }

  Formula primary() {
    const Token& t = lex_.peek();
    if (t.is("(")) {
      lex_.next();
      Formula f = implication();
      lex_.expect(")");
      return f;
    }
    if (t.is_word("true")) {
      lex_.next();
      return Formula::truth();
    }
    if (t.is_word("false")) {
      lex_.next();
      return Formula::falsity();
    }
    if (t.is("@")) {
      lex_.next();
      Token name = lex_.next();
      if (name.kind != TokenKind::Atom && name.kind != TokenKind::Variable &&
          name.kind != TokenKind::Integer)
        throw SyntaxError("expected a property name after '@'", name.line, name.column);
      if (refs_)
        if (auto it = refs_->find(name.text); it != refs_->end()) return it->second;
      throw SyntaxError("unknown property @" + name.text, name.line, name.column);
    }
    if (t.kind == TokenKind::Variable || t.kind == TokenKind::Atom) {
      if (auto m = modality_from(t.text)) {
        lex_.next();
        lex_.expect("(");
        ModalAtom a;
        a.modality = *m;
        if (*m != Modality::P) {
          a.agent = terms_.term();
          if (!(a.agent.is_atom() || a.agent.is_var())) lex_.fail("agent must be a name");
          lex_.expect(",");
        }
        a.fact = terms_.term();
        lex_.expect(")");
        return Formula::atom(std::move(a));
      }
    }
    lex_.fail("expected a formula but found " + Lexer::describe(t));
  }

  Lexer& lex_;
  logic::TermReader terms_;
  const Domains* domains_;
  const PropertyTable* refs_;
};

/// Expands `forall` outside-in so inner patterns see outer bindings. Each
/// domain element unifying with the pattern contributes one conjunct.
inline Formula expand(const Formula& f, const Domains& domains) {
  using K = Formula::Kind;
  switch (f.kind()) {
  case K::True:
  case K::False:
  case K::Atom: return f;
  case K::Forall: {
    std::vector<Formula> parts;
    for (const auto& e : domains.elements(f.forall_domain()))
      if (auto s = logic::unify(f.forall_pattern(), e)) parts.push_back(expand(f.sub().substitute(*s), domains));
    return Formula::conj_all(std::move(parts));
  }
  case K::Not: return Formula::negate(expand(f.sub(), domains));
  case K::Next: return Formula::next(expand(f.sub(), domains));
  case K::Eventually: return Formula::eventually(expand(f.sub(), domains));
  case K::Always: return Formula::always(expand(f.sub(), domains));
  case K::And: return Formula::conj(expand(f.lhs(), domains), expand(f.rhs(), domains));
  case K::Or: return Formula::disj(expand(f.lhs(), domains), expand(f.rhs(), domains));
  case K::Implies: return Formula::implies(expand(f.lhs(), domains), expand(f.rhs(), domains));
  case K::Until: return Formula::until(expand(f.lhs(), domains), expand(f.rhs(), domains));
  case K::Release: return Formula::release(expand(f.lhs(), domains), expand(f.rhs(), domains));
  }
  return f;
}

inline void require_ground(const Formula& f, std::size_t line = 0) {
  std::vector<ModalAtom> atoms;
  f.collect_atoms(atoms);
  for (const auto& a : atoms)
    if (!a.is_ground())
      throw NonGroundAtom((line ? "line " + std::to_string(line) + ": " : std::string()) +
                          "atom is not ground: " + a.to_string());
}

} // namespace detail

/// Parses one formula. `forall` needs `domains`; `@name` needs `refs`.
inline Formula parse_psl(std::string_view text, const Domains* domains = nullptr,
                         const PropertyTable* refs = nullptr) {
  Lexer lex(text);
  detail::FormulaReader reader(lex, domains, refs);
  Formula f = reader.formula();
  if (!lex.at_end()) lex.fail("trailing input after formula: " + Lexer::describe(lex.peek()));
  if (domains) f = detail::expand(f, *domains);
  detail::require_ground(f);
  return f;
}

inline Formula parse_psl(std::string_view text, const Domains& domains) {
  return parse_psl(text, &domains, nullptr);
}

struct Property {
  std::string name;
  Formula formula;
  bool expect_fail = false;
  std::size_t line = 0;
};

/// One `name := formula` per line; blank lines and lines starting with `#`
/// or `%` are ignored. A name prefixed `expect-fail:` marks a property that
/// should be violated. Later properties may refer to earlier ones as `@name`.
inline std::vector<Property> parse_properties(std::string_view text, const Domains& domains) {
  std::vector<Property> out;
  PropertyTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
    auto sep = line.find(":=");
    if (sep == std::string::npos) throw SyntaxError("expected 'name := formula'", lineno, first + 1);

    Property p;
    p.line = lineno;
    std::string name = line.substr(first, sep - first);
    name.erase(name.find_last_not_of(" \t") + 1);
    constexpr std::string_view marker = "expect-fail:";
    if (name.starts_with(marker)) {
      p.expect_fail = true;
      name.erase(0, marker.size());
      name.erase(0, name.find_first_not_of(" \t"));
    }
    if (name.empty()) throw SyntaxError("empty property name", lineno, first + 1);
    if (table.count(name)) throw SyntaxError("duplicate property name: " + name, lineno, first + 1);
    p.name = name;

    std::string body = line.substr(sep + 2);
    try {
      p.formula = parse_psl(body, &domains, &table);
    } catch (const SyntaxError& e) {
      throw SyntaxError(e.message(), lineno, sep + 2 + e.column());
    } catch (const NonGroundAtom& e) {
      throw NonGroundAtom("line " + std::to_string(lineno) + ": " + e.what());
    }
    table.emplace(p.name, p.formula);
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Atom evaluation

namespace detail {

inline Term normalize_org(const Term& t) {
  if (t.has_functor("obl", 4))
    return logic::compound("obl", {t.arg(0), t.arg(1), Domains::unwrap(t.arg(2)),
                                   Domains::unwrap(t.arg(3))});
  if (t.has_functor("viol", 3))
    return logic::compound("viol", {t.arg(0), t.arg(1), Domains::unwrap(t.arg(2))});
  return t;
}

} // namespace detail

/// Truth of a ground modal atom in a global state.
inline bool eval_atom(const runtime::MasState& s, const ModalAtom& a) {
  if (!a.is_ground()) throw NonGroundAtom("atom is not ground: " + a.to_string());
  if (a.modality == Modality::P) return s.percepts.contains(a.fact);
  if (!a.agent.is_atom()) throw UnknownAgent("not an agent name: " + a.agent.to_string());
  const runtime::AgentState& ag = s.agent(a.agent.name());
  const auto& ms = ag.aorta.ms;
  switch (a.modality) {
  case Modality::B: return ms.beliefs.contains(a.fact);
  case Modality::G: return ms.goals.contains(a.fact);
  case Modality::Opt: return ms.options.contains(a.fact);
  case Modality::A: return ag.last_action && *ag.last_action == a.fact;
  case Modality::I: return ms.goals.contains(a.fact) && ag.apl.intends(a.fact);
  case Modality::Org: {
    if (ms.org.contains(a.fact)) return true;
    Term want = detail::normalize_org(a.fact);
    if (!(a.fact.has_functor("obl", 4) || a.fact.has_functor("viol", 3))) return false;
    auto [b, e] = ms.org.with_functor(a.fact.name(), a.fact.arity());
    return std::any_of(b, e, [&](const Term& f) { return detail::normalize_org(f) == want; });
  }
  case Modality::P: break;
  }
  return false;
}

} // namespace aortamc::psl
