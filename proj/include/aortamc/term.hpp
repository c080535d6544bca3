#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "aortamc/errors.hpp"
#include "aortamc/lexer.hpp"

namespace aortamc::logic {

/// First-order term. Atoms are the arity-0 case of a structure; compounds
/// always carry at least one argument.
class Term {
public:
  enum class Kind : std::uint8_t { Var, Int, Atom, Compound, List };

  Term() : kind_(Kind::Atom), name_("none") {}

  static Term atom(std::string name) { return Term(Kind::Atom, std::move(name), 0, {}); }
  static Term var(std::string name) { return Term(Kind::Var, std::move(name), 0, {}); }
  static Term integer(std::int64_t v) { return Term(Kind::Int, {}, v, {}); }
  static Term list(std::vector<Term> elements) {
    return Term(Kind::List, {}, 0, std::move(elements));
  }
  static Term compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return atom(std::move(functor));
    return Term(Kind::Compound, std::move(functor), 0, std::move(args));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_var() const noexcept { return kind_ == Kind::Var; }
  bool is_int() const noexcept { return kind_ == Kind::Int; }
  bool is_atom() const noexcept { return kind_ == Kind::Atom; }
  bool is_compound() const noexcept { return kind_ == Kind::Compound; }
  bool is_list() const noexcept { return kind_ == Kind::List; }
  bool is_struct() const noexcept { return kind_ == Kind::Atom || kind_ == Kind::Compound; }

  /// Functor for atoms/compounds, variable name for variables.
  const std::string& name() const noexcept { return name_; }
  std::int64_t value() const noexcept { return value_; }
  /// Arguments of a compound, or elements of a list.
  const std::vector<Term>& args() const noexcept { return args_; }
  std::size_t arity() const noexcept { return is_struct() ? args_.size() : 0; }
  const Term& arg(std::size_t i) const { return args_.at(i); }

  bool has_functor(std::string_view functor, std::size_t n) const noexcept {
    return is_struct() && name_ == functor && args_.size() == n;
  }

  bool is_ground() const {
    if (kind_ == Kind::Var) return false;
    return std::all_of(args_.begin(), args_.end(), [](const Term& a) { return a.is_ground(); });
  }

  void collect_variables(std::set<std::string>& out) const {
    if (kind_ == Kind::Var) {
      out.insert(name_);
      return;
    }
    for (const auto& a : args_) a.collect_variables(out);
  }

  std::set<std::string> variables() const {
    std::set<std::string> out;
    collect_variables(out);
    return out;
  }

  bool contains_var(const std::string& v) const {
    if (kind_ == Kind::Var) return name_ == v;
    return std::any_of(args_.begin(), args_.end(), [&](const Term& a) { return a.contains_var(v); });
  }

  std::string to_string() const {
    std::string out;
    write(out);
    return out;
  }

  void write(std::string& out) const {
    switch (kind_) {
    case Kind::Var:
    case Kind::Atom:
      out += name_;
      break;
    case Kind::Int:
      out += std::to_string(value_);
      break;
    case Kind::Compound:
      out += name_;
      out += '(';
      for (std::size_t i = 0; i < args_.size(); ++i) {
        if (i) out += ',';
        args_[i].write(out);
      }
      out += ')';
      break;
    case Kind::List:
      out += '[';
      for (std::size_t i = 0; i < args_.size(); ++i) {
        if (i) out += ',';
        args_[i].write(out);
      }
      out += ']';
      break;
    }
  }

  /// Canonical order: variables < integers < structures < lists; structures
  /// by functor name, then arity, then argument-wise.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    int ca = a.order_class(), cb = b.order_class();
    if (ca != cb) return ca <=> cb;
    switch (a.kind_) {
    case Kind::Var:
      return a.name_ <=> b.name_;
    case Kind::Int:
      return a.value_ <=> b.value_;
    case Kind::Atom:
    case Kind::Compound:
      if (auto c = a.name_ <=> b.name_; c != 0) return c;
      if (auto c = a.args_.size() <=> b.args_.size(); c != 0) return c;
      break;
    case Kind::List:
      break;
    }
    return std::lexicographical_compare_three_way(a.args_.begin(), a.args_.end(), b.args_.begin(),
                                                  b.args_.end());
  }

  friend bool operator==(const Term& a, const Term& b) { return (a <=> b) == 0; }

  int order_class() const noexcept {
    switch (kind_) {
    case Kind::Var: return 0;
    case Kind::Int: return 1;
    case Kind::Atom:
    case Kind::Compound: return 2;
    case Kind::List: return 3;
    }
    return 3;
  }

private:
  Term(Kind k, std::string name, std::int64_t v, std::vector<Term> args)
      : kind_(k), name_(std::move(name)), value_(v), args_(std::move(args)) {}

  Kind kind_;
  std::string name_;
  std::int64_t value_ = 0;
  std::vector<Term> args_;
};

inline Term atom(std::string name) { return Term::atom(std::move(name)); }
inline Term var(std::string name) { return Term::var(std::move(name)); }
inline Term compound(std::string functor, std::vector<Term> args) {
  return Term::compound(std::move(functor), std::move(args));
}

/// Key for range lookups of all facts with a given functor/arity.
struct FunctorKey {
  std::string_view name;
  std::size_t arity;
};

struct TermLess {
  using is_transparent = void;
  bool operator()(const Term& a, const Term& b) const { return a < b; }
  bool operator()(const Term& a, const FunctorKey& k) const {
    if (a.order_class() != 2) return a.order_class() < 2;
    if (auto c = std::string_view(a.name()) <=> k.name; c != 0) return c < 0;
    return a.arity() < k.arity;
  }
  bool operator()(const FunctorKey& k, const Term& a) const {
    if (a.order_class() != 2) return a.order_class() > 2;
    if (auto c = k.name <=> std::string_view(a.name()); c != 0) return c < 0;
    return k.arity < a.arity();
  }
};

// ---------------------------------------------------------------------------
// Substitutions and unification

/// Variable bindings kept fully resolved: no bound term mentions a bound
/// variable, so applying the substitution once is enough.
class Substitution {
public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const std::string, Term>> init) : map_(init) {}

  const Term* lookup(const std::string& v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
  }

  Term apply(const Term& t) const {
    if (map_.empty()) return t;
    switch (t.kind()) {
    case Term::Kind::Var:
      if (auto* b = lookup(t.name())) return *b;
      return t;
    case Term::Kind::Int:
    case Term::Kind::Atom:
      return t;
    case Term::Kind::Compound:
    case Term::Kind::List: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(apply(a));
      return t.is_list() ? Term::list(std::move(args)) : Term::compound(t.name(), std::move(args));
    }
    }
    return t;
  }

  /// Binds v to t (t must already be resolved against *this and must not
  /// contain v). Existing bindings are rewritten to keep idempotence.
  void bind(const std::string& v, const Term& t) {
    Substitution single;
    single.map_.emplace(v, t);
    for (auto& [_, value] : map_) value = single.apply(value);
    map_.insert_or_assign(v, t);
  }

  bool empty() const noexcept { return map_.empty(); }
  std::size_t size() const noexcept { return map_.size(); }
  const std::map<std::string, Term>& bindings() const noexcept { return map_; }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : map_) {
      if (!first) out += ", ";
      first = false;
      out += k + "->" + v.to_string();
    }
    return out + "}";
  }

  friend bool operator==(const Substitution&, const Substitution&) = default;

private:
  std::map<std::string, Term> map_;
};

namespace detail {

inline bool unify_into(const Term& a0, const Term& b0, Substitution& s) {
  Term a = s.apply(a0);
  Term b = s.apply(b0);
  if (a.is_var() && b.is_var() && a.name() == b.name()) return true;
  if (a.is_var()) {
    if (b.contains_var(a.name())) return false;
    s.bind(a.name(), b);
    return true;
  }
  if (b.is_var()) {
    if (a.contains_var(b.name())) return false;
    s.bind(b.name(), a);
    return true;
  }
  if (a.kind() != b.kind()) {
    // atoms and compounds share a structural class but differ in arity
    return false;
  }
  switch (a.kind()) {
  case Term::Kind::Int:
    return a.value() == b.value();
  case Term::Kind::Atom:
    return a.name() == b.name();
  case Term::Kind::Compound:
    if (a.name() != b.name()) return false;
    [[fallthrough]];
  case Term::Kind::List:
    if (a.args().size() != b.args().size()) return false;
    for (std::size_t i = 0; i < a.args().size(); ++i)
      if (!unify_into(a.args()[i], b.args()[i], s)) return false;
    return true;
  case Term::Kind::Var:
    break;
  }
  return false;
}

} // namespace detail

/// Most general unifier extending `base`, or nullopt. Occurs check included.
inline std::optional<Substitution> unify(const Term& t1, const Term& t2,
                                         const Substitution& base = {}) {
  Substitution s = base;
  if (!detail::unify_into(t1, t2, s)) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------------------
// Fact bases

/// Set of ground terms in canonical order.
class FactBase {
public:
  using Storage = std::set<Term, TermLess>;
  using const_iterator = Storage::const_iterator;

  FactBase() = default;
  FactBase(std::initializer_list<Term> facts) {
    for (const auto& f : facts) insert(f);
  }

  /// Returns true if the fact was not present before.
  bool insert(const Term& fact) {
    if (!fact.is_ground()) throw Error("fact is not ground: " + fact.to_string());
    return facts_.insert(fact).second;
  }
  bool erase(const Term& fact) { return facts_.erase(fact) > 0; }
  bool contains(const Term& fact) const { return facts_.find(fact) != facts_.end(); }

  std::pair<const_iterator, const_iterator> with_functor(std::string_view name,
                                                         std::size_t arity) const {
    return facts_.equal_range(FunctorKey{name, arity});
  }

  const_iterator begin() const { return facts_.begin(); }
  const_iterator end() const { return facts_.end(); }
  std::size_t size() const noexcept { return facts_.size(); }
  bool empty() const noexcept { return facts_.empty(); }

  friend bool operator==(const FactBase& a, const FactBase& b) { return a.facts_ == b.facts_; }

private:
  Storage facts_;
};

// ---------------------------------------------------------------------------
// Conjunctive queries

struct Positive {
  Term pattern;
  friend bool operator==(const Positive&, const Positive&) = default;
};
struct Negated {
  Term pattern;
  friend bool operator==(const Negated&, const Negated&) = default;
};
struct NotEqual {
  Term lhs;
  Term rhs;
  friend bool operator==(const NotEqual&, const NotEqual&) = default;
};

using Conjunct = std::variant<Positive, Negated, NotEqual>;

struct QueryGoal {
  std::vector<Conjunct> conjuncts;

  /// Variables that positive conjuncts can bind.
  std::set<std::string> binding_variables() const {
    std::set<std::string> out;
    for (const auto& c : conjuncts)
      if (auto* p = std::get_if<Positive>(&c)) p->pattern.collect_variables(out);
    return out;
  }

  std::set<std::string> variables() const {
    std::set<std::string> out;
    for (const auto& c : conjuncts) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NotEqual>) {
              x.lhs.collect_variables(out);
              x.rhs.collect_variables(out);
            } else {
              x.pattern.collect_variables(out);
            }
          },
          c);
    }
    return out;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < conjuncts.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Positive>) {
              out += x.pattern.to_string();
            } else if constexpr (std::is_same_v<T, Negated>) {
              out += "~" + x.pattern.to_string();
            } else {
              out += x.lhs.to_string() + "\\=" + x.rhs.to_string();
            }
          },
          conjuncts[i]);
    }
    return out;
  }

  friend bool operator==(const QueryGoal&, const QueryGoal&) = default;
};

/// Callback returns false to stop the enumeration.
using SolutionSink = std::function<bool(const Substitution&)>;

namespace detail {

inline bool solve_from(const FactBase& base, const QueryGoal& goal, std::size_t index,
                       const Substitution& subst, const SolutionSink& sink) {
  if (index == goal.conjuncts.size()) return sink(subst);
  const Conjunct& c = goal.conjuncts[index];

  if (auto* pos = std::get_if<Positive>(&c)) {
    Term pattern = subst.apply(pos->pattern);
    if (pattern.is_ground()) {
      if (!base.contains(pattern)) return true;
      return solve_from(base, goal, index + 1, subst, sink);
    }
    if (pattern.is_var()) {
      for (const auto& fact : base) {
        if (auto s = unify(pattern, fact, subst))
          if (!solve_from(base, goal, index + 1, *s, sink)) return false;
      }
      return true;
    }
    auto [first, last] = pattern.is_struct()
                             ? base.with_functor(pattern.name(), pattern.arity())
                             : std::pair{base.begin(), base.end()};
    for (auto it = first; it != last; ++it) {
      if (auto s = unify(pattern, *it, subst))
        if (!solve_from(base, goal, index + 1, *s, sink)) return false;
    }
    return true;
  }

  if (auto* neg = std::get_if<Negated>(&c)) {
    Term pattern = subst.apply(neg->pattern);
    if (!pattern.is_ground())
      throw NonGroundNegation("negated conjunct not ground: ~" + pattern.to_string());
    if (base.contains(pattern)) return true;
    return solve_from(base, goal, index + 1, subst, sink);
  }

  const auto& ne = std::get<NotEqual>(c);
  Term lhs = subst.apply(ne.lhs);
  Term rhs = subst.apply(ne.rhs);
  if (!lhs.is_ground() || !rhs.is_ground())
    throw NonGroundNegation("inequality not ground: " + lhs.to_string() + "\\=" + rhs.to_string());
  if (lhs == rhs) return true;
  return solve_from(base, goal, index + 1, subst, sink);
}

} // namespace detail

/// Enumerates solutions lazily: conjuncts left to right, facts in canonical
/// order. Returns false iff the sink stopped the enumeration.
inline bool for_each_solution(const FactBase& base, const QueryGoal& goal,
                              const Substitution& start, const SolutionSink& sink) {
  return detail::solve_from(base, goal, 0, start, sink);
}

inline std::vector<Substitution> solve(const FactBase& base, const QueryGoal& goal,
                                       const Substitution& start = {}) {
  std::vector<Substitution> out;
  for_each_solution(base, goal, start, [&](const Substitution& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

inline bool holds(const FactBase& base, const QueryGoal& goal, const Substitution& start = {}) {
  bool found = false;
  for_each_solution(base, goal, start, [&](const Substitution&) {
    found = true;
    return false;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Text syntax

/// Recursive-descent reader for terms and conjunctive queries over a Lexer.
/// Each `_` becomes a fresh variable.
class TermReader {
public:
  explicit TermReader(Lexer& lex) : lex_(lex) {}

  Term term() {
    const Token& t = lex_.peek();
    switch (t.kind) {
    case TokenKind::Atom: {
      std::string name = lex_.next().text;
      if (!lex_.peek().is("(")) return Term::atom(std::move(name));
      lex_.next();
      std::vector<Term> args = term_list(")");
      if (args.empty()) lex_.fail("compound term '" + name + "' needs at least one argument");
      return Term::compound(std::move(name), std::move(args));
    }
    case TokenKind::Variable: {
      std::string name = lex_.next().text;
      if (name == "_") name = "_G" + std::to_string(++anonymous_);
      return Term::var(std::move(name));
    }
    case TokenKind::Integer:
      return Term::integer(std::stoll(lex_.next().text));
    case TokenKind::Punct:
      if (t.is("[")) {
        lex_.next();
        return Term::list(term_list("]"));
      }
      if (t.is("-")) {
        lex_.next();
        if (lex_.peek().kind != TokenKind::Integer) lex_.fail("expected integer after '-'");
        return Term::integer(-std::stoll(lex_.next().text));
      }
      break;
    case TokenKind::End:
      break;
    }
    lex_.fail("expected a term but found " + Lexer::describe(t));
  }

  /// Single conjunct: `~t`, `~(t)`, `a \= b`, or a positive pattern.
  Conjunct conjunct() {
    if (lex_.accept("~")) {
      if (lex_.accept("(")) {
        Term t = term();
        lex_.expect(")");
        return Negated{std::move(t)};
      }
      return Negated{term()};
    }
    Term t = term();
    if (lex_.accept("\\=")) return NotEqual{std::move(t), term()};
    return Positive{std::move(t)};
  }

  QueryGoal query() {
    QueryGoal q;
    q.conjuncts.push_back(conjunct());
    while (lex_.accept(",")) q.conjuncts.push_back(conjunct());
    return q;
  }

  Lexer& lexer() { return lex_; }

private:
  std::vector<Term> term_list(std::string_view close) {
    std::vector<Term> out;
    if (lex_.accept(close)) return out;
    out.push_back(term());
    while (lex_.accept(",")) out.push_back(term());
    lex_.expect(close);
    return out;
  }

  Lexer& lex_;
  int anonymous_ = 0;
};

inline Term parse_term(std::string_view text) {
  Lexer lex(text);
  TermReader r(lex);
  Term t = r.term();
  if (!lex.at_end()) lex.fail("trailing input after term");
  return t;
}

inline QueryGoal parse_query(std::string_view text) {
  Lexer lex(text);
  TermReader r(lex);
  QueryGoal q = r.query();
  if (!lex.at_end()) lex.fail("trailing input after query");
  return q;
}

} // namespace aortamc::logic
