#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aortamc/errors.hpp"
#include "aortamc/psl.hpp"

namespace aortamc::buchi {

using psl::Formula;
using psl::ModalAtom;

/// Atom index plus polarity.
struct Literal {
  std::uint32_t atom = 0;
  bool positive = true;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// A letter: the truth value of every atom of the automaton, by index.
using Letter = std::vector<char>;

/// State-labelled Büchi automaton: a run q0 q1 ... reads letter w_i in
/// q_i, which must satisfy q_i's label. The transition-labelled view
/// (from, label(to), to) is available through `transitions()`.
struct Automaton {
  struct Node {
    std::vector<Literal> label;
    std::vector<std::uint32_t> succ;
    bool accepting = false;
  };
  struct Transition {
    std::uint32_t from;
    const std::vector<Literal>* label;
    std::uint32_t to;
  };

  std::vector<ModalAtom> atoms;
  std::vector<Node> nodes;
  std::vector<std::uint32_t> initial;

  std::size_t size() const noexcept { return nodes.size(); }

  bool admits(std::uint32_t q, const Letter& w) const {
    for (const auto& l : nodes[q].label)
      if ((w[l.atom] != 0) != l.positive) return false;
    return true;
  }

  std::vector<Transition> transitions() const {
    std::vector<Transition> out;
    for (std::uint32_t q = 0; q < nodes.size(); ++q)
      for (auto t : nodes[q].succ) out.push_back({q, &nodes[t].label, t});
    return out;
  }

  std::uint32_t atom_index(const ModalAtom& a) const {
    auto it = std::find(atoms.begin(), atoms.end(), a);
    if (it == atoms.end()) throw Error("atom not in automaton: " + a.to_string());
    return static_cast<std::uint32_t>(it - atoms.begin());
  }
};

namespace detail {

/// Interned NNF subformulas, so tableau sets are sets of small integers.
class Closure {
public:
  enum class Op { True, False, Pos, Neg, And, Or, Next, Until, Release };
  struct Entry {
    Op op;
    std::uint32_t a = 0, b = 0; // operands, or atom index for Pos/Neg
  };

  std::uint32_t intern(const Formula& f) {
    using K = Formula::Kind;
    Entry e{};
    switch (f.kind()) {
    case K::True: e.op = Op::True; break;
    case K::False: e.op = Op::False; break;
    case K::Atom: e = {Op::Pos, atom(f.modal_atom()), 0}; break;
    case K::Not:
      if (f.sub().kind() != K::Atom) throw Error("formula not in negation normal form");
      e = {Op::Neg, atom(f.sub().modal_atom()), 0};
      break;
    case K::And: e = {Op::And, intern(f.lhs()), intern(f.rhs())}; break;
    case K::Or: e = {Op::Or, intern(f.lhs()), intern(f.rhs())}; break;
    case K::Next: e = {Op::Next, intern(f.sub()), 0}; break;
    case K::Until: e = {Op::Until, intern(f.lhs()), intern(f.rhs())}; break;
    case K::Release: e = {Op::Release, intern(f.lhs()), intern(f.rhs())}; break;
    default: throw Error("formula not in negation normal form");
    }
    auto key = std::make_tuple(static_cast<int>(e.op), e.a, e.b);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(entries_.size());
    entries_.push_back(e);
    index_.emplace(key, id);
    return id;
  }

  const Entry& operator[](std::uint32_t id) const { return entries_[id]; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<ModalAtom>& atoms() { return atoms_; }

private:
  std::uint32_t atom(const ModalAtom& a) {
    auto it = std::find(atoms_.begin(), atoms_.end(), a);
    if (it != atoms_.end()) return static_cast<std::uint32_t>(it - atoms_.begin());
    atoms_.push_back(a);
    return static_cast<std::uint32_t>(atoms_.size() - 1);
  }

  std::vector<Entry> entries_;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::uint32_t> index_;
  std::vector<ModalAtom> atoms_;
};

using IdSet = std::set<std::uint32_t>;

/// The on-the-fly tableau: nodes are (Old, Next) pairs, edges are recorded
/// as incoming sets. Node 0 is the pseudo-initial node.
class Tableau {
public:
  struct TNode {
    IdSet incoming;
    IdSet old_set;
    IdSet next;
  };

  explicit Tableau(const Closure& cl) : cl_(cl), complement_(cl.size(), UINT32_MAX) {
    nodes_.push_back({});
    std::map<std::pair<int, std::uint32_t>, std::uint32_t> lits;
    for (std::uint32_t i = 0; i < cl.size(); ++i)
      if (cl[i].op == Closure::Op::Pos || cl[i].op == Closure::Op::Neg)
        lits[{static_cast<int>(cl[i].op), cl[i].a}] = i;
    for (auto [key, i] : lits) {
      int other = static_cast<int>(key.first == static_cast<int>(Closure::Op::Pos) ? Closure::Op::Neg
                                                                                    : Closure::Op::Pos);
      if (auto it = lits.find({other, key.second}); it != lits.end()) complement_[i] = it->second;
    }
  }

  void build(std::uint32_t root) {
    struct Work {
      IdSet incoming, fresh, old_set, next;
    };
    std::vector<Work> stack;
    stack.push_back({{0}, {root}, {}, {}});
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();

      if (w.fresh.empty()) {
        auto key = std::make_pair(w.old_set, w.next);
        if (auto it = seen_.find(key); it != seen_.end()) {
          nodes_[it->second].incoming.insert(w.incoming.begin(), w.incoming.end());
          continue;
        }
        auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({w.incoming, w.old_set, w.next});
        seen_.emplace(std::move(key), id);
        stack.push_back({{id}, w.next, {}, {}});
        continue;
      }

      std::uint32_t eta = *w.fresh.begin();
      w.fresh.erase(w.fresh.begin());
      if (w.old_set.count(eta)) {
        stack.push_back(std::move(w));
        continue;
      }
      const auto& e = cl_[eta];
      using Op = Closure::Op;
      switch (e.op) {
      case Op::False: break; // contradiction: drop the branch
      case Op::True:
        w.old_set.insert(eta);
        stack.push_back(std::move(w));
        break;
      case Op::Pos:
      case Op::Neg:
        if (w.old_set.count(complement(eta))) break;
        w.old_set.insert(eta);
        stack.push_back(std::move(w));
        break;
      case Op::And:
        w.old_set.insert(eta);
        add_fresh(w.fresh, w.old_set, e.a);
        add_fresh(w.fresh, w.old_set, e.b);
        stack.push_back(std::move(w));
        break;
      case Op::Next:
        w.old_set.insert(eta);
        w.next.insert(e.a);
        stack.push_back(std::move(w));
        break;
      case Op::Or:
      case Op::Until:
      case Op::Release: {
        w.old_set.insert(eta);
        Work w2 = w;
        // Or:      {a}            | {b}
        // Until:   {a}, X(a U b)  | {b}
        // Release: {b}, X(a R b)  | {a, b}
        if (e.op == Op::Release) {
          add_fresh(w.fresh, w.old_set, e.b);
          w.next.insert(eta);
          add_fresh(w2.fresh, w2.old_set, e.a);
          add_fresh(w2.fresh, w2.old_set, e.b);
        } else {
          add_fresh(w.fresh, w.old_set, e.a);
          if (e.op == Op::Until) w.next.insert(eta);
          add_fresh(w2.fresh, w2.old_set, e.b);
        }
        // second branch explored after the first: keeps node numbering stable
        stack.push_back(std::move(w2));
        stack.push_back(std::move(w));
        break;
      }
      }
    }
  }

  const std::vector<TNode>& nodes() const { return nodes_; }

private:
  static void add_fresh(IdSet& fresh, const IdSet& old_set, std::uint32_t f) {
    if (!old_set.count(f)) fresh.insert(f);
  }

  std::uint32_t complement(std::uint32_t lit) const { return complement_[lit]; }

  const Closure& cl_;
  std::vector<std::uint32_t> complement_;
  std::vector<TNode> nodes_;
  std::map<std::pair<IdSet, IdSet>, std::uint32_t> seen_;
};

/// Drops nodes unreachable from the initial set and renumbers.
inline Automaton prune(const Automaton& a) {
  std::vector<std::int64_t> map(a.size(), -1);
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> todo(a.initial.rbegin(), a.initial.rend());
  for (auto q : a.initial)
    if (map[q] < 0) {
      map[q] = static_cast<std::int64_t>(order.size());
      order.push_back(q);
    }
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto t : a.nodes[order[i]].succ)
      if (map[t] < 0) {
        map[t] = static_cast<std::int64_t>(order.size());
        order.push_back(t);
      }
  Automaton out;
  out.atoms = a.atoms;
  for (auto q : order) {
    Automaton::Node n = a.nodes[q];
    for (auto& t : n.succ) t = static_cast<std::uint32_t>(map[t]);
    std::sort(n.succ.begin(), n.succ.end());
    n.succ.erase(std::unique(n.succ.begin(), n.succ.end()), n.succ.end());
    out.nodes.push_back(std::move(n));
  }
  for (auto q : a.initial) out.initial.push_back(static_cast<std::uint32_t>(map[q]));
  std::sort(out.initial.begin(), out.initial.end());
  out.initial.erase(std::unique(out.initial.begin(), out.initial.end()), out.initial.end());
  return out;
}

/// Quotient by the coarsest bisimulation that respects labels and
/// acceptance; preserves the language.
inline Automaton reduce(const Automaton& a) {
  const std::size_t n = a.size();
  std::vector<std::uint32_t> block(n, 0);
  {
    std::map<std::pair<std::vector<Literal>, bool>, std::uint32_t> ids;
    for (std::size_t q = 0; q < n; ++q) {
      auto key = std::make_pair(a.nodes[q].label, a.nodes[q].accepting);
      auto [it, _] = ids.emplace(key, static_cast<std::uint32_t>(ids.size()));
      block[q] = it->second;
    }
  }
  std::size_t count = 0;
  for (;;) {
    std::map<std::pair<std::uint32_t, std::set<std::uint32_t>>, std::uint32_t> ids;
    std::vector<std::uint32_t> next(n);
    for (std::size_t q = 0; q < n; ++q) {
      std::set<std::uint32_t> succ;
      for (auto t : a.nodes[q].succ) succ.insert(block[t]);
      auto [it, _] = ids.emplace(std::make_pair(block[q], std::move(succ)),
                                 static_cast<std::uint32_t>(ids.size()));
      next[q] = it->second;
    }
    std::size_t k = ids.size();
    block = std::move(next);
    if (k == count) break;
    count = k;
  }
  // renumber blocks in order of first occurrence for stable output
  std::vector<std::int64_t> ren(n, -1);
  std::uint32_t fresh = 0;
  for (std::size_t q = 0; q < n; ++q)
    if (ren[block[q]] < 0) ren[block[q]] = fresh++;
  Automaton out;
  out.atoms = a.atoms;
  out.nodes.resize(fresh);
  std::vector<bool> done(fresh, false);
  for (std::size_t q = 0; q < n; ++q) {
    auto b = static_cast<std::uint32_t>(ren[block[q]]);
    if (done[b]) continue;
    done[b] = true;
    out.nodes[b].label = a.nodes[q].label;
    out.nodes[b].accepting = a.nodes[q].accepting;
    for (auto t : a.nodes[q].succ) out.nodes[b].succ.push_back(static_cast<std::uint32_t>(ren[block[t]]));
    std::sort(out.nodes[b].succ.begin(), out.nodes[b].succ.end());
    out.nodes[b].succ.erase(std::unique(out.nodes[b].succ.begin(), out.nodes[b].succ.end()),
                            out.nodes[b].succ.end());
  }
  for (auto q : a.initial) out.initial.push_back(static_cast<std::uint32_t>(ren[block[q]]));
  std::sort(out.initial.begin(), out.initial.end());
  out.initial.erase(std::unique(out.initial.begin(), out.initial.end()), out.initial.end());
  return out;
}

} // namespace detail

/// Tableau translation of an NNF formula, degeneralized with a counter over
/// the acceptance sets (one per until-subformula), then pruned and reduced.
inline Automaton ltl_to_buchi(const Formula& nnf) {
  if (!nnf.is_nnf()) throw Error("ltl_to_buchi expects a formula in negation normal form");
  detail::Closure cl;
  std::uint32_t root = cl.intern(nnf);
  // make sure both polarities of every atom are interned for the
  // contradiction check
  for (std::uint32_t i = 0; i < cl.atoms().size(); ++i) {
    cl.intern(Formula::atom(cl.atoms()[i]));
    cl.intern(Formula::negate(Formula::atom(cl.atoms()[i])));
  }
  detail::Tableau tab(cl);
  tab.build(root);
  const auto& tn = tab.nodes();

  std::vector<std::uint32_t> untils;
  for (std::uint32_t i = 0; i < cl.size(); ++i)
    if (cl[i].op == detail::Closure::Op::Until) untils.push_back(i);
  const std::size_t k = untils.size();

  // generalized acceptance: F_j = { q : (a U b) not in Old(q) or b in Old(q) }
  auto in_set = [&](std::size_t q, std::size_t j) {
    const auto& old_set = tn[q].old_set;
    const auto& u = cl[untils[j]];
    return !old_set.count(untils[j]) || old_set.count(u.b);
  };

  // degeneralized states (q, i); q ranges over real tableau nodes 1..
  const std::size_t layers = std::max<std::size_t>(k, 1);
  auto sid = [&](std::size_t q, std::size_t i) { return static_cast<std::uint32_t>((q - 1) * layers + i); };

  Automaton g;
  g.atoms = cl.atoms();
  g.nodes.resize((tn.size() - 1) * layers);
  std::vector<std::vector<std::uint32_t>> succ(tn.size());
  for (std::uint32_t q = 1; q < tn.size(); ++q)
    for (auto p : tn[q].incoming) succ[p].push_back(q);

  for (std::size_t q = 1; q < tn.size(); ++q) {
    std::vector<Literal> label;
    for (auto f : tn[q].old_set) {
      const auto& e = cl[f];
      if (e.op == detail::Closure::Op::Pos) label.push_back({e.a, true});
      if (e.op == detail::Closure::Op::Neg) label.push_back({e.a, false});
    }
    std::sort(label.begin(), label.end());
    for (std::size_t i = 0; i < layers; ++i) {
      auto& node = g.nodes[sid(q, i)];
      node.label = label;
      bool in_fi = k == 0 || in_set(q, i);
      node.accepting = i == 0 && in_fi;
      std::size_t j = (k == 0) ? 0 : (in_fi ? (i + 1) % k : i);
      for (auto t : succ[q]) node.succ.push_back(sid(t, j));
    }
  }
  for (auto q : succ[0]) g.initial.push_back(sid(q, 0));

  return detail::reduce(detail::prune(g));
}

/// Negates, normalizes and translates.
inline Automaton negated_automaton(const Formula& f) {
  return ltl_to_buchi(psl::to_nnf(f, true));
}

/// Membership of the ultimately periodic word prefix·cycle^ω. Checks for an
/// accepting cycle in the product of the automaton with the lasso.
inline bool accepts_lasso(const Automaton& a, std::span<const Letter> prefix,
                          std::span<const Letter> cycle) {
  if (cycle.empty()) throw Error("lasso cycle must be non-empty");
  const std::size_t len = prefix.size() + cycle.size();
  auto letter = [&](std::size_t i) -> const Letter& {
    return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()];
  };
  auto next_pos = [&](std::size_t i) { return i + 1 < len ? i + 1 : prefix.size(); };
  const std::size_t nq = a.size();
  auto id = [&](std::size_t q, std::size_t i) { return i * nq + q; };

  std::vector<char> reach(len * nq, 0);
  std::vector<std::size_t> todo;
  for (auto q : a.initial)
    if (a.admits(q, letter(0)) && !reach[id(q, 0)]) {
      reach[id(q, 0)] = 1;
      todo.push_back(id(q, 0));
    }
  auto successors = [&](std::size_t v, auto&& fn) {
    std::size_t q = v % nq, i = v / nq, j = next_pos(i);
    for (auto t : a.nodes[q].succ)
      if (a.admits(t, letter(j))) fn(id(t, j));
  };
  while (!todo.empty()) {
    auto v = todo.back();
    todo.pop_back();
    successors(v, [&](std::size_t w) {
      if (!reach[w]) {
        reach[w] = 1;
        todo.push_back(w);
      }
    });
  }
  // an accepting reachable vertex that lies on a cycle
  for (std::size_t v = 0; v < reach.size(); ++v) {
    if (!reach[v] || !a.nodes[v % nq].accepting) continue;
    std::vector<char> seen(reach.size(), 0);
    std::vector<std::size_t> st;
    successors(v, [&](std::size_t w) {
      if (!seen[w]) {
        seen[w] = 1;
        st.push_back(w);
      }
    });
    while (!st.empty()) {
      auto u = st.back();
      st.pop_back();
      if (u == v) return true;
      successors(u, [&](std::size_t w) {
        if (!seen[w]) {
          seen[w] = 1;
          st.push_back(w);
        }
      });
    }
  }
  return false;
}

} // namespace aortamc::buchi
