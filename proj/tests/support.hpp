#pragma once
// Test helpers: fixture access and reference implementations used as
// oracles (direct LTL semantics on lasso words, exhaustive lasso search).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "aortamc/aortamc.hpp"

namespace testing_support {

using namespace aortamc;
using psl::Formula;
using psl::ModalAtom;
using K = psl::Formula::Kind;

inline std::filesystem::path fixture_dir() { return AORTAMC_FIXTURE_DIR; }
inline std::filesystem::path fixture_config() { return fixture_dir() / "mas.json"; }

inline runtime::MasState fixture_initial() { return load_config(fixture_config()).initial(); }

inline std::string fixture_text(const std::string& file) { return read_file(fixture_dir() / file); }

// ---------------------------------------------------------------------------
// Propositions p, q as B(x, p), B(x, q)

inline ModalAtom prop(int i) {
  return ModalAtom{psl::Modality::B, logic::atom("x"), logic::atom(i == 0 ? "p" : "q")};
}
inline Formula P(int i) { return Formula::atom(prop(i)); }

/// A word position's valuation over the fixed propositions (bit i = prop i).
using Valuation = unsigned;

/// Direct LTL semantics on the lasso word prefix·cycle^ω. Returns the truth
/// value at every position; position 0 is the answer.
inline std::vector<char> ltl_eval(const Formula& f, const std::vector<Valuation>& w, std::size_t loop) {
  const std::size_t n = w.size();
  auto nxt = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop; };
  std::vector<char> out(n);
  switch (f.kind()) {
  case K::True: std::fill(out.begin(), out.end(), 1); break;
  case K::False: break;
  case K::Atom: {
    int bit = f.modal_atom() == prop(0) ? 0 : 1;
    for (std::size_t i = 0; i < n; ++i) out[i] = (w[i] >> bit) & 1u;
    break;
  }
  case K::Not: {
    auto a = ltl_eval(f.sub(), w, loop);
    for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
    break;
  }
  case K::And:
  case K::Or:
  case K::Implies: {
    auto a = ltl_eval(f.lhs(), w, loop), b = ltl_eval(f.rhs(), w, loop);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = f.kind() == K::And ? (a[i] && b[i]) : f.kind() == K::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
    break;
  }
  case K::Next: {
    auto a = ltl_eval(f.sub(), w, loop);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[nxt(i)];
    break;
  }
  case K::Until:
  case K::Release:
  case K::Eventually:
  case K::Always: {
    // a U b as least fixpoint, a R b as greatest fixpoint, iterated to
    // stability over the finite position graph
    std::vector<char> a, b;
    bool until = f.kind() == K::Until || f.kind() == K::Eventually;
    if (f.kind() == K::Eventually) {
      a.assign(n, 1);
      b = ltl_eval(f.sub(), w, loop);
    } else if (f.kind() == K::Always) {
      a.assign(n, 0);
      b = ltl_eval(f.sub(), w, loop);
    } else {
      a = ltl_eval(f.lhs(), w, loop);
      b = ltl_eval(f.rhs(), w, loop);
    }
    out.assign(n, until ? 0 : 1);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = n; k-- > 0;) {
        char v = until ? (b[k] || (a[k] && out[nxt(k)])) : (b[k] && (a[k] || out[nxt(k)]));
        if (v != out[k]) {
          out[k] = v;
          changed = true;
        }
      }
    }
    break;
  }
  case K::Forall: throw Error("unexpanded forall");
  }
  return out;
}

inline bool ltl_holds(const Formula& f, const std::vector<Valuation>& w, std::size_t loop) {
  return ltl_eval(f, w, loop)[0] != 0;
}

// ---------------------------------------------------------------------------
// Random formulas over p, q

inline Formula random_formula(std::mt19937_64& rng, int depth, bool nnf) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  if (depth == 0 || pick(4) == 0) {
    int c = pick(nnf ? 6 : 5);
    if (c < 2) return P(c);
    if (c < 4 && nnf) return Formula::negate(P(c - 2));
    if (c == 4) return pick(2) ? Formula::truth() : Formula::falsity();
    return P(pick(2));
  }
  auto sub = [&] { return random_formula(rng, depth - 1, nnf); };
  int op = pick(nnf ? 6 : 10);
  switch (op) {
  case 0: return Formula::conj(sub(), sub());
  case 1: return Formula::disj(sub(), sub());
  case 2: return Formula::next(sub());
  case 3: return Formula::until(sub(), sub());
  case 4: return Formula::release(sub(), sub());
  case 5: return pick(2) ? Formula::until(Formula::truth(), sub()) : Formula::release(Formula::falsity(), sub());
  case 6: return Formula::negate(sub());
  case 7: return Formula::implies(sub(), sub());
  case 8: return Formula::eventually(sub());
  default: return Formula::always(sub());
  }
}

/// All lasso words with prefix + period ≤ max_len over two propositions.
inline void for_each_lasso_word(std::size_t max_len,
                                const std::function<void(const std::vector<Valuation>&, std::size_t)>& fn) {
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t total = std::size_t{1} << (2 * len);
    std::vector<Valuation> w(len);
    for (std::size_t code = 0; code < total; ++code) {
      for (std::size_t i = 0; i < len; ++i) w[i] = static_cast<Valuation>((code >> (2 * i)) & 3u);
      for (std::size_t loop = 0; loop < len; ++loop) fn(w, loop);
    }
  }
}

/// Automaton letter for a valuation, following the automaton's atom order.
inline buchi::Letter letter_for(const buchi::Automaton& a, Valuation v) {
  buchi::Letter l(a.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) l[i] = a.atoms[i] == prop(0) ? (v & 1u) : ((v >> 1) & 1u);
  return l;
}

inline bool automaton_accepts(const buchi::Automaton& a, const std::vector<Valuation>& w, std::size_t loop) {
  std::vector<buchi::Letter> prefix, cycle;
  for (std::size_t i = 0; i < w.size(); ++i) (i < loop ? prefix : cycle).push_back(letter_for(a, w[i]));
  return buchi::accepts_lasso(a, prefix, cycle);
}

// ---------------------------------------------------------------------------
// Synthetic Kripke structures

struct SyntheticModel {
  std::vector<Valuation> label;
  std::vector<std::vector<std::uint32_t>> succ; // every state has ≥ 1 successor

  static SyntheticModel random(std::mt19937_64& rng, std::size_t max_states = 6, std::size_t max_degree = 2) {
    SyntheticModel m;
    std::size_t n = 1 + rng() % max_states;
    m.label.resize(n);
    m.succ.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      m.label[s] = static_cast<Valuation>(rng() % 4);
      std::size_t d = 1 + rng() % max_degree;
      for (std::size_t k = 0; k < d; ++k) {
        auto t = static_cast<std::uint32_t>(rng() % n);
        if (std::find(m.succ[s].begin(), m.succ[s].end(), t) == m.succ[s].end()) m.succ[s].push_back(t);
      }
    }
    return m;
  }
};

/// Kripke view of a synthetic model for the nested DFS.
class SyntheticGraph {
public:
  SyntheticGraph(const SyntheticModel& m, const buchi::Automaton& a) : m_(m) {
    for (std::uint32_t s = 0; s < m.label.size(); ++s) {
      letters_.push_back(letter_for(a, m.label[s]));
      std::vector<checker::Edge> es;
      for (std::size_t k = 0; k < m.succ[s].size(); ++k)
        es.push_back({static_cast<std::int32_t>(k), m.succ[s][k]});
      edges_.push_back(std::move(es));
    }
  }
  std::uint32_t initial() const { return 0; }
  const std::vector<checker::Edge>& successors(std::uint32_t s) const { return edges_[s]; }
  const buchi::Letter& letter(std::uint32_t s) const { return letters_[s]; }

private:
  const SyntheticModel& m_;
  std::vector<buchi::Letter> letters_;
  std::vector<std::vector<checker::Edge>> edges_;
};

/// Verdict via the automaton product: true iff every path satisfies f.
inline bool ndfs_satisfied(const SyntheticModel& m, const Formula& f, checker::Lasso* witness = nullptr) {
  auto neg = buchi::negated_automaton(f);
  SyntheticGraph g(m, neg);
  auto r = checker::nested_dfs(g, neg);
  if (r.lasso && witness) *witness = *r.lasso;
  return !r.lasso;
}

/// Exhaustive search: every lasso path from state 0 with prefix + period ≤
/// max_len is evaluated directly. Returns true iff none violates f.
inline bool lasso_enumeration_satisfied(const SyntheticModel& m, const Formula& f, std::size_t max_len) {
  std::vector<std::uint32_t> path{0};
  std::vector<Valuation> word;
  bool violated = false;
  std::function<void()> dfs = [&] {
    if (violated) return;
    const auto last = path.back();
    // close the lasso back to any earlier position the last state can reach
    for (std::size_t j = 0; j < path.size() && !violated; ++j) {
      const auto& su = m.succ[last];
      if (std::find(su.begin(), su.end(), path[j]) == su.end()) continue;
      word.clear();
      for (auto s : path) word.push_back(m.label[s]);
      if (!ltl_holds(f, word, j)) violated = true;
    }
    if (path.size() == max_len) return;
    for (auto t : m.succ[last]) {
      path.push_back(t);
      dfs();
      path.pop_back();
      if (violated) return;
    }
  };
  dfs();
  return !violated;
}

} // namespace testing_support
