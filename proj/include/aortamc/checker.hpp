#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aortamc/buchi.hpp"
#include "aortamc/errors.hpp"
#include "aortamc/psl.hpp"
#include "aortamc/runtime.hpp"

namespace aortamc::checker {

using buchi::Automaton;
using buchi::Letter;
using runtime::MasState;

inline constexpr std::int32_t kStutter = -1;
inline constexpr std::int32_t kNoEdge = -2;

/// Interleaving-graph edge: the acting agent (index into the declaration
/// order) or kStutter for the self-loop of an end state.
struct Edge {
  std::int32_t agent;
  std::uint32_t to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

// ---------------------------------------------------------------------------
// State storage with fingerprint deduplication

class StateStore {
public:
  explicit StateStore(std::size_t cap = kDefaultStateCap) : cap_(cap) {}

  /// Returns (id, inserted). Digest collisions fall back to comparing the
  /// canonical bytes.
  std::pair<std::uint32_t, bool> intern(MasState s, runtime::Fingerprint fp) {
    auto& bucket = index_[fp.digest];
    for (auto id : bucket) {
      if (bytes_[id] == fp.bytes) return {id, false};
    }
    if (!bucket.empty()) ++collisions_;
    if (states_.size() >= cap_)
      throw ResourceLimit("state cap of " + std::to_string(cap_) + " states exceeded");
    auto id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(std::move(s));
    bytes_.push_back(std::move(fp.bytes));
    bucket.push_back(id);
    return {id, true};
  }

  std::pair<std::uint32_t, bool> intern(MasState s) {
    auto fp = runtime::fingerprint(s);
    return intern(std::move(s), std::move(fp));
  }

  const MasState& state(std::uint32_t id) const { return states_[id]; }
  const std::string& bytes(std::uint32_t id) const { return bytes_[id]; }
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t collisions() const noexcept { return collisions_; }
  std::size_t cap() const noexcept { return cap_; }

private:
  std::size_t cap_;
  std::deque<MasState> states_;
  std::deque<std::string> bytes_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
  std::size_t collisions_ = 0;
};

/// Successor states of `s` in agent declaration order, or the stutter
/// self-loop (nullopt agent) for an end state.
inline std::vector<std::pair<std::int32_t, MasState>> successors(const MasState& s) {
  std::vector<std::pair<std::int32_t, MasState>> out;
  if (runtime::is_end_state(s)) return out;
  for (std::size_t i = 0; i < s.agents.size(); ++i)
    if (s.agents[i].active)
      out.emplace_back(static_cast<std::int32_t>(i), runtime::mas_step(s, s.agents[i].name()));
  return out;
}

inline Letter letter_of(const MasState& s, const std::vector<psl::ModalAtom>& atoms) {
  Letter w(atoms.size(), 0);
  for (std::size_t i = 0; i < atoms.size(); ++i) w[i] = psl::eval_atom(s, atoms[i]) ? 1 : 0;
  return w;
}

// ---------------------------------------------------------------------------
// Kripke views

/// Lazily expanded interleaving graph for on-the-fly checking.
class LazyGraph {
public:
  LazyGraph(const MasState& initial, std::vector<psl::ModalAtom> atoms,
            std::size_t cap = kDefaultStateCap)
      : store_(cap), atoms_(std::move(atoms)) {
    for (const auto& a : initial.agents) agents_.push_back(a.name());
    store_.intern(initial);
  }

  std::uint32_t initial() const { return 0; }

  const std::vector<Edge>& successors(std::uint32_t s) {
    if (edges_.size() <= s) edges_.resize(store_.size());
    if (!edges_[s]) {
      std::vector<Edge> out;
      auto succ = checker::successors(store_.state(s));
      if (succ.empty()) out.push_back({kStutter, s});
      for (auto& [agent, next] : succ) out.push_back({agent, store_.intern(std::move(next)).first});
      if (edges_.size() <= s) edges_.resize(store_.size());
      edges_[s] = std::move(out);
    }
    return *edges_[s];
  }

  const Letter& letter(std::uint32_t s) {
    if (letters_.size() <= s) letters_.resize(store_.size());
    if (!letters_[s]) letters_[s] = letter_of(store_.state(s), atoms_);
    return *letters_[s];
  }

  const std::vector<std::string>& agents() const { return agents_; }
  const MasState& state(std::uint32_t s) const { return store_.state(s); }
  std::size_t size() const { return store_.size(); }
  std::size_t collisions() const { return store_.collisions(); }

private:
  StateStore store_;
  std::vector<psl::ModalAtom> atoms_;
  std::vector<std::string> agents_;
  std::deque<std::optional<std::vector<Edge>>> edges_;
  std::deque<std::optional<Letter>> letters_;
};

// ---------------------------------------------------------------------------
// State-space models

struct StateSpaceModel {
  static constexpr std::string_view kFormat = "aortamc-state-space";
  static constexpr int kVersion = 1;

  std::vector<std::string> agents;
  std::uint32_t initial = 0;
  std::vector<MasState> states;
  std::vector<std::vector<Edge>> edges; // per state, agent order; end states: one stutter loop

  bool is_end(std::uint32_t s) const { return runtime::is_end_state(states[s]); }

  std::size_t end_state_count() const {
    std::size_t n = 0;
    for (std::uint32_t s = 0; s < states.size(); ++s) n += is_end(s) ? 1 : 0;
    return n;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.size();
    return n;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["agents"] = agents;
    j["initial"] = initial;
    auto js = nlohmann::json::array();
    for (std::uint32_t s = 0; s < states.size(); ++s)
      js.push_back({{"id", s}, {"end", is_end(s)}, {"state", runtime::to_json(states[s])}});
    j["states"] = std::move(js);
    auto je = nlohmann::json::array();
    for (std::uint32_t s = 0; s < edges.size(); ++s)
      for (const auto& e : edges[s])
        je.push_back({{"from", s},
                      {"agent", e.agent == kStutter ? nlohmann::json() : nlohmann::json(agents[e.agent])},
                      {"to", e.to}});
    j["edges"] = std::move(je);
    return j;
  }

  std::string dump() const { return to_json().dump(1) + "\n"; }

  /// Parses and validates a model; anything inconsistent is MalformedModel.
  static StateSpaceModel from_json(const nlohmann::json& j) {
    auto bad = [](const std::string& why) { return MalformedModel("malformed state-space model: " + why); };
    StateSpaceModel m;
    try {
      if (!j.is_object()) throw bad("not a JSON object");
      if (j.at("format") != kFormat) throw bad("unknown format");
      if (j.at("version") != kVersion) throw bad("unsupported version");
      m.agents = j.at("agents").get<std::vector<std::string>>();
      const auto& js = j.at("states");
      for (std::size_t i = 0; i < js.size(); ++i) {
        if (js[i].at("id").get<std::size_t>() != i) throw bad("state ids must be 0..n-1 in order");
        m.states.push_back(runtime::from_json(js[i].at("state")));
        if (js[i].at("end").get<bool>() != runtime::is_end_state(m.states.back()))
          throw bad("end marker of state " + std::to_string(i) + " disagrees with its activity flags");
        std::vector<std::string> names;
        for (const auto& a : m.states.back().agents) names.push_back(a.name());
        if (names != m.agents) throw bad("state " + std::to_string(i) + " has a different agent list");
      }
      if (m.states.empty()) throw bad("no states");
      m.initial = j.at("initial").get<std::uint32_t>();
      if (m.initial >= m.states.size()) throw bad("initial id out of range");
      m.edges.resize(m.states.size());
      for (const auto& je : j.at("edges")) {
        auto from = je.at("from").get<std::uint32_t>();
        auto to = je.at("to").get<std::uint32_t>();
        if (from >= m.states.size() || to >= m.states.size()) throw bad("edge endpoint out of range");
        std::int32_t agent = kStutter;
        if (!je.at("agent").is_null()) {
          auto name = je.at("agent").get<std::string>();
          auto it = std::find(m.agents.begin(), m.agents.end(), name);
          if (it == m.agents.end()) throw bad("edge names unknown agent " + name);
          agent = static_cast<std::int32_t>(it - m.agents.begin());
        }
        m.edges[from].push_back({agent, to});
      }
    } catch (const nlohmann::json::exception& e) {
      throw bad(e.what());
    } catch (const MalformedModel&) {
      throw;
    } catch (const Error& e) {
      throw bad(e.what());
    }
    // edge completeness
    for (std::uint32_t s = 0; s < m.states.size(); ++s) {
      std::vector<Edge> expected;
      if (m.is_end(s)) {
        expected.push_back({kStutter, s});
      } else {
        for (std::size_t i = 0; i < m.agents.size(); ++i)
          if (m.states[s].agents[i].active) expected.push_back({static_cast<std::int32_t>(i), 0});
      }
      auto& got = m.edges[s];
      if (got.size() != expected.size())
        throw bad("state " + std::to_string(s) + " is not edge-complete");
      for (std::size_t k = 0; k < got.size(); ++k) {
        if (got[k].agent != expected[k].agent)
          throw bad("state " + std::to_string(s) + " has edges for the wrong agents");
        if (got[k].agent == kStutter && got[k].to != s)
          throw bad("stutter edge of state " + std::to_string(s) + " is not a self-loop");
      }
    }
    return m;
  }

  static StateSpaceModel parse(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedModel(std::string("malformed state-space model: ") + e.what());
    }
    return from_json(j);
  }
};

/// Explicit model as a Kripke view.
class ModelGraph {
public:
  ModelGraph(const StateSpaceModel& m, std::vector<psl::ModalAtom> atoms)
      : model_(m), atoms_(std::move(atoms)), letters_(m.states.size()) {}

  std::uint32_t initial() const { return model_.initial; }
  const std::vector<Edge>& successors(std::uint32_t s) const { return model_.edges[s]; }
  const Letter& letter(std::uint32_t s) {
    if (!letters_[s]) letters_[s] = letter_of(model_.states[s], atoms_);
    return *letters_[s];
  }
  const std::vector<std::string>& agents() const { return model_.agents; }
  const MasState& state(std::uint32_t s) const { return model_.states[s]; }
  std::size_t size() const { return model_.states.size(); }

private:
  const StateSpaceModel& model_;
  std::vector<psl::ModalAtom> atoms_;
  std::vector<std::optional<Letter>> letters_;
};

// ---------------------------------------------------------------------------
// Exploration

struct ExploreOptions {
  std::size_t state_cap = kDefaultStateCap;
  unsigned workers = 1;
};

/// Breadth-first exploration of every interleaving. Successors of a BFS
/// level are computed in parallel and merged in frontier order, so the
/// result does not depend on the worker count.
inline StateSpaceModel explore_full(const MasState& initial, const ExploreOptions& opt = {}) {
  StateStore store(opt.state_cap);
  StateSpaceModel m;
  for (const auto& a : initial.agents) m.agents.push_back(a.name());
  store.intern(initial);
  m.edges.emplace_back();

  struct Succ {
    std::int32_t agent;
    MasState state;
    runtime::Fingerprint fp;
  };

  std::vector<std::uint32_t> frontier{0};
  const unsigned workers = std::max(1u, opt.workers);
  while (!frontier.empty()) {
    std::vector<std::vector<Succ>> results(frontier.size());
    auto work = [&](std::size_t i) {
      for (auto& [agent, next] : successors(store.state(frontier[i]))) {
        auto fp = runtime::fingerprint(next);
        results[i].push_back({agent, std::move(next), std::move(fp)});
      }
    };
    if (workers == 1 || frontier.size() == 1) {
      for (std::size_t i = 0; i < frontier.size(); ++i) work(i);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i; (i = cursor.fetch_add(1)) < frontier.size();) work(i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    std::vector<std::uint32_t> next_frontier;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      auto from = frontier[i];
      if (results[i].empty()) {
        m.edges[from].push_back({kStutter, from});
        continue;
      }
      for (auto& r : results[i]) {
        auto [id, fresh] = store.intern(std::move(r.state), std::move(r.fp));
        if (fresh) {
          next_frontier.push_back(id);
          m.edges.emplace_back();
        }
        m.edges[from].push_back({r.agent, id});
      }
    }
    frontier = std::move(next_frontier);
  }
  for (std::uint32_t s = 0; s < store.size(); ++s) m.states.push_back(store.state(s));
  return m;
}

// ---------------------------------------------------------------------------
// Nested depth-first search

/// A position of the product: program state, automaton node, and the agent
/// whose step led here (kNoEdge for the first position, kStutter for a
/// stutter step).
struct ProductStep {
  std::uint32_t state;
  std::uint32_t node;
  std::int32_t agent;
};

/// steps[0..] followed by the closing edge steps.back() -> steps[cycle_start].
struct Lasso {
  std::vector<ProductStep> steps;
  std::size_t cycle_start = 0;
  std::int32_t closing_agent = kNoEdge;
};

struct SearchResult {
  std::optional<Lasso> lasso;
  std::size_t product_states = 0;
};

/// Accepting-cycle search over the product of a Kripke view with an
/// automaton, with cyan-state early cycle detection. The letter of a
/// program state is read on entering it.
template <class Kripke>
SearchResult nested_dfs(Kripke& k, const Automaton& a) {
  const std::uint64_t nq = std::max<std::size_t>(a.size(), 1);
  enum : std::uint8_t { kCyan = 1, kBlue = 2, kRed = 4 };
  std::unordered_map<std::uint64_t, std::uint8_t> color;
  std::unordered_map<std::uint64_t, std::size_t> cyan_pos;
  auto key = [&](std::uint32_t s, std::uint32_t q) { return std::uint64_t(s) * nq + q; };

  struct Frame {
    ProductStep at;
    std::vector<ProductStep> succ;
    std::size_t next = 0;
  };
  auto expand = [&](const ProductStep& p) {
    std::vector<ProductStep> out;
    const auto edges = k.successors(p.state); // copy: the graph may grow
    for (const auto& e : edges) {
      const Letter& w = k.letter(e.to);
      for (auto t : a.nodes[p.node].succ)
        if (a.admits(t, w)) out.push_back({e.to, t, e.agent});
    }
    return out;
  };

  SearchResult result;
  std::vector<Frame> blue;

  auto lasso_from_blue = [&](std::size_t upto, std::size_t cycle_start, std::int32_t closing) {
    Lasso l;
    for (std::size_t i = 0; i <= upto; ++i) l.steps.push_back(blue[i].at);
    l.cycle_start = cycle_start;
    l.closing_agent = closing;
    return l;
  };

  auto red_search = [&](const ProductStep& seed) -> std::optional<Lasso> {
    std::vector<Frame> red;
    red.push_back({seed, expand(seed), 0});
    while (!red.empty()) {
      Frame& f = red.back();
      if (f.next == f.succ.size()) {
        red.pop_back();
        continue;
      }
      ProductStep t = f.succ[f.next++];
      auto kt = key(t.state, t.node);
      auto& c = color[kt];
      if (c & kCyan) {
        Lasso l = lasso_from_blue(blue.size() - 1, cyan_pos.at(kt), t.agent);
        for (std::size_t i = 1; i < red.size(); ++i) l.steps.push_back(red[i].at);
        return l;
      }
      if (!(c & kRed)) {
        c |= kRed;
        red.push_back({t, expand(t), 0});
      }
    }
    return std::nullopt;
  };

  const std::uint32_t s0 = k.initial();
  const Letter& w0 = k.letter(s0);
  std::vector<std::uint32_t> roots;
  for (auto q : a.initial)
    if (a.admits(q, w0)) roots.push_back(q);

  for (auto q0 : roots) {
    ProductStep root{s0, q0, kNoEdge};
    if (color[key(s0, q0)] != 0) continue;
    color[key(s0, q0)] = kCyan;
    cyan_pos[key(s0, q0)] = 0;
    blue.push_back({root, expand(root), 0});
    while (!blue.empty()) {
      Frame& f = blue.back();
      if (f.next < f.succ.size()) {
        ProductStep t = f.succ[f.next++];
        auto kt = key(t.state, t.node);
        auto& c = color[kt];
        if ((c & kCyan) && (a.nodes[f.at.node].accepting || a.nodes[t.node].accepting)) {
          result.lasso = lasso_from_blue(blue.size() - 1, cyan_pos.at(kt), t.agent);
          result.product_states = color.size();
          return result;
        }
        if (c == 0) {
          c = kCyan;
          cyan_pos[kt] = blue.size();
          blue.push_back({t, expand(t), 0});
        }
        continue;
      }
      ProductStep done = f.at;
      if (a.nodes[done.node].accepting) {
        if (auto l = red_search(done)) {
          result.lasso = std::move(l);
          result.product_states = color.size();
          return result;
        }
      }
      auto kd = key(done.state, done.node);
      color[kd] = static_cast<std::uint8_t>((color[kd] & ~kCyan) | kBlue);
      cyan_pos.erase(kd);
      blue.pop_back();
    }
  }
  result.product_states = color.size();
  return result;
}

// ---------------------------------------------------------------------------
// Verdicts and counterexamples

enum class Result { Satisfied, Violated };

inline std::string_view to_string(Result r) { return r == Result::Satisfied ? "Satisfied" : "Violated"; }

struct Counterexample {
  struct Step {
    std::optional<std::string> agent; // acting agent; none for the first step and stutters
    bool stutter = false;
    std::optional<logic::Term> action; // what the acting agent did
    std::string fingerprint;           // hex digest of the reached state
    std::uint32_t state = 0;           // id in the explored graph / model
    std::uint32_t buchi = 0;
  };
  std::vector<Step> steps;
  std::size_t cycle_start = 0;
  std::optional<std::string> closing_agent; // edge from the last step back to cycle_start
  bool closing_stutter = false;
  bool validated = false;

  nlohmann::json to_json() const {
    auto js = nlohmann::json::array();
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& s = steps[i];
      js.push_back({{"index", i},
                    {"agent", s.agent ? nlohmann::json(*s.agent) : nlohmann::json()},
                    {"stutter", s.stutter},
                    {"action", s.action ? nlohmann::json(s.action->to_string()) : nlohmann::json()},
                    {"state", s.state},
                    {"fingerprint", s.fingerprint},
                    {"buchi", s.buchi}});
    }
    return {{"cycleStart", cycle_start},
            {"steps", std::move(js)},
            {"closing",
             {{"agent", closing_agent ? nlohmann::json(*closing_agent) : nlohmann::json()},
              {"stutter", closing_stutter}}},
            {"validated", validated}};
  }

  static Counterexample from_json(const nlohmann::json& j) {
    Counterexample c;
    c.cycle_start = j.at("cycleStart").get<std::size_t>();
    for (const auto& js : j.at("steps")) {
      Step s;
      if (!js.at("agent").is_null()) s.agent = js["agent"].get<std::string>();
      s.stutter = js.at("stutter").get<bool>();
      if (!js.at("action").is_null()) s.action = logic::parse_term(js["action"].get<std::string>());
      s.state = js.at("state").get<std::uint32_t>();
      s.fingerprint = js.at("fingerprint").get<std::string>();
      s.buchi = js.at("buchi").get<std::uint32_t>();
      c.steps.push_back(std::move(s));
    }
    const auto& cl = j.at("closing");
    if (!cl.at("agent").is_null()) c.closing_agent = cl["agent"].get<std::string>();
    c.closing_stutter = cl.at("stutter").get<bool>();
    c.validated = j.value("validated", false);
    return c;
  }
};

struct Verdict {
  Result result = Result::Satisfied;
  std::optional<Counterexample> counterexample;
  std::size_t states_explored = 0;
  std::size_t product_states_explored = 0;
};

template <class Kripke>
Counterexample make_counterexample(const Kripke& k, const Lasso& l) {
  Counterexample c;
  for (const auto& p : l.steps) {
    Counterexample::Step s;
    s.state = p.state;
    s.buchi = p.node;
    s.stutter = p.agent == kStutter;
    if (p.agent >= 0) {
      s.agent = k.agents()[static_cast<std::size_t>(p.agent)];
      s.action = k.state(p.state).agents[static_cast<std::size_t>(p.agent)].last_action;
    }
    s.fingerprint = runtime::fingerprint(k.state(p.state)).hex();
    c.steps.push_back(std::move(s));
  }
  c.cycle_start = l.cycle_start;
  c.closing_stutter = l.closing_agent == kStutter;
  if (l.closing_agent >= 0) c.closing_agent = k.agents()[static_cast<std::size_t>(l.closing_agent)];
  return c;
}

/// Independent check of a counterexample: replays the agent choices from
/// `initial` with the interpreter, confirms each reached state and the
/// cycle closure by fingerprint, and runs the lasso's atom valuations
/// through the automaton for the negated property.
inline bool validate_counterexample(const MasState& initial, const psl::Formula& property,
                                    const Counterexample& c, std::string* why = nullptr) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (c.steps.empty() || c.cycle_start >= c.steps.size()) return fail("empty or ill-formed lasso");

  auto advance = [&](const MasState& s, const std::optional<std::string>& agent, bool stutter,
                     std::string& err) -> std::optional<MasState> {
    if (stutter) {
      if (!runtime::is_end_state(s)) {
        err = "stutter step from a non-end state";
        return std::nullopt;
      }
      return s;
    }
    if (!agent) {
      err = "step without an agent";
      return std::nullopt;
    }
    try {
      return runtime::mas_step(s, *agent);
    } catch (const Error& e) {
      err = e.what();
      return std::nullopt;
    }
  };

  std::vector<MasState> replay{initial};
  if (runtime::fingerprint(initial).hex() != c.steps[0].fingerprint)
    return fail("first step is not the initial state");
  for (std::size_t i = 1; i < c.steps.size(); ++i) {
    std::string err;
    auto next = advance(replay.back(), c.steps[i].agent, c.steps[i].stutter, err);
    if (!next) return fail("step " + std::to_string(i) + ": " + err);
    if (runtime::fingerprint(*next).hex() != c.steps[i].fingerprint)
      return fail("step " + std::to_string(i) + " reaches a different state");
    replay.push_back(std::move(*next));
  }
  {
    std::string err;
    auto back = advance(replay.back(), c.closing_agent, c.closing_stutter, err);
    if (!back) return fail("closing step: " + err);
    if (runtime::fingerprint(*back).hex() != c.steps[c.cycle_start].fingerprint)
      return fail("closing step does not return to the cycle start");
  }

  Automaton neg = buchi::negated_automaton(property);
  std::vector<Letter> prefix, cycle;
  for (std::size_t i = 0; i < replay.size(); ++i)
    (i < c.cycle_start ? prefix : cycle).push_back(letter_of(replay[i], neg.atoms));
  if (!buchi::accepts_lasso(neg, prefix, cycle))
    return fail("the negated-property automaton rejects the replayed run");
  return true;
}

struct CheckOptions {
  std::size_t state_cap = kDefaultStateCap;
};

/// Explores the product of the interleaving graph with the automaton for
/// the negated property as it goes; Satisfied iff no accepting cycle.
inline Verdict check_on_the_fly(const MasState& initial, const psl::Formula& property,
                                const CheckOptions& opt = {}) {
  Automaton neg = buchi::negated_automaton(property);
  LazyGraph g(initial, neg.atoms, opt.state_cap);
  SearchResult r = nested_dfs(g, neg);
  Verdict v;
  v.states_explored = g.size();
  v.product_states_explored = r.product_states;
  if (r.lasso) {
    v.result = Result::Violated;
    v.counterexample = make_counterexample(g, *r.lasso);
    v.counterexample->validated = validate_counterexample(initial, property, *v.counterexample);
  }
  return v;
}

/// Checks a property against a previously explored model. Counterexamples
/// are validated against the model's own states and edges.
inline Verdict check_on_model(const StateSpaceModel& m, const psl::Formula& property) {
  Automaton neg = buchi::negated_automaton(property);
  ModelGraph g(m, neg.atoms);
  SearchResult r = nested_dfs(g, neg);
  Verdict v;
  v.states_explored = m.states.size();
  v.product_states_explored = r.product_states;
  if (r.lasso) {
    v.result = Result::Violated;
    v.counterexample = make_counterexample(g, *r.lasso);
    // edge-level replay through the model, then automaton acceptance
    const auto& l = *r.lasso;
    bool ok = l.steps.front().state == m.initial;
    auto has_edge = [&](std::uint32_t from, std::int32_t agent, std::uint32_t to) {
      const auto& es = m.edges[from];
      return std::find(es.begin(), es.end(), Edge{agent, to}) != es.end();
    };
    for (std::size_t i = 1; ok && i < l.steps.size(); ++i)
      ok = has_edge(l.steps[i - 1].state, l.steps[i].agent, l.steps[i].state);
    ok = ok && has_edge(l.steps.back().state, l.closing_agent, l.steps[l.cycle_start].state);
    if (ok) {
      std::vector<Letter> prefix, cycle;
      for (std::size_t i = 0; i < l.steps.size(); ++i)
        (i < l.cycle_start ? prefix : cycle).push_back(letter_of(m.states[l.steps[i].state], neg.atoms));
      ok = buchi::accepts_lasso(neg, prefix, cycle);
    }
    v.counterexample->validated = ok;
  }
  return v;
}

} // namespace aortamc::checker
