#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace aortamc;
using namespace aortamc::runtime;
using logic::parse_term;
using testing_support::fixture_initial;

namespace {

Term T(std::string_view s) { return parse_term(s); }

/// Runs a seeded random schedule to an end state.
MasState run_to_end(MasState s, std::uint64_t seed, std::size_t max_steps = 10'000) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < max_steps && !is_end_state(s); ++i) {
    auto act = active_agents(s);
    s = mas_step(std::move(s), act[rng() % act.size()]);
  }
  return s;
}

AgentSetup setup(std::string name, std::string program_text = {}) {
  AgentSetup a;
  a.name = name;
  if (!program_text.empty()) {
    auto progs = apl::parse_apl(program_text);
    a.program = std::make_shared<const apl::AplProgram>(progs.at(0));
  }
  return a;
}

} // namespace

TEST(InitialState, FixtureAgentsAndBases) {
  MasState s = fixture_initial();
  ASSERT_EQ(s.agents.size(), 2u);
  EXPECT_EQ(s.agent("alice").aorta.ms.goals, (FactBase{T("editor")}));
  EXPECT_EQ(s.agent("bob").aorta.ms.goals, (FactBase{T("writer")}));
  const auto& b = s.agent("alice").aorta.ms.beliefs;
  EXPECT_TRUE(b.contains(T("me(alice)")));
  EXPECT_TRUE(b.contains(T("agent(alice)")));
  EXPECT_TRUE(b.contains(T("agent(bob)")));
  EXPECT_TRUE(s.agent("alice").aorta.ms.options.empty());
  EXPECT_TRUE(s.agent("alice").inbox.empty());
  EXPECT_EQ(active_agents(s), (std::vector<std::string>{"alice", "bob"}));
  EXPECT_FALSE(is_end_state(s));
}

TEST(InitialState, Errors) {
  aorta::OrgSpec empty;
  EXPECT_THROW(initial_state({}, empty), ConfigError);
  EXPECT_THROW(initial_state({setup("a"), setup("a")}, empty), DuplicateAgentName);
  aorta::OrgSpec bad;
  bad.add(T("dep(x, y, z)"));
  EXPECT_THROW(initial_state({setup("a")}, bad), UnknownRoleInSpec);
}

TEST(MasStep, FirstAliceStepLeavesBobUntouched) {
  MasState s0 = fixture_initial();
  StepRecord rec;
  MasState s1 = mas_step(s0, "alice", &rec);
  EXPECT_EQ(rec.agent, "alice");
  ASSERT_TRUE(rec.action);
  EXPECT_EQ(*rec.action, T("enact(editor)"));
  EXPECT_TRUE(s1.agent("alice").aorta.ms.org.contains(T("rea(alice, editor)")));
  EXPECT_TRUE(s1.agent("alice").apl.intends(T("editor")));
  EXPECT_EQ(to_json(s1)["agents"][1], to_json(s0)["agents"][1]);
}

TEST(MasStep, ErrorsOnInactiveOrUnknownAgent) {
  MasState s = run_to_end(fixture_initial(), 0);
  ASSERT_TRUE(is_end_state(s));
  EXPECT_THROW(mas_step(s, "alice"), InactiveAgentChosen);
  EXPECT_THROW(mas_step(fixture_initial(), "carol"), UnknownAgent);
}

TEST(MasStep, DeliveredGoalWakesRecipient) {
  MasState s = fixture_initial();
  // alice can delegate only once bob has told her his role, so schedule both
  bool delegated = false;
  for (int i = 0; i < 80 && !delegated && !is_end_state(s); ++i) {
    auto act = active_agents(s);
    std::string who = s.agent("alice").active ? "alice" : act.front();
    StepRecord rec;
    s = mas_step(std::move(s), who, &rec);
    for (const auto& m : rec.delivered)
      delegated |= who == "alice" && m.content.has_functor("goal", 1) && m.recipient == "bob";
  }
  ASSERT_TRUE(delegated);
  EXPECT_TRUE(s.agent("bob").active);
  EXPECT_FALSE(s.agent("bob").inbox.empty());
}

TEST(MasStep, InboxWakesQuiescentAgent) {
  MasState s = fixture_initial();
  s.agents[0].active = false;
  s.agents[1].active = false;
  s.agents[1].inbox.push_back({"alice", "bob", T("bel(fdv)")});
  s.agents[1].active = true;
  EXPECT_EQ(active_agents(s), std::vector<std::string>{"bob"});
  s = mas_step(std::move(s), "bob");
  EXPECT_TRUE(s.agent("bob").aorta.ms.beliefs.contains(T("fdv")));
}

TEST(MasStep, Deterministic) {
  MasState s = fixture_initial();
  for (const char* who : {"alice", "bob", "alice", "alice", "bob"}) {
    if (!s.agent(who).active) continue;
    MasState a = mas_step(s, who), b = mas_step(s, who);
    EXPECT_EQ(serialize(a), serialize(b));
    s = std::move(a);
  }
}

TEST(EndState, RandomRunsTerminateWithSv) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    MasState s = run_to_end(fixture_initial(), seed);
    ASSERT_TRUE(is_end_state(s)) << "seed " << seed;
    EXPECT_TRUE(active_agents(s).empty());
    EXPECT_TRUE(s.agent("alice").aorta.ms.beliefs.contains(T("sv"))) << "seed " << seed;
    // sleep soundness: rerunning a cycle and a step on copies changes nothing
    for (const auto& a : s.agents) {
      auto c = aorta::aorta_cycle(a.aorta, {}, *s.registry);
      EXPECT_FALSE(c.agent.changed);
      EXPECT_TRUE(c.outbox.empty());
      auto ms = a.aorta.ms;
      auto st = a.apl;
      EXPECT_FALSE(apl::apl_step(ms.beliefs, ms.goals, st, a.program->plans));
    }
  }
}

TEST(EndState, MessageConservation) {
  // every sent message is received exactly once along a run
  MasState s = fixture_initial();
  std::mt19937_64 rng(3);
  std::size_t sent = 0, received = 0;
  while (!is_end_state(s)) {
    auto act = active_agents(s);
    auto who = act[rng() % act.size()];
    received += s.agent(who).inbox.size();
    StepRecord rec;
    s = mas_step(std::move(s), who, &rec);
    sent += rec.delivered.size();
  }
  EXPECT_GT(sent, 0u);
  EXPECT_EQ(sent, received);
}

TEST(Fingerprint, InsertionOrderIrrelevant) {
  MasState a = fixture_initial(), b = fixture_initial();
  for (auto f : {"x", "y", "z"}) a.agents[0].aorta.ms.beliefs.insert(T(f));
  for (auto f : {"z", "x", "y"}) b.agents[0].aorta.ms.beliefs.insert(T(f));
  EXPECT_EQ(fingerprint(a).digest, fingerprint(b).digest);
  EXPECT_EQ(fingerprint(a).bytes, fingerprint(b).bytes);
}

TEST(Fingerprint, ExtraBeliefChangesDigest) {
  MasState a = fixture_initial(), b = a;
  b.agents[1].aorta.ms.beliefs.insert(T("wsec"));
  EXPECT_NE(fingerprint(a).digest, fingerprint(b).digest);
}

TEST(Fingerprint, RoundTrip) {
  MasState s = run_to_end(fixture_initial(), 5, 12);
  MasState templ = fixture_initial();
  MasState back = deserialize(serialize(s), &templ);
  EXPECT_EQ(fingerprint(back).hex(), fingerprint(s).hex());
  // the restored state still runs identically
  if (!is_end_state(s)) {
    auto who = active_agents(s).front();
    EXPECT_EQ(serialize(mas_step(s, who)), serialize(mas_step(back, who)));
  }
}

TEST(Fingerprint, DigestIsFnv1a) {
  EXPECT_EQ(digest(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(digest("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_config("/nonexistent/mas.json"), ConfigError);
  auto dir = std::filesystem::temp_directory_path() / "aortamc_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  {
    std::ofstream(dir / "a.gwen") << "GWENDOLEN\n:name: a\n:Plans:\n+!g [achieve] : {True} +b;\n";
    std::ofstream(dir / "syn.json") << R"({"agents":[{"name":"a","apl":"a.gwen"}]})";
  }
  try {
    load_config(dir / "syn.json");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find("a.gwen"), std::string::npos);
  }
  {
    std::ofstream(dir / "dup.json")
        << R"({"agents":[{"name":"alice","apl":")" << (testing_support::fixture_dir() / "agents.gwen").string()
        << R"("},{"name":"alice","apl":")" << (testing_support::fixture_dir() / "agents.gwen").string() << R"("}]})";
  }
  EXPECT_THROW(load_config(dir / "dup.json").initial(), DuplicateAgentName);
}
