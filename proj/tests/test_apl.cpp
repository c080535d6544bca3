#include <gtest/gtest.h>

#include "support.hpp"

using namespace aortamc;
using namespace aortamc::apl;
using logic::parse_term;

namespace {

Term T(std::string_view s) { return parse_term(s); }

const std::vector<AplProgram>& fixture_programs() {
  static auto progs = parse_apl(testing_support::fixture_text("agents.gwen"));
  return progs;
}

const AplProgram& program(const std::string& name) {
  for (const auto& p : fixture_programs())
    if (p.name == name) return p;
  throw std::runtime_error("no program " + name);
}

} // namespace

TEST(AplParse, FixtureProgramsVerbatim) {
  const auto& progs = fixture_programs();
  ASSERT_EQ(progs.size(), 2u);
  EXPECT_EQ(progs[0].name, "alice");
  EXPECT_EQ(progs[0].initial_goals, std::vector<Term>{T("editor")});
  EXPECT_EQ(progs[0].plans.size(), 7u);
  EXPECT_EQ(progs[1].name, "bob");
  EXPECT_EQ(progs[1].initial_goals, std::vector<Term>{T("writer")});
  EXPECT_EQ(progs[1].plans.size(), 3u);
  EXPECT_TRUE(progs[0].initial_beliefs.empty());
  const Plan& p = progs[0].plans[0];
  EXPECT_EQ(p.trigger, T("editor"));
  EXPECT_TRUE(p.guard.conjuncts.empty());
  EXPECT_EQ(p.body, std::vector<Term>{T("editor")});
}

TEST(AplParse, EmptyInitialGoals) {
  auto progs = parse_apl("GWENDOLEN\n:name: c\n:Initial Beliefs:\nb\n:Belief Rules:\n:Initial Goals:\n:Plans:\n");
  ASSERT_EQ(progs.size(), 1u);
  EXPECT_TRUE(progs[0].initial_goals.empty());
  EXPECT_EQ(progs[0].initial_beliefs, std::vector<Term>{T("b")});
}

TEST(AplParse, GuardedMultiStepPlan) {
  auto progs = parse_apl(
      "GWENDOLEN\n:name: c\n:Initial Beliefs:\n:Belief Rules:\n:Initial Goals:\ng [achieve]\n:Plans:\n"
      "+!g [achieve] : {B ready, ~B blocked} <- +a, +b;\n");
  ASSERT_EQ(progs[0].plans.size(), 1u);
  EXPECT_EQ(progs[0].plans[0].guard.conjuncts.size(), 2u);
  EXPECT_EQ(progs[0].plans[0].body.size(), 2u);
}

TEST(AplParse, UnsupportedFeatures) {
  EXPECT_THROW(parse_apl("GWENDOLEN\n:name: c\n:Initial Beliefs:\n:Belief Rules:\n:Initial Goals:\n:Plans:\n"
                         "+!g [achieve] : {True} <- -b;\n"),
               UnsupportedFeature);
  EXPECT_THROW(parse_apl("GWENDOLEN\n:name: c\n:Initial Beliefs:\n:Belief Rules:\nb :- c\n:Initial Goals:\n:Plans:\n"),
               UnsupportedFeature);
}

TEST(AplParse, SyntaxError) {
  EXPECT_THROW(parse_apl("GWENDOLEN\n:name: c\n:Plans:\n+!g [achieve] : {True} +b;\n"), SyntaxError);
}

TEST(AplStep, AdoptsIntendsAndAchieves) {
  const auto& plans = program("alice").plans;
  FactBase beliefs, goals{T("editor")};
  AplAgentState st;
  EXPECT_TRUE(apl_step(beliefs, goals, st, plans)); // intention created
  EXPECT_TRUE(st.intends(T("editor")));
  EXPECT_FALSE(beliefs.contains(T("editor")));
  EXPECT_TRUE(apl_step(beliefs, goals, st, plans)); // body step
  EXPECT_TRUE(beliefs.contains(T("editor")));
  EXPECT_TRUE(apl_step(beliefs, goals, st, plans)); // goal dropped
  EXPECT_FALSE(goals.contains(T("editor")));
  EXPECT_FALSE(apl_step(beliefs, goals, st, plans));
}

TEST(AplStep, DelegatedGoalEventuallyBelieved) {
  const auto& plans = program("bob").plans;
  FactBase beliefs, goals;
  AplAgentState st;
  goals.insert(T("wsec")); // as delivered by a goal(wsec) message
  for (int i = 0; i < 4; ++i) apl_step(beliefs, goals, st, plans);
  EXPECT_TRUE(beliefs.contains(T("wsec")));
  EXPECT_FALSE(goals.contains(T("wsec")));
}

TEST(AplStep, IdleWithoutGoals) {
  FactBase beliefs, goals;
  AplAgentState st;
  EXPECT_FALSE(apl_step(beliefs, goals, st, program("alice").plans));
}

TEST(AplStep, NoApplicablePlanLeavesGoalPending) {
  FactBase beliefs, goals{T("unknown")};
  AplAgentState st;
  apl_step(beliefs, goals, st, program("alice").plans);
  EXPECT_TRUE(goals.contains(T("unknown")));
  EXPECT_EQ(st.stuck, std::vector<Term>{T("unknown")});
  EXPECT_FALSE(apl_step(beliefs, goals, st, program("alice").plans));
}

TEST(AplStep, ProgressWithinTwoSteps) {
  // every goal with a single-step {True} plan is believed within two steps
  for (const auto& prog : fixture_programs()) {
    for (const auto& plan : prog.plans) {
      FactBase beliefs, goals{plan.trigger};
      AplAgentState st;
      apl_step(beliefs, goals, st, prog.plans);
      apl_step(beliefs, goals, st, prog.plans);
      EXPECT_TRUE(beliefs.contains(plan.trigger)) << plan.trigger.to_string();
    }
  }
}

TEST(AplStep, FifoGoalSelection) {
  const auto& plans = program("alice").plans;
  FactBase beliefs, goals;
  AplAgentState st;
  goals.insert(T("wtitle"));
  apl_step(beliefs, goals, st, plans);
  goals.insert(T("fdv"));
  goals.insert(T("editor"));
  apl_step(beliefs, goals, st, plans); // a pending goal is intended before wtitle advances
  ASSERT_EQ(st.intentions.size(), 2u);
  EXPECT_EQ(st.intentions[0].goal, T("wtitle"));
}

TEST(AplStep, Deterministic) {
  const auto& plans = program("alice").plans;
  FactBase b1, g1{T("editor"), T("wabs")}, b2 = b1, g2 = g1;
  AplAgentState s1, s2;
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(apl_step(b1, g1, s1, plans), apl_step(b2, g2, s2, plans));
    EXPECT_EQ(b1, b2);
    EXPECT_EQ(g1, g2);
    EXPECT_EQ(s1, s2);
  }
}
