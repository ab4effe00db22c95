#include <gtest/gtest.h>

#include <random>

#include "support/toy.hpp"
#include "tri/pipeline.hpp"

using namespace tri;
using namespace tri::testing;

namespace {

struct Problem {
  corpus::ProblemEntry entry;
  const corpus::FixtureSamples& samples() const { return *entry.samples; }
  const TestInputSet& inputs() const { return *entry.inputs; }
  const Judge& judge() const { return *entry.judge; }
};

Problem load(const json& j) { return {toy::load(j)}; }

const EquivalenceClass& class_of(const std::vector<EquivalenceClass>& cs, const std::string& id) {
  for (const auto& c : cs) {
    if (c.id == id) return c;
  }
  throw std::out_of_range(id);
}

Verdict verdict_of(const Problem& p, const std::vector<EquivalenceClass>& cs, const ConsensusDecision& d) {
  return judge_class(p.judge(), class_of(cs, d.classId), p.inputs());
}

bool has_prefix(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST(PickProblem, ClassMassesAndConsensusBaselines) {
  auto p = load(toy::pick::entry());
  Executor ex;
  auto classes = cluster(p.samples().forward, p.inputs(), ex);
  EXPECT_EQ(class_of(classes, "p1#0").mass, Rational(23, 100));
  EXPECT_EQ(class_of(classes, "p2#0").mass, Rational(7, 100));
  EXPECT_EQ(class_of(classes, "p2b#0").mass, Rational(7, 100));

  Rational correctMass(0);
  for (const auto& c : classes) {
    if (judge_class(p.judge(), c, p.inputs()) == Verdict::Correct) correctMass += c.mass;
  }
  EXPECT_EQ(correctMass, Rational(14, 100));

  auto plur = plurality(classes);
  EXPECT_EQ(plur.classId, "p1#0");
  EXPECT_EQ(verdict_of(p, classes, plur), Verdict::Incorrect);
  EXPECT_FALSE(majority(classes).selected);
}

TEST(PickProblem, CascadeKeepsOnlyTheExactEnumerator) {
  auto p = load(toy::pick::entry());
  Executor ex;
  auto samples = toy::samples_of(p.entry);
  auto fwd = detail::representatives(cluster(samples.forward, p.inputs(), ex), samples.forward);
  auto enums = detail::representatives(cluster(samples.enumerators, p.inputs(), ex), samples.enumerators);
  std::vector<CandidateProgram> sinvs{samples.sinvs.front(), samples.sinvs.back()};
  CascadeOptions opt;
  opt.enumScheme = TriangulationScheme::partial_enum_sinv(1);
  auto r = cascade_enum_sinv(fwd, enums, sinvs, p.inputs(), ex, {}, opt);
  EXPECT_EQ(r.survivingEnumerators, std::vector<std::string>{"e1#0"});
  EXPECT_EQ(r.survivingForward, (std::vector<std::string>{"p2#0", "p2b#0"}));
  // every rejection carries a concrete input
  for (const auto& v : r.log) {
    if (!v.agrees) {
      EXPECT_FALSE(v.counterexample.empty()) << v.pId << " " << v.qId;
    }
  }
}

TEST(PickProblem, PipelineSelectsACorrectClass) {
  auto p = load(toy::pick::entry());
  Executor ex;
  auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
  ASSERT_TRUE(r.decision.selected) << r.decision.reason;
  EXPECT_EQ(r.scheme, "enum-sinv");
  EXPECT_EQ(r.decision.representative, "p2#0");
  EXPECT_TRUE(has_prefix(r.decision.reason, "enum-sinv: 2 program classes x 1 witness classes"));
  EXPECT_EQ(r.decision.score, Rational(14, 100) * Rational(6, 10));
  EXPECT_EQ(verdict_of(p, r.forwardClasses, r.decision), Verdict::Correct);
}

TEST(NearProblem, InexactSpecificationIsTriangulatedThroughEnumerators) {
  auto p = load(toy::near_entry());
  Executor ex;
  auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
  ASSERT_TRUE(r.decision.selected);
  EXPECT_EQ(r.scheme, "enum-sinv");
  EXPECT_EQ(verdict_of(p, r.forwardClasses, r.decision), Verdict::Correct);
  auto plur = plurality(r.forwardClasses);
  EXPECT_EQ(plur.classId, "c#0");
  EXPECT_EQ(verdict_of(p, r.forwardClasses, plur), Verdict::Incorrect);
}

TEST(NearProblem, FallsBackToSetValuedInverseWithoutEnumerators) {
  auto p = load(toy::near_entry());
  Executor ex;
  auto s = toy::samples_of(p.entry);
  s.enumerators.clear();
  auto r = decide_pipeline(s, p.inputs(), ex);
  ASSERT_TRUE(r.decision.selected);
  EXPECT_EQ(r.scheme, "fwd-sinv");
  EXPECT_EQ(verdict_of(p, r.forwardClasses, r.decision), Verdict::Correct);
}

TEST(IncProblem, InverseSchemeAndEveryBaselineAgree) {
  auto p = load(toy::inc_entry());
  Executor ex;
  const auto& s = p.samples();
  auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
  ASSERT_TRUE(r.decision.selected);
  EXPECT_EQ(r.scheme, "fwd-inv");
  EXPECT_EQ(r.decision.classId, "a#0");
  EXPECT_EQ(r.decision.score, Rational(12, 30) * Rational(10, 15));
  EXPECT_EQ(plurality(r.forwardClasses).classId, "c#0");

  const auto& cs = r.forwardClasses;
  auto tests = ransac_tests(cs, s.forward, s.tests, "inc", ex);
  EXPECT_EQ(tests.decision.strategy, "ransac-tests");
  EXPECT_EQ(tests.decision.classId, "a#0");
  EXPECT_EQ(tests.decision.score, Rational(12, 30) * Rational(2, 3));
  EXPECT_EQ(tests.verdicts.size(), 6u);
  EXPECT_EQ(tests.verdicts.front().scheme, "assertion-test");

  auto posts = ransac_postconditions(cs, s.forward, s.postconditions, p.inputs(), ex);
  EXPECT_EQ(posts.decision.strategy, "ransac-postcondition");
  EXPECT_EQ(posts.decision.classId, "a#0");
  EXPECT_EQ(posts.decision.score, Rational(12, 30));

  auto syn = ransac_equivalence("syntactic", cs, s.forward, s.syntactic, p.inputs(), ex);
  EXPECT_EQ(syn.decision.classId, "a#0");
  EXPECT_EQ(syn.decision.score, Rational(12, 30) * Rational(7, 10));
  EXPECT_EQ(syn.verdicts.front().scheme, "equivalence");

  auto obo = ransac_equivalence("off-by-one", cs, s.forward, s.offByOne, p.inputs(), ex, {}, 1);
  EXPECT_EQ(obo.decision.classId, "a#0");
  EXPECT_EQ(obo.verdicts.front().scheme, "equivalence+1");
  for (const auto& v : obo.verdicts) {
    // shifted a matches o1, shifted c matches o2
    EXPECT_EQ(v.agrees, (v.pId == "a#0") == (v.qId == "o1#0")) << v.pId << " " << v.qId;
  }
}

TEST(IncProblem, BaselinesAbstainWithoutWitnesses) {
  auto p = load(toy::inc_entry());
  Executor ex;
  const auto& s = p.samples();
  auto cs = cluster(s.forward, p.inputs(), ex);
  EXPECT_FALSE(ransac_tests(cs, s.forward, {}, "inc", ex).decision.selected);
  EXPECT_FALSE(ransac_postconditions(cs, s.forward, {}, p.inputs(), ex).decision.selected);
  EXPECT_EQ(ransac_equivalence("syntactic", cs, s.forward, {}, p.inputs(), ex).decision.reason, "no witnesses");
}

TEST(LostProblem, AbstainsWhenNothingAgrees) {
  auto p = load(toy::lost_entry());
  Executor ex;
  auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
  EXPECT_FALSE(r.decision.selected);
  EXPECT_EQ(r.decision.reason, "all schemes failed");
  EXPECT_TRUE(r.scheme.empty());
  EXPECT_EQ(r.verdicts.size(), 3u);
  for (const auto& v : r.verdicts) EXPECT_FALSE(v.agrees);
  for (const auto& c : r.forwardClasses) EXPECT_EQ(judge_class(p.judge(), c, p.inputs()), Verdict::Incorrect);
}

TEST(TwiceProblem, StreamProgramsAreTriangulatedPointwise) {
  auto p = load(toy::twice_entry());
  Executor ex;
  auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
  ASSERT_TRUE(r.decision.selected) << r.decision.reason;
  EXPECT_EQ(r.scheme, "fwd-inv");
  EXPECT_EQ(r.decision.classId, "d1#0");
  EXPECT_EQ(plurality(r.forwardClasses).classId, "d2#0");
  EXPECT_EQ(verdict_of(p, r.forwardClasses, r.decision), Verdict::Correct);
}

TEST(Pipeline, Contracts) {
  Executor ex;
  EXPECT_THROW(decide_pipeline({}, TestInputSet("x", int_range(0, 1)), ex), ContractViolation);
  auto p = load(toy::inc_entry());
  // an input outside every fixture table is a broken fixture, not a disagreement
  auto s = toy::samples_of(p.entry);
  EXPECT_THROW(decide_pipeline(s, TestInputSet("inc", int_range(40, 41)), ex), FixtureIncomplete);
  // forward samples alone give nothing to triangulate against
  s.inverses.clear();
  EXPECT_EQ(decide_pipeline(s, p.inputs(), ex).decision.reason, "all schemes failed");
}

// The decision depends on the multiset of samples, not on their order.
TEST(Pipeline, InvariantUnderSampleOrder) {
  std::mt19937_64 rng(4);
  for (const auto& j : {toy::near_entry(), toy::inc_entry(), toy::twice_entry()}) {
    auto p = load(j);
    Executor ex;
    auto base = toy::samples_of(p.entry);
    auto expect = decide_pipeline(base, p.inputs(), ex);
    for (int round = 0; round < 5; ++round) {
      auto s = base;
      std::shuffle(s.forward.begin(), s.forward.end(), rng);
      std::shuffle(s.enumerators.begin(), s.enumerators.end(), rng);
      std::shuffle(s.sinvs.begin(), s.sinvs.end(), rng);
      std::shuffle(s.inverses.begin(), s.inverses.end(), rng);
      auto got = decide_pipeline(s, p.inputs(), ex);
      EXPECT_EQ(got.decision.selected, expect.decision.selected);
      EXPECT_EQ(got.decision.classId, expect.decision.classId);
      EXPECT_EQ(got.decision.score, expect.decision.score);
      EXPECT_EQ(got.scheme, expect.scheme);
    }
  }
}

// Whatever is selected is a forward class, and its score is the product of
// its own mass (at most) and a witness mass (at most one).
TEST(Pipeline, SelectionIsAForwardClass) {
  for (const auto& j : toy::corpus()) {
    auto p = load(j);
    Executor ex;
    auto r = decide_pipeline(toy::samples_of(p.entry), p.inputs(), ex);
    if (!r.decision.selected) continue;
    const auto& c = class_of(r.forwardClasses, r.decision.classId);
    EXPECT_EQ(c.representative, r.decision.representative);
    EXPECT_GT(r.decision.score, Rational(0));
    EXPECT_LE(r.decision.score, Rational(1));
    for (const auto& v : r.verdicts) EXPECT_EQ(v.problemId, p.entry.description.id);
  }
}
