#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "tri/consensus.hpp"

using namespace tri;
using namespace tri::testing;

namespace {

std::vector<EquivalenceClass> classes_with(std::vector<std::pair<std::string, long long>> sizes) {
  std::vector<std::string> ids;
  std::vector<std::vector<Value>> outs;
  long long tag = 0;
  for (auto& [prefix, n] : sizes) {
    for (long long k = 0; k < n; ++k) {
      ids.push_back(prefix + "#" + std::to_string(k));
      outs.push_back({I(tag)});
    }
    ++tag;
  }
  return cluster_outcomes(ids, outs);
}

}  // namespace

TEST(Cluster, GroupsByOutcomeVector) {
  auto cs = cluster_outcomes({"b", "a", "c", "d"}, {{I(1), I(2)}, {I(1), I(2)}, {I(1), Value::undefined()},
                                                    {I(1), Value::demonic()}});
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs[0].id, "a");
  EXPECT_EQ(cs[0].members, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(cs[0].mass, Rational(1, 2));
  EXPECT_EQ(cs[1].id, "c");
  EXPECT_EQ(cs[2].id, "d");
  EXPECT_TRUE(cluster_outcomes({}, {}).empty());
  EXPECT_THROW(cluster_outcomes({"a"}, {}), ContractViolation);
}

TEST(Cluster, SetOrderDoesNotSplitClasses) {
  auto cs = cluster_outcomes({"x", "y"}, {{full({1, 2})}, {full({2, 1, 2})}});
  EXPECT_EQ(cs.size(), 1u);
}

TEST(Cluster, EncodingBoundariesDoNotCollide) {
  // concatenated keys must stay unambiguous
  auto cs = cluster_outcomes({"x", "y"}, {{S("ab"), S("c")}, {S("a"), S("bc")}});
  EXPECT_EQ(cs.size(), 2u);
}

// Clustering is a partition: masses sum to one and every member appears once.
TEST(Cluster, IsAPartition) {
  ValueGen g(5);
  for (int round = 0; round < 100; ++round) {
    std::vector<std::string> ids;
    std::vector<std::vector<Value>> outs;
    const std::size_t n = 1 + g.pick(20);
    for (std::size_t k = 0; k < n; ++k) {
      ids.push_back("p" + std::to_string(k));
      outs.push_back({I(static_cast<long long>(g.pick(4))), g.pick(5) == 0 ? Value::undefined() : I(0)});
    }
    auto cs = cluster_outcomes(ids, outs);
    Rational total(0);
    std::size_t members = 0;
    for (const auto& c : cs) {
      total += c.mass;
      members += c.members.size();
      for (const auto& m : c.members) {
        auto a = std::find(ids.begin(), ids.end(), m) - ids.begin();
        auto r = std::find(ids.begin(), ids.end(), c.representative) - ids.begin();
        for (std::size_t t = 0; t < outs[a].size(); ++t) {
          EXPECT_EQ(behavior_key(outs[a][t]), behavior_key(outs[r][t]));
        }
      }
    }
    EXPECT_EQ(total, Rational(1));
    EXPECT_EQ(members, n);
  }
}

TEST(Cluster, DuplicateCandidateIdsAreRejected) {
  auto p = tabulate("p", "x", int_range(0, 1), [](const Args& a) { return a[0]; });
  Executor ex;
  EXPECT_THROW(cluster({p, p}, TestInputSet("x", int_range(0, 1)), ex), ContractViolation);
  EXPECT_EQ(cluster({p}, TestInputSet("x", int_range(0, 1)), ex).size(), 1u);
}

TEST(Plurality, HeaviestThenSmallestRepresentative) {
  auto cs = classes_with({{"b", 3}, {"a", 3}, {"c", 2}});
  auto d = plurality(cs);
  EXPECT_TRUE(d.selected);
  EXPECT_EQ(d.classId, "a#0");
  EXPECT_EQ(d.score, Rational(3, 8));
  EXPECT_THROW(plurality({}), ContractViolation);
}

TEST(Majority, AbstainsWithoutAMajority) {
  auto d = majority(classes_with({{"a", 2}, {"b", 2}, {"c", 1}}));
  EXPECT_FALSE(d.selected);
  EXPECT_EQ(d.reason, "no majority");
  auto e = majority(classes_with({{"a", 3}, {"b", 3}}));
  EXPECT_TRUE(e.selected);
  EXPECT_EQ(e.classId, "a#0");
  EXPECT_FALSE(majority(classes_with({{"a", 3}, {"b", 3}}), Rational(2, 3)).selected);
  EXPECT_THROW(majority({}, Rational(0)), ContractViolation);
}

// ---------------------------------------------------------------------------
// bicliques

namespace {

// Exhaustive over every (row subset, column subset) pair.
Rational brute_best(const AgreementMatrix& m, const std::vector<Rational>& rm, const std::vector<Rational>& cm) {
  const std::size_t R = m.rows.size();
  const std::size_t C = m.cols.size();
  Rational best(0);
  for (unsigned rs = 1; rs < (1u << R); ++rs) {
    for (unsigned cs = 1; cs < (1u << C); ++cs) {
      bool ok = true;
      Rational a(0), b(0);
      for (std::size_t r = 0; r < R && ok; ++r) {
        if (!(rs >> r & 1u)) continue;
        a += rm[r];
        for (std::size_t c = 0; c < C; ++c) {
          if ((cs >> c & 1u) && !m.cells[r][c]) ok = false;
        }
      }
      if (!ok) continue;
      for (std::size_t c = 0; c < C; ++c) {
        if (cs >> c & 1u) b += cm[c];
      }
      best = std::max(best, a * b);
    }
  }
  return best;
}

AgreementMatrix random_matrix(ValueGen& g, std::size_t R, std::size_t C) {
  std::vector<std::string> rows, cols;
  for (std::size_t r = 0; r < R; ++r) rows.push_back("r" + std::to_string(r));
  for (std::size_t c = 0; c < C; ++c) cols.push_back("c" + std::to_string(c));
  AgreementMatrix m(rows, cols);
  for (auto& row : m.cells) {
    for (std::size_t c = 0; c < C; ++c) row[c] = g.pick(2) == 0;
  }
  return m;
}

std::vector<Rational> random_masses(ValueGen& g, std::size_t n) {
  std::vector<long long> w;
  long long total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    w.push_back(1 + static_cast<long long>(g.pick(5)));
    total += w.back();
  }
  std::vector<Rational> out;
  for (auto x : w) out.emplace_back(x, total);
  return out;
}

}  // namespace

TEST(Biclique, MatchesExhaustiveSearch) {
  ValueGen g(77);
  for (int round = 0; round < 300; ++round) {
    const std::size_t R = 1 + g.pick(5);
    const std::size_t C = 1 + g.pick(5);
    auto m = random_matrix(g, R, C);
    auto rm = random_masses(g, R);
    auto cm = random_masses(g, C);
    auto b = max_biclique(m, rm, cm);
    auto expect = brute_best(m, rm, cm);
    if (expect == Rational(0)) {
      EXPECT_FALSE(b.has_value());
      continue;
    }
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(b->score(), expect) << "round " << round;
    // it is a biclique and its masses add up
    Rational pm(0), wm(0);
    for (auto r : b->programs) {
      pm += rm[r];
      for (auto c : b->witnesses) EXPECT_TRUE(m.cells[r][c]);
    }
    for (auto c : b->witnesses) wm += cm[c];
    EXPECT_EQ(pm, b->programMass);
    EXPECT_EQ(wm, b->witnessMass);
    // the leading row is the heaviest program in it
    for (auto r : b->programs) EXPECT_GE(rm[b->programs.front()], rm[r]);
  }
}

TEST(Biclique, EmptyMatrixHasNone) {
  AgreementMatrix m({"r"}, {"c"});
  EXPECT_FALSE(max_biclique(m, {Rational(1)}, {Rational(1)}));
  EXPECT_THROW(max_biclique(m, {}, {Rational(1)}), ContractViolation);
}

TEST(Biclique, TiesPreferWitnessMassThenRowId) {
  // {r0} x {c0, c1} and {r0, r1} x {c0} score the same
  AgreementMatrix m({"r0", "r1"}, {"c0", "c1"});
  m.set("r0", "c0", true);
  m.set("r0", "c1", true);
  m.set("r1", "c0", true);
  auto b = max_biclique(m, {Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->witnesses.size(), 2u);
  EXPECT_EQ(b->programs, std::vector<std::size_t>{0});

  AgreementMatrix sym({"zz", "aa"}, {"c0"});
  sym.set("zz", "c0", true);
  sym.set("aa", "c0", true);
  auto s = max_biclique(sym, {Rational(1, 2), Rational(1, 2)}, {Rational(1)});
  EXPECT_EQ(s->programs.front(), 1u);
}

TEST(Biclique, UnknownIdsAreRejected) {
  AgreementMatrix m({"r"}, {"c"});
  EXPECT_THROW(m.set("x", "c", true), ContractViolation);
  m.cells.pop_back();
  EXPECT_THROW(m.validate(), ContractViolation);
}

TEST(Ransac, SelectsHeaviestRowOfBestBiclique) {
  auto cs = classes_with({{"a", 5}, {"b", 3}, {"c", 2}});
  AgreementMatrix m({"a#0", "b#0", "c#0"}, {"w1", "w2"});
  // a agrees with the light witness only, b and c with the heavy one
  m.set("a#0", "w1", true);
  m.set("b#0", "w2", true);
  m.set("c#0", "w2", true);
  auto d = ransac(m, cs, {Rational(1, 5), Rational(4, 5)});
  ASSERT_TRUE(d.selected);
  EXPECT_EQ(d.classId, "b#0");
  EXPECT_EQ(d.score, Rational(1, 2) * Rational(4, 5));
  EXPECT_EQ(d.reason, "2 program classes x 1 witness classes");
}

TEST(Ransac, AbstainsWithoutAgreement) {
  auto cs = classes_with({{"a", 1}});
  AgreementMatrix m({"a#0"}, {"w"});
  auto d = ransac(m, cs, {Rational(1)}, "x");
  EXPECT_FALSE(d.selected);
  EXPECT_EQ(d.strategy, "x");
  EXPECT_EQ(d.reason, "no agreeing witness");
  EXPECT_FALSE(ransac(AgreementMatrix({"a#0"}, {}), cs, {}).selected);
  AgreementMatrix bad({"zz"}, {"w"});
  EXPECT_THROW(ransac(bad, cs, {Rational(1)}), ContractViolation);
}
