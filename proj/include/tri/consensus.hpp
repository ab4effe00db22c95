#pragma once

// Equivalence classes of candidates and the selection strategies over them.

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/error.hpp"
#include "tri/eval.hpp"
#include "tri/exec.hpp"
#include "tri/problem.hpp"
#include "tri/value.hpp"

namespace tri {

struct EquivalenceClass {
  std::string id;  // equals the representative
  std::vector<std::string> members;
  std::string representative;
  std::vector<Value> behavior;  // outcome per test input, aligned
  Rational mass;
};

/// Groups candidates whose outcome vectors coincide (special kinds included).
/// Classes are ordered by representative id; the representative is the
/// lexicographically smallest member id.
inline std::vector<EquivalenceClass> cluster_outcomes(const std::vector<std::string>& ids,
                                                      const std::vector<std::vector<Value>>& outcomes) {
  if (ids.size() != outcomes.size()) throw ContractViolation("cluster: ids and outcomes differ in length");
  if (ids.empty()) return {};
  std::map<std::string, std::vector<std::size_t>> byKey;
  for (std::size_t n = 0; n < ids.size(); ++n) {
    std::string key;
    for (const auto& v : outcomes[n]) {
      auto b = behavior_key(v);
      key += std::to_string(b.size()) + ":" + b;
    }
    byKey[key].push_back(n);
  }
  std::vector<EquivalenceClass> out;
  const auto total = static_cast<long long>(ids.size());
  for (auto& [key, idx] : byKey) {
    EquivalenceClass c;
    for (auto n : idx) c.members.push_back(ids[n]);
    std::sort(c.members.begin(), c.members.end());
    c.representative = c.members.front();
    c.id = c.representative;
    auto rep = std::find(ids.begin(), ids.end(), c.representative) - ids.begin();
    c.behavior = outcomes[static_cast<std::size_t>(rep)];
    c.mass = Rational(static_cast<long long>(idx.size()), total);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

inline std::vector<EquivalenceClass> cluster(const std::vector<CandidateProgram>& candidates,
                                             const TestInputSet& inputs, Executor& exec) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.id()).second) throw ContractViolation("duplicate candidate id '" + c.id() + "'");
    ids.push_back(c.id());
  }
  std::vector<std::vector<Value>> outcomes;
  for (auto& batch : exec.execute_all(candidates, inputs)) {
    std::vector<Value> vs;
    for (auto& o : batch) vs.push_back(std::move(o.value));
    outcomes.push_back(std::move(vs));
  }
  return cluster_outcomes(ids, outcomes);
}

// ---------------------------------------------------------------------------

struct ConsensusDecision {
  bool selected = false;
  std::string strategy;
  std::string classId;
  std::string representative;
  Rational score{0};
  std::string reason;

  static ConsensusDecision select(std::string strategy, const EquivalenceClass& c, Rational score,
                                  std::string reason = {}) {
    return {true, std::move(strategy), c.id, c.representative, score, std::move(reason)};
  }
  static ConsensusDecision abstain(std::string strategy, std::string reason) {
    return {false, std::move(strategy), {}, {}, Rational(0), std::move(reason)};
  }
};

namespace detail {
/// Larger mass first, then smaller representative id.
inline const EquivalenceClass* heaviest(const std::vector<const EquivalenceClass*>& cs) {
  const EquivalenceClass* best = nullptr;
  for (const auto* c : cs) {
    if (!best || c->mass > best->mass || (c->mass == best->mass && c->representative < best->representative)) best = c;
  }
  return best;
}
}  // namespace detail

inline ConsensusDecision plurality(const std::vector<EquivalenceClass>& classes) {
  if (classes.empty()) throw ContractViolation("plurality: no classes");
  std::vector<const EquivalenceClass*> all;
  for (const auto& c : classes) all.push_back(&c);
  const auto* best = detail::heaviest(all);
  return ConsensusDecision::select("plurality", *best, best->mass);
}

inline ConsensusDecision majority(const std::vector<EquivalenceClass>& classes, Rational threshold = Rational(1, 2)) {
  if (threshold <= 0 || threshold > 1) throw ContractViolation("majority threshold must lie in (0, 1]");
  std::vector<const EquivalenceClass*> eligible;
  for (const auto& c : classes) {
    if (c.mass >= threshold) eligible.push_back(&c);
  }
  if (eligible.empty()) return ConsensusDecision::abstain("majority", "no majority");
  const auto* best = detail::heaviest(eligible);
  return ConsensusDecision::select("majority", *best, best->mass);
}

// ---------------------------------------------------------------------------
// RANSAC over a class-level agreement matrix

struct AgreementMatrix {
  std::vector<std::string> rows;  // program class ids
  std::vector<std::string> cols;  // witness class ids
  std::vector<std::vector<bool>> cells;

  AgreementMatrix() = default;
  AgreementMatrix(std::vector<std::string> r, std::vector<std::string> c)
      : rows(std::move(r)), cols(std::move(c)), cells(rows.size(), std::vector<bool>(cols.size(), false)) {}

  void set(const std::string& row, const std::string& col, bool agrees) {
    auto r = std::find(rows.begin(), rows.end(), row);
    auto c = std::find(cols.begin(), cols.end(), col);
    if (r == rows.end() || c == cols.end()) throw ContractViolation("agreement matrix: unknown class id");
    cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - cols.begin())] = agrees;
  }

  void validate() const {
    if (cells.size() != rows.size()) throw ContractViolation("agreement matrix: row count mismatch");
    for (const auto& r : cells) {
      if (r.size() != cols.size()) throw ContractViolation("agreement matrix: column count mismatch");
    }
  }
};

struct Biclique {
  std::vector<std::size_t> programs;
  std::vector<std::size_t> witnesses;
  Rational programMass{0};
  Rational witnessMass{0};
  Rational score() const { return programMass * witnessMass; }
};

namespace detail {

// Column sets as bit masks: one word for up to 64 witness classes, a
// dynamic bitset beyond that.
inline bool any(std::uint64_t x) { return x != 0; }
inline bool any(const boost::dynamic_bitset<>& x) { return x.any(); }
inline bool has(std::uint64_t x, std::size_t c) { return x >> c & 1u; }
inline bool has(const boost::dynamic_bitset<>& x, std::size_t c) { return x[c]; }
inline bool within(std::uint64_t a, std::uint64_t b) { return (a & ~b) == 0; }
inline bool within(const boost::dynamic_bitset<>& a, const boost::dynamic_bitset<>& b) { return a.is_subset_of(b); }

template <class Mask>
std::optional<Biclique> max_biclique(const AgreementMatrix& m, const std::vector<Rational>& rowMass,
                                     const std::vector<Rational>& colMass, const Mask& empty) {
  const std::size_t R = m.rows.size();
  const std::size_t C = m.cols.size();
  std::vector<Mask> W(R, empty);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      if (!m.cells[r][c]) continue;
      if constexpr (std::is_same_v<Mask, std::uint64_t>) W[r] |= std::uint64_t{1} << c;
      else W[r][c] = true;
    }
  }

  // sorted, so iteration order does not depend on the container
  std::vector<Mask> closed;
  std::vector<Mask> frontier;
  auto fresh = [&](const Mask& t) {
    auto it = std::lower_bound(closed.begin(), closed.end(), t);
    if (it != closed.end() && *it == t) return false;
    closed.insert(it, t);
    return true;
  };
  for (const auto& w : W) {
    if (any(w) && fresh(w)) frontier.push_back(w);
  }
  while (!frontier.empty()) {
    Mask s = std::move(frontier.back());
    frontier.pop_back();
    for (const auto& w : W) {
      Mask t = s & w;
      if (any(t) && fresh(t)) frontier.push_back(std::move(t));
    }
  }

  struct Scored {
    const Mask* q;
    Rational score, witnessMass, programMass;
    std::size_t selected;  // heaviest row, then smallest id
  };
  std::optional<Scored> best;
  for (const auto& q : closed) {
    Scored b{&q, 0, 0, 0, R};
    for (std::size_t c = 0; c < C; ++c) {
      if (has(q, c)) b.witnessMass += colMass[c];
    }
    for (std::size_t r = 0; r < R; ++r) {
      if (!within(q, W[r])) continue;
      b.programMass += rowMass[r];
      if (b.selected == R || rowMass[r] > rowMass[b.selected] ||
          (rowMass[r] == rowMass[b.selected] && m.rows[r] < m.rows[b.selected])) {
        b.selected = r;
      }
    }
    b.score = b.programMass * b.witnessMass;
    bool better = !best || b.score > best->score;
    if (best && b.score == best->score) {
      if (b.witnessMass != best->witnessMass) better = b.witnessMass > best->witnessMass;
      else if (b.programMass != best->programMass) better = b.programMass > best->programMass;
      else better = m.rows[b.selected] < m.rows[best->selected];
    }
    if (better) best = std::move(b);
  }
  if (!best) return std::nullopt;

  // lead with the row that will be selected
  Biclique out;
  out.programs.push_back(best->selected);
  for (std::size_t r = 0; r < R; ++r) {
    if (r != best->selected && within(*best->q, W[r])) out.programs.push_back(r);
  }
  for (std::size_t c = 0; c < C; ++c) {
    if (has(*best->q, c)) out.witnesses.push_back(c);
  }
  out.programMass = best->programMass;
  out.witnessMass = best->witnessMass;
  return out;
}

}  // namespace detail

/// A biclique maximising (program mass) x (witness mass), or nullopt when
/// no cell agrees. For a fixed witness set the best program set is every row
/// agreeing with all of it, and an optimal witness set is an intersection of
/// row witness sets, so those intersections are enumerated exhaustively.
/// Among optimal bicliques the larger witness mass wins, then the larger
/// program mass, then the one whose selected row id is smallest.
inline std::optional<Biclique> max_biclique(const AgreementMatrix& m, const std::vector<Rational>& rowMass,
                                            const std::vector<Rational>& colMass) {
  m.validate();
  if (rowMass.size() != m.rows.size() || colMass.size() != m.cols.size()) {
    throw ContractViolation("agreement matrix: weight vector size mismatch");
  }
  if (m.cols.size() <= 64) return detail::max_biclique(m, rowMass, colMass, std::uint64_t{0});
  return detail::max_biclique(m, rowMass, colMass, boost::dynamic_bitset<>(m.cols.size()));
}

/// RANSAC selection: the heaviest program class of the best biclique.
inline ConsensusDecision ransac(const AgreementMatrix& m, const std::vector<EquivalenceClass>& programClasses,
                               const std::vector<Rational>& witnessMass, const std::string& strategy = "ransac") {
  if (m.rows.empty() || m.cols.empty()) return ConsensusDecision::abstain(strategy, "no agreeing witness");
  std::vector<Rational> rowMass;
  for (const auto& id : m.rows) {
    auto it = std::find_if(programClasses.begin(), programClasses.end(), [&](const auto& c) { return c.id == id; });
    if (it == programClasses.end()) throw ContractViolation("ransac: unknown program class '" + id + "'");
    rowMass.push_back(it->mass);
  }
  auto b = max_biclique(m, rowMass, witnessMass);
  if (!b) return ConsensusDecision::abstain(strategy, "no agreeing witness");
  const auto& id = m.rows[b->programs.front()];
  const auto& cls = *std::find_if(programClasses.begin(), programClasses.end(), [&](const auto& c) { return c.id == id; });
  return ConsensusDecision::select(strategy, cls, b->score(),
                                   std::to_string(b->programs.size()) + " program classes x " +
                                       std::to_string(b->witnesses.size()) + " witness classes");
}

}  // namespace tri
