#pragma once

// Ground-truth judging, the abstention confusion matrix and its metrics,
// correctness under agreement, and semantic entropy.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tri/consensus.hpp"
#include "tri/error.hpp"
#include "tri/problem.hpp"
#include "tri/value.hpp"

namespace tri {

/// Accepted outputs per input, keyed by args_key.
struct Judge {
  std::string problemId;
  std::unordered_map<std::string, std::vector<Value>> accepted;

  void accept(std::span<const Value> args, Value out) { accepted[args_key(args)].push_back(std::move(out)); }
};

enum class Verdict { Correct, Incorrect };

inline Verdict judge_outputs(const Judge& judge, const TestInputSet& inputs, const std::vector<Value>& behavior) {
  if (behavior.size() != inputs.size()) throw ContractViolation("behaviour is not aligned with the test inputs");
  bool ok = true;
  for (std::size_t n = 0; n < behavior.size(); ++n) {
    auto it = judge.accepted.find(args_key(inputs.inputs()[n]));
    if (it == judge.accepted.end()) {
      throw FixtureIncomplete("judge for '" + judge.problemId + "' has no entry for " +
                              to_display(Value::tuple(inputs.inputs()[n])));
    }
    const Value& out = behavior[n];
    if (out.contains_special_or_subset() || out.is_special() || !contains_value(it->second, out)) ok = false;
  }
  return ok ? Verdict::Correct : Verdict::Incorrect;
}

inline Verdict judge_class(const Judge& judge, const EquivalenceClass& cls, const TestInputSet& inputs) {
  return judge_outputs(judge, inputs, cls.behavior);
}

// ---------------------------------------------------------------------------

struct AbstentionCounts {
  std::size_t n1 = 0;  // solvable, correct selection
  std::size_t n2 = 0;  // solvable, incorrect selection
  std::size_t n3 = 0;  // solvable, abstained
  std::size_t n4 = 0;  // unsolvable, selected
  std::size_t n5 = 0;  // unsolvable, abstained

  std::size_t total() const { return n1 + n2 + n3 + n4 + n5; }
  friend bool operator==(const AbstentionCounts&, const AbstentionCounts&) = default;
};

struct ProblemOutcome {
  bool solvable = false;         // at least one sample is correct
  bool selected = false;
  bool selectedCorrect = false;  // meaningful when selected
};

inline AbstentionCounts confusion(const std::vector<ProblemOutcome>& outcomes) {
  AbstentionCounts c;
  for (const auto& o : outcomes) {
    if (o.solvable) {
      if (!o.selected) ++c.n3;
      else if (o.selectedCorrect) ++c.n1;
      else ++c.n2;
    } else {
      if (o.selected) ++c.n4;
      else ++c.n5;
    }
  }
  return c;
}

/// Each metric is nullopt when its denominator is zero.
struct MetricsReport {
  std::optional<Rational> reliableAccuracy;
  std::optional<Rational> overallAccuracy;
  std::optional<Rational> abstentionRate;
  std::optional<Rational> precisionAbs;
  std::optional<Rational> recallAbs;
  std::optional<Rational> f1Abs;
};

namespace detail {
inline std::optional<Rational> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return Rational(static_cast<long long>(num), static_cast<long long>(den));
}
}  // namespace detail

inline MetricsReport metrics(const AbstentionCounts& c) {
  MetricsReport m;
  m.reliableAccuracy = detail::ratio(c.n1, c.n1 + c.n2 + c.n4);
  m.overallAccuracy = detail::ratio(c.n1 + c.n5, c.total());
  m.abstentionRate = detail::ratio(c.n3 + c.n5, c.total());
  m.precisionAbs = detail::ratio(c.n5, c.n3 + c.n5);
  m.recallAbs = detail::ratio(c.n5, c.n2 + c.n4 + c.n5);
  if (m.precisionAbs && m.recallAbs && *m.precisionAbs + *m.recallAbs != Rational(0)) {
    m.f1Abs = Rational(2) * *m.precisionAbs * *m.recallAbs / (*m.precisionAbs + *m.recallAbs);
  }
  return m;
}

inline double to_double(Rational r) { return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator()); }

// ---------------------------------------------------------------------------

struct AgreementPair {
  Rational programMass;
  Rational witnessMass;
  bool agrees = false;
  bool programCorrect = false;
};

struct CorrectnessUnderAgreement {
  std::optional<Rational> conditional;  // nullopt without agreeing pairs
  Rational unconditional{0};
};

/// P(correct | agree) with pairs weighted by the product of their masses,
/// next to the unconditional correct mass over the same pairs.
inline CorrectnessUnderAgreement correctness_under_agreement(const std::vector<AgreementPair>& pairs) {
  Rational agree{0}, agreeCorrect{0}, all{0}, allCorrect{0};
  for (const auto& p : pairs) {
    const Rational w = p.programMass * p.witnessMass;
    all += w;
    if (p.programCorrect) allCorrect += w;
    if (p.agrees) {
      agree += w;
      if (p.programCorrect) agreeCorrect += w;
    }
  }
  CorrectnessUnderAgreement out;
  if (agree != Rational(0)) out.conditional = agreeCorrect / agree;
  if (all != Rational(0)) out.unconditional = allCorrect / all;
  return out;
}

// ---------------------------------------------------------------------------

/// -sum m ln m, with 0 ln 0 = 0. Masses must sum to one.
inline double semantic_entropy(const std::vector<Rational>& masses) {
  Rational sum{0};
  for (const auto& m : masses) {
    if (m < 0) throw ContractViolation("semantic_entropy: negative mass");
    sum += m;
  }
  if (sum != Rational(1)) throw ContractViolation("semantic_entropy: masses do not sum to one");
  double h = 0;
  for (const auto& m : masses) {
    if (m == Rational(0)) continue;
    const double x = to_double(m);
    h -= x * std::log(x);
  }
  return h;
}

inline double semantic_entropy(const std::vector<EquivalenceClass>& classes) {
  std::vector<Rational> ms;
  for (const auto& c : classes) ms.push_back(c.mass);
  return semantic_entropy(ms);
}

/// Entropy of the first k samples for each requested k, where samples are
/// identified by their behaviour fingerprint.
inline std::vector<std::pair<std::size_t, double>> entropy_by_prefix(const std::vector<std::string>& fingerprints,
                                                                      const std::vector<std::size_t>& sizes) {
  std::vector<std::pair<std::size_t, double>> out;
  for (auto k : sizes) {
    if (k == 0 || k > fingerprints.size()) {
      throw ContractViolation("entropy prefix " + std::to_string(k) + " exceeds the " +
                              std::to_string(fingerprints.size()) + " recorded samples");
    }
    std::map<std::string, long long> counts;
    for (std::size_t n = 0; n < k; ++n) ++counts[fingerprints[n]];
    std::vector<Rational> ms;
    for (const auto& [fp, c] : counts) ms.emplace_back(c, static_cast<long long>(k));
    out.emplace_back(k, semantic_entropy(ms));
  }
  return out;
}

}  // namespace tri
