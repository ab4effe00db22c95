#pragma once

// Synthetic stochastic-parrot models and the confidence quantities compared
// between plurality and triangulation.
//
// Problems that a model cannot tell apart form a hallucination class and
// share one distribution pi over program classes 0..n-1. tau permutes the
// problems of a class without fixed points; sigma is the induced permutation
// of program classes: the j-th correct class of d goes to the j-th correct
// class of tau(d), and the incorrect classes are deranged among themselves.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tri/error.hpp"

namespace tri::theory {

using Q = boost::multiprecision::cpp_rational;
using Index = std::size_t;
using Perm = std::vector<Index>;

inline double to_double(const Q& q) { return q.convert_to<double>(); }

inline bool is_permutation(const Perm& s) {
  std::vector<bool> seen(s.size(), false);
  for (auto x : s) {
    if (x >= s.size() || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

inline bool fixed_point_free(const Perm& s) {
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] == i) return false;
  }
  return true;
}

inline Perm identity_perm(Index n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), Index{0});
  return p;
}

namespace detail {
inline void check(const std::vector<Q>& pi, const Perm& sigma) {
  if (pi.empty()) throw ContractViolation("empty distribution");
  if (sigma.size() != pi.size() || !is_permutation(sigma)) throw ContractViolation("sigma is not a permutation of the class indices");
}
inline void check_indices(const std::vector<Q>& pi, const std::vector<Index>& idx) {
  for (auto i : idx) {
    if (i >= pi.size()) throw ContractViolation("class index out of range");
  }
}
}  // namespace detail

/// sum_{c in C} pi_c^2 / sum_i pi_i^2
inline Q plurality_confidence(const std::vector<Q>& pi, const std::vector<Index>& correct) {
  detail::check_indices(pi, correct);
  Q num = 0, den = 0;
  for (const auto& x : pi) den += x * x;
  for (auto c : correct) num += pi[c] * pi[c];
  if (den == 0) throw ContractViolation("distribution has zero mass");
  return num / den;
}

/// sum_{c in C} pi_c pi_sigma(c) / sum_i pi_i pi_sigma(i)
inline Q triangulation_confidence(const std::vector<Q>& pi, const Perm& sigma, const std::vector<Index>& correct) {
  detail::check(pi, sigma);
  detail::check_indices(pi, correct);
  Q num = 0, den = 0;
  for (Index i = 0; i < pi.size(); ++i) den += pi[i] * pi[sigma[i]];
  for (auto c : correct) num += pi[c] * pi[sigma[c]];
  if (den == 0) throw ContractViolation("no mass is matched under sigma");
  return num / den;
}

struct Rearrangement {
  Q lhs;  // sum pi_i^2
  Q rhs;  // sum pi_i pi_sigma(i)
  bool strict;
};

/// strict records the sufficient condition for lhs > rhs: all entries
/// distinct and sigma without fixed points.
inline Rearrangement rearrangement_check(const std::vector<Q>& pi, const Perm& sigma) {
  detail::check(pi, sigma);
  Rearrangement r{0, 0, false};
  for (Index i = 0; i < pi.size(); ++i) {
    r.lhs += pi[i] * pi[i];
    r.rhs += pi[i] * pi[sigma[i]];
  }
  std::set<Q> distinct(pi.begin(), pi.end());
  r.strict = distinct.size() == pi.size() && fixed_point_free(sigma);
  return r;
}

/// sum_C (pi_c - pi_sigma(c))^2 / |pi|_C^2  <  sum_B (pi_b - pi_sigma(b))^2 / |pi|_B^2
inline bool dissociative_check(const std::vector<Q>& pi, const Perm& sigma, const std::vector<Index>& C,
                               const std::vector<Index>& B) {
  detail::check(pi, sigma);
  detail::check_indices(pi, C);
  detail::check_indices(pi, B);
  if (C.empty() || B.empty()) throw ContractViolation("dissociative_check needs non-empty C and B");
  std::vector<int> owner(pi.size(), 0);
  for (auto c : C) owner[c] |= 1;
  for (auto b : B) owner[b] |= 2;
  if (std::any_of(owner.begin(), owner.end(), [](int o) { return o != 1 && o != 2; })) {
    throw ContractViolation("C and B must partition the class indices");
  }
  auto side = [&](const std::vector<Index>& S) -> Q {
    Q diff = 0, norm = 0;
    for (auto s : S) {
      Q d = pi[s] - pi[sigma[s]];
      diff += d * d;
      norm += pi[s] * pi[s];
    }
    return diff / norm;
  };
  return side(C) < side(B);
}

// ---------------------------------------------------------------------------

struct HallucinationClass {
  std::vector<std::string> problems;
  std::vector<Q> pi;                       // over program classes
  std::vector<std::vector<Index>> correct;  // per problem
  Perm tau;                                 // over problems
  Perm sigma;                               // over program classes

  std::vector<Index> correct_union() const {
    std::vector<Index> out;
    for (const auto& c : correct) out.insert(out.end(), c.begin(), c.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<Index> incorrect() const {
    auto C = correct_union();
    std::vector<Index> out;
    for (Index i = 0; i < pi.size(); ++i) {
      if (!std::binary_search(C.begin(), C.end(), i)) out.push_back(i);
    }
    return out;
  }
};

struct ParrotModel {
  std::vector<HallucinationClass> classes;

  std::size_t problem_count() const {
    std::size_t n = 0;
    for (const auto& h : classes) n += h.problems.size();
    return n;
  }

  /// Throws ContractViolation naming the first violated invariant.
  void validate() const {
    if (classes.empty()) throw ContractViolation("model has no hallucination classes");
    for (const auto& h : classes) {
      const auto m = h.problems.size();
      if (m < 2) throw ContractViolation("a hallucination class needs at least two problems");
      if (h.correct.size() != m || h.tau.size() != m) throw ContractViolation("per-problem data has the wrong size");
      Q sum = 0;
      for (const auto& x : h.pi) {
        if (x <= 0) throw ContractViolation("class probabilities must be positive");
        sum += x;
      }
      if (sum != 1) throw ContractViolation("class probabilities must sum to one");
      if (!is_permutation(h.tau) || !fixed_point_free(h.tau)) throw ContractViolation("tau must be a derangement");
      if (h.sigma.size() != h.pi.size() || !is_permutation(h.sigma) || !fixed_point_free(h.sigma)) {
        throw ContractViolation("sigma must be a derangement");
      }
      auto C = h.correct_union();
      if (std::adjacent_find(C.begin(), C.end()) != C.end()) {
        throw ContractViolation("problems of a class must have distinct correct classes");
      }
      for (Index d = 0; d < m; ++d) {
        const auto& from = h.correct[d];
        const auto& to = h.correct[h.tau[d]];
        if (from.empty() || from.size() != to.size()) throw ContractViolation("correct sets must be non-empty and coupled");
        for (Index j = 0; j < from.size(); ++j) {
          if (h.sigma[from[j]] != to[j]) throw ContractViolation("sigma must map correct classes to correct classes");
        }
      }
      auto B = h.incorrect();
      if (B.size() < 2) throw ContractViolation("a class needs at least two incorrect program classes");
      std::set<Q> errs;
      for (auto b : B) errs.insert(h.pi[b]);
      if (errs.size() != B.size()) throw ContractViolation("error probabilities must be pairwise distinct");
    }
  }
};

/// Mean over problems of (triangulation - plurality confidence).
inline Q expected_delta(const ParrotModel& model) {
  Q total = 0;
  std::size_t count = 0;
  for (const auto& h : model.classes) {
    for (const auto& S : h.correct) {
      total += triangulation_confidence(h.pi, h.sigma, S) - plurality_confidence(h.pi, S);
      ++count;
    }
  }
  if (count == 0) throw ContractViolation("model has no problems");
  return total / Q(count);
}

/// The per-class expectation in closed form:
///   (sum_C pi_c pi_s(c) * sum pi^2 - sum_C pi_c^2 * sum pi pi_s) / (|class| * sum pi^2 * sum pi pi_s)
inline Q class_delta_closed_form(const HallucinationClass& h) {
  Q sq = 0, cross = 0, cSq = 0, cCross = 0;
  for (Index i = 0; i < h.pi.size(); ++i) {
    sq += h.pi[i] * h.pi[i];
    cross += h.pi[i] * h.pi[h.sigma[i]];
  }
  for (auto c : h.correct_union()) {
    cSq += h.pi[c] * h.pi[c];
    cCross += h.pi[c] * h.pi[h.sigma[c]];
  }
  return (cCross * sq - cSq * cross) / (Q(h.problems.size()) * sq * cross);
}

/// Uniform expectation over all problems assembled from the per-class forms.
inline Q expected_delta_closed_form(const ParrotModel& model) {
  Q total = 0;
  for (const auto& h : model.classes) total += Q(h.problems.size()) * class_delta_closed_form(h);
  return total / Q(model.problem_count());
}

inline bool dissociative(const HallucinationClass& h) {
  return dissociative_check(h.pi, h.sigma, h.correct_union(), h.incorrect());
}

// ---------------------------------------------------------------------------

struct ModelSpec {
  std::size_t numHallucinationClasses = 2;
  std::size_t problemsPerClass = 3;
  std::size_t numProgramClasses = 8;
  std::size_t correctPerProblem = 1;
  bool equalCorrect = false;  // all correct classes of a class equally likely
  std::uint64_t maxWeight = 1000;

  void validate() const {
    if (numHallucinationClasses == 0) throw ContractViolation("need at least one hallucination class");
    if (problemsPerClass < 2) throw ContractViolation("problemsPerClass must be at least 2");
    if (correctPerProblem == 0) throw ContractViolation("correctPerProblem must be at least 1");
    if (numProgramClasses < problemsPerClass * correctPerProblem + 2) {
      throw ContractViolation("numProgramClasses must exceed the correct classes by at least 2");
    }
    if (maxWeight < numProgramClasses) throw ContractViolation("maxWeight too small for distinct error weights");
  }
};

namespace detail {
template <typename Rng>
Perm random_derangement(Index n, Rng& rng) {
  Perm p = identity_perm(n);
  do {
    std::shuffle(p.begin(), p.end(), rng);
  } while (!fixed_point_free(p));
  return p;
}
}  // namespace detail

/// A model satisfying every ParrotModel invariant; deterministic per seed.
/// Probabilities are integer weights normalised exactly; duplicate error
/// weights are bumped until distinct.
inline ParrotModel random_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> weight(1, spec.maxWeight);
  ParrotModel model;
  const Index n = spec.numProgramClasses;
  const Index m = spec.problemsPerClass;
  const Index k = spec.correctPerProblem;
  for (std::size_t h = 0; h < spec.numHallucinationClasses; ++h) {
    HallucinationClass hc;
    for (Index d = 0; d < m; ++d) hc.problems.push_back("h" + std::to_string(h) + "-d" + std::to_string(d));

    Perm classes = identity_perm(n);
    std::shuffle(classes.begin(), classes.end(), rng);
    hc.correct.assign(m, {});
    for (Index d = 0; d < m; ++d) {
      for (Index j = 0; j < k; ++j) hc.correct[d].push_back(classes[d * k + j]);
    }
    auto C = hc.correct_union();
    std::vector<Index> B;
    for (Index i = 0; i < n; ++i) {
      if (!std::binary_search(C.begin(), C.end(), i)) B.push_back(i);
    }

    std::vector<std::uint64_t> w(n);
    const std::uint64_t correctWeight = weight(rng);
    for (auto c : C) w[c] = spec.equalCorrect ? correctWeight : weight(rng);
    std::set<std::uint64_t> used;
    for (auto b : B) {
      std::uint64_t x = weight(rng);
      while (used.count(x)) x = x % spec.maxWeight + 1;
      used.insert(x);
      w[b] = x;
    }
    const std::uint64_t total = std::accumulate(w.begin(), w.end(), std::uint64_t{0});
    for (auto x : w) hc.pi.emplace_back(Q(x) / Q(total));

    hc.tau = detail::random_derangement(m, rng);
    hc.sigma.assign(n, 0);
    for (Index d = 0; d < m; ++d) {
      for (Index j = 0; j < k; ++j) hc.sigma[hc.correct[d][j]] = hc.correct[hc.tau[d]][j];
    }
    auto der = detail::random_derangement(B.size(), rng);
    for (Index b = 0; b < B.size(); ++b) hc.sigma[B[b]] = B[der[b]];

    model.classes.push_back(std::move(hc));
  }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------

struct MonteCarloEstimate {
  double delta = 0;
  double stderr_ = 0;
  bool widened = false;  // some problem saw no conditioning event
};

/// Samples p, q ~ pi(d) and q' ~ pi(tau(d)) (the same pi, by construction of
/// a hallucination class), estimating P(correct | p = q) and
/// P(correct | q' = sigma(p)) per problem; reports the mean difference.
inline MonteCarloEstimate monte_carlo_delta(const ParrotModel& model, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ContractViolation("monte_carlo_delta needs at least one trial");
  std::mt19937_64 rng(seed);
  MonteCarloEstimate out;
  double var = 0;
  std::size_t problems = 0;
  for (const auto& h : model.classes) {
    std::vector<double> cdf;
    double acc = 0;
    for (const auto& x : h.pi) cdf.push_back(acc += to_double(x));
    std::uniform_real_distribution<double> u(0.0, acc);
    auto draw = [&] {
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
      return static_cast<Index>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    };
    for (const auto& S : h.correct) {
      std::vector<bool> good(h.pi.size(), false);
      for (auto c : S) good[c] = true;
      std::size_t plurN = 0, plurOk = 0, triN = 0, triOk = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        const Index p = draw();
        const Index q = draw();
        const Index q2 = draw();
        if (p == q) {
          ++plurN;
          plurOk += good[p];
        }
        if (q2 == h.sigma[p]) {
          ++triN;
          triOk += good[p];
        }
      }
      ++problems;
      if (plurN == 0 || triN == 0) {
        out.widened = true;
        var += 0.5;  // a conditional probability in [0,1] has variance at most 1/4 per side
        continue;
      }
      const double pp = static_cast<double>(plurOk) / static_cast<double>(plurN);
      const double pt = static_cast<double>(triOk) / static_cast<double>(triN);
      out.delta += pt - pp;
      var += pp * (1 - pp) / static_cast<double>(plurN) + pt * (1 - pt) / static_cast<double>(triN);
    }
  }
  out.delta /= static_cast<double>(problems);
  out.stderr_ = std::sqrt(var) / static_cast<double>(problems);
  return out;
}

}  // namespace tri::theory
