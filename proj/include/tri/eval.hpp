#pragma once

// Evaluation of hyperproperty terms with special values.
//
//   call      any special argument -> the strongest of them, no execution
//   =         D dominates; U = U is true; A with anything but D is A;
//             U with a normal value is U
//   in        U in U is true; otherwise any special operand -> strongest;
//             a subset container answers true on a hit and A on a miss
//   or/and/not/=>
//             D dominates; A with anything but D is A; U with anything
//             outside {A, D} is U; both operands are always evaluated
//   tolerate  U -> A, identity otherwise
//   forall    true iff every branch is true or A and fewer than
//             T = ceil(f * |domain|) branches are A; a special domain s
//             gives (s == A)
//
// Normal values of the wrong shape (a non-boolean under a connective, a
// non-collection on the right of `in`) are blamed on the candidate that
// produced them and become D.

#include <boost/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/error.hpp"
#include "tri/exec.hpp"
#include "tri/term.hpp"
#include "tri/value.hpp"

namespace tri {

using Rational = boost::rational<long long>;

struct EvalConfig {
  Rational angelicFraction{1, 3};
  ExecutionConfig execution;

  void validate() const {
    if (angelicFraction <= 0 || angelicFraction > 1) throw ContractViolation("angelicFraction must lie in (0, 1]");
    execution.validate();
  }
};

/// Raised when a quantifier domain is a normal value that is not a collection.
class DomainTypeError : public EvalError {
 public:
  using EvalError::EvalError;
};

using Env = std::map<std::string, Value>;

struct ForAllCounts {
  std::size_t trueCount = 0;
  std::size_t angelicCount = 0;
  std::size_t falseCount = 0;  // Bool(false), Undefined and non-boolean branches
  std::size_t demonicCount = 0;
  std::size_t domainSize = 0;

  friend bool operator==(const ForAllCounts&, const ForAllCounts&) = default;
};

/// T = ceil(f * n); an empty domain holds vacuously.
inline std::size_t angelic_threshold(Rational f, std::size_t n) {
  if (n == 0) return 1;
  const long long num = f.numerator() * static_cast<long long>(n);
  return static_cast<std::size_t>((num + f.denominator() - 1) / f.denominator());
}

/// The FORALL verdict as a function of branch counts.
inline bool forall_holds(const ForAllCounts& c, Rational f, bool subsetDomain, bool partialDomainOk) {
  if (subsetDomain && !partialDomainOk) return false;
  if (c.falseCount != 0 || c.demonicCount != 0) return false;
  return c.angelicCount < angelic_threshold(f, c.domainSize);
}

struct FailingBranch {
  Value binding;
  Value result;
  std::string detail;  // first failure of a nested quantifier, if any
};

struct ForAllReport {
  std::string label;
  std::string binder;
  ForAllCounts counts;
  std::size_t threshold = 0;
  bool subsetDomain = false;
  std::optional<SpecialKind> specialDomain;
  bool holds = false;
  std::optional<FailingBranch> firstFailure;
};

inline std::string describe(const ForAllReport& r) {
  std::string s = (r.label.empty() ? "forall " + r.binder : r.label) + ": ";
  if (r.specialDomain) return s + "domain is " + std::string(to_string(*r.specialDomain));
  s += std::to_string(r.counts.trueCount) + " true, " + std::to_string(r.counts.angelicCount) + " angelic, " +
       std::to_string(r.counts.falseCount) + " false, " + std::to_string(r.counts.demonicCount) + " demonic of " +
       std::to_string(r.counts.domainSize) + " (T=" + std::to_string(r.threshold) + ")";
  if (r.subsetDomain) s += ", subset domain";
  if (r.firstFailure) {
    s += "; fails at " + r.binder + "=" + to_display(r.firstFailure->binding) + " -> " +
         to_display(r.firstFailure->result);
    if (!r.firstFailure->detail.empty()) s += " [" + r.firstFailure->detail + "]";
  }
  return s;
}

struct EvalResult {
  Value value;
  std::vector<ForAllReport> trace;  // outermost quantifiers, in evaluation order
};

// ---------------------------------------------------------------------------

namespace sem {

inline Value strongest_of(const Value& a, const Value& b) {
  std::vector<SpecialKind> ks;
  if (a.is_special()) ks.push_back(a.special_kind());
  if (b.is_special()) ks.push_back(b.special_kind());
  return Value::special(strongest(ks));
}

/// nullopt when a subset marker makes the comparison undecidable.
inline std::optional<bool> try_equal(const Value& a, const Value& b) {
  if (a.contains_special_or_subset() || b.contains_special_or_subset()) return std::nullopt;
  return values_equal(a, b);
}

inline Value tolerate(const Value& v) { return v.is_special(SpecialKind::Undefined) ? Value::angelic() : v; }

inline Value eq(const Value& a, const Value& b) {
  using K = SpecialKind;
  if (a.is_special(K::Demonic) || b.is_special(K::Demonic)) return Value::demonic();
  if (a.is_special(K::Undefined) && b.is_special(K::Undefined)) return Value::boolean(true);
  if (a.is_special(K::Angelic) || b.is_special(K::Angelic)) return Value::angelic();
  if (a.is_special(K::Undefined) || b.is_special(K::Undefined)) return Value::undefined();
  auto r = try_equal(a, b);
  return r ? Value::boolean(*r) : Value::angelic();
}

inline Value in(const Value& e, const Value& s) {
  using K = SpecialKind;
  if (e.is_special(K::Undefined) && s.is_special(K::Undefined)) return Value::boolean(true);
  if (e.is_special() || s.is_special()) return strongest_of(e, s);
  const std::vector<Value>* elems = nullptr;
  bool subset = false;
  if (s.is_set()) {
    elems = &s.as_set().elements;
    subset = s.as_set().kind == SetKind::Subset;
  } else if (s.is_seq()) {
    elems = &s.as_seq();
  } else {
    return Value::demonic();
  }
  bool undecided = false;
  for (const auto& x : *elems) {
    auto r = try_equal(e, x);
    if (!r) undecided = true;
    else if (*r) return Value::boolean(true);
  }
  return (subset || undecided) ? Value::angelic() : Value::boolean(false);
}

/// Shared special-value rules of the connectives; nullopt when both are normal.
inline std::optional<Value> connective_specials(const Value& a, const Value& b) {
  using K = SpecialKind;
  if (a.is_special(K::Demonic) || b.is_special(K::Demonic)) return Value::demonic();
  if (a.is_special(K::Angelic) || b.is_special(K::Angelic)) return Value::angelic();
  if (a.is_special(K::Undefined) || b.is_special(K::Undefined)) return Value::undefined();
  return std::nullopt;
}

inline Value or_(const Value& a, const Value& b) {
  if (auto s = connective_specials(a, b)) return *s;
  if (!a.is_bool() || !b.is_bool()) return Value::demonic();
  return Value::boolean(a.as_bool() || b.as_bool());
}

inline Value and_(const Value& a, const Value& b) {
  if (auto s = connective_specials(a, b)) return *s;
  if (!a.is_bool() || !b.is_bool()) return Value::demonic();
  return Value::boolean(a.as_bool() && b.as_bool());
}

inline Value not_(const Value& a) {
  if (a.is_special()) return a;
  if (!a.is_bool()) return Value::demonic();
  return Value::boolean(!a.as_bool());
}

inline Value implies(const Value& a, const Value& b) { return or_(not_(a), b); }

}  // namespace sem

// ---------------------------------------------------------------------------

class Evaluator {
 public:
  Evaluator(const CandidateTable& candidates, Executor& executor, EvalConfig cfg = {})
      : candidates_(candidates), exec_(executor), cfg_(cfg) {
    cfg_.validate();
  }

  const EvalConfig& config() const { return cfg_; }

  EvalResult eval(const Term& t, const Env& env = {}) {
    trace_.clear();
    depth_ = 0;
    Env scope = env;
    Value v = eval_rec(t, scope);
    return {std::move(v), std::move(trace_)};
  }

  /// Evaluates a ForAll term and reports its branch counts.
  ForAllReport eval_forall(const Term& t, const Env& env = {}) {
    const auto* f = std::get_if<term::ForAll>(&t->node);
    if (!f) throw ContractViolation("eval_forall: term is not a forall");
    depth_ = 1;  // keep nested quantifiers out of the trace
    Env scope = env;
    auto r = forall(*f, scope);
    depth_ = 0;
    return r;
  }

 private:
  Value eval_rec(const Term& t, Env& env) {
    using namespace term;
    return std::visit(
        [&](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Const>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, Var>) {
            auto it = env.find(n.name);
            if (it == env.end()) throw EvalError("unbound variable '" + n.name + "'");
            return it->second;
          } else if constexpr (std::is_same_v<T, Call>) {
            std::vector<Value> args;
            args.reserve(n.args.size());
            for (const auto& a : n.args) args.push_back(eval_rec(a, env));
            return run(n.candidate, std::move(args));
          } else if constexpr (std::is_same_v<T, MapCall>) {
            Value seq = eval_rec(n.sequence, env);
            if (seq.is_special()) return seq;
            if (!seq.is_seq()) return Value::demonic();
            std::vector<Value> out;
            std::vector<SpecialKind> specials;
            for (const auto& x : seq.as_seq()) {
              out.push_back(run(n.candidate, {x}));
              if (out.back().is_special()) specials.push_back(out.back().special_kind());
            }
            if (!specials.empty()) return Value::special(strongest(specials));
            return Value::seq(std::move(out));
          } else if constexpr (std::is_same_v<T, Tolerate>) {
            return sem::tolerate(eval_rec(n.inner, env));
          } else if constexpr (std::is_same_v<T, Eq>) {
            Value a = eval_rec(n.lhs, env);
            return sem::eq(a, eval_rec(n.rhs, env));
          } else if constexpr (std::is_same_v<T, In>) {
            Value e = eval_rec(n.element, env);
            return sem::in(e, eval_rec(n.set, env));
          } else if constexpr (std::is_same_v<T, Or>) {
            Value a = eval_rec(n.lhs, env);
            return sem::or_(a, eval_rec(n.rhs, env));
          } else if constexpr (std::is_same_v<T, And>) {
            Value a = eval_rec(n.lhs, env);
            return sem::and_(a, eval_rec(n.rhs, env));
          } else if constexpr (std::is_same_v<T, Not>) {
            return sem::not_(eval_rec(n.inner, env));
          } else if constexpr (std::is_same_v<T, Implies>) {
            Value a = eval_rec(n.lhs, env);
            return sem::implies(a, eval_rec(n.rhs, env));
          } else if constexpr (std::is_same_v<T, Nth>) {
            Value v = eval_rec(n.tuple, env);
            if (v.is_special()) return v;
            const std::vector<Value>* items = v.is_tuple() ? &v.as_tuple() : v.is_seq() ? &v.as_seq() : nullptr;
            if (!items || n.index >= items->size()) return Value::demonic();
            return (*items)[n.index];
          } else {
            const bool outermost = depth_ == 0;
            auto report = forall(n, env);
            Value v = Value::boolean(report.holds);
            if (outermost) trace_.push_back(std::move(report));
            return v;
          }
        },
        t->node);
  }

  Value run(const std::string& id, std::vector<Value> args) {
    std::vector<SpecialKind> specials;
    bool marked = false;
    for (const auto& a : args) {
      if (a.is_special()) specials.push_back(a.special_kind());
      else if (a.contains_special_or_subset()) marked = true;
    }
    if (!specials.empty()) return Value::special(strongest(specials));
    // A marked subset cannot be passed on faithfully; the gap is tolerated.
    if (marked) return Value::angelic();
    return exec_.execute(candidates_.get(id), args).value;
  }

  ForAllReport forall(const term::ForAll& f, Env& env) {
    ForAllReport r;
    r.label = f.label;
    r.binder = f.binder;

    std::vector<Value> domain;
    if (f.explicitDomain) {
      domain = *f.explicitDomain;
    } else {
      ++depth_;
      Value d = eval_rec(f.domain, env);
      --depth_;
      if (d.is_special()) {
        r.specialDomain = d.special_kind();
        r.holds = d.is_special(SpecialKind::Angelic);
        lastFailure_ = r.holds ? std::string() : describe(r);
        return r;
      }
      if (d.is_set()) {
        domain = d.as_set().elements;
        r.subsetDomain = d.as_set().kind == SetKind::Subset;
      } else if (d.is_seq()) {
        domain = d.as_seq();
      } else {
        throw DomainTypeError("forall domain is not a collection: " + to_display(d));
      }
    }

    r.counts.domainSize = domain.size();
    r.threshold = angelic_threshold(cfg_.angelicFraction, domain.size());

    std::optional<Value> shadowed;
    if (auto it = env.find(f.binder); it != env.end()) shadowed = it->second;

    ++depth_;
    for (const auto& x : domain) {
      env.insert_or_assign(f.binder, x);
      lastFailure_.clear();
      Value b = eval_rec(f.body, env);
      bool failed = false;
      if (b.is_bool() && b.as_bool()) {
        ++r.counts.trueCount;
      } else if (b.is_special(SpecialKind::Angelic)) {
        ++r.counts.angelicCount;
      } else if (b.is_special(SpecialKind::Demonic)) {
        ++r.counts.demonicCount;
        failed = true;
      } else {
        ++r.counts.falseCount;
        failed = true;
      }
      if (failed && !r.firstFailure) r.firstFailure = FailingBranch{x, b, lastFailure_};
    }
    --depth_;

    if (shadowed) env.insert_or_assign(f.binder, *shadowed);
    else env.erase(f.binder);

    r.holds = forall_holds(r.counts, cfg_.angelicFraction, r.subsetDomain, f.partialDomainOk);
    lastFailure_ = r.holds ? std::string() : describe(r);
    return r;
  }

  const CandidateTable& candidates_;
  Executor& exec_;
  EvalConfig cfg_;
  std::vector<ForAllReport> trace_;
  std::size_t depth_ = 0;
  std::string lastFailure_;
};

/// Convenience entry point with a private executor.
inline EvalResult eval(const Term& t, const Env& env, const CandidateTable& candidates, const EvalConfig& cfg = {}) {
  Executor exec(cfg.execution);
  Evaluator ev(candidates, exec, cfg);
  return ev.eval(t, env);
}

inline ForAllCounts eval_forall_counts(const Term& t, const Env& env, const CandidateTable& candidates,
                                       const EvalConfig& cfg = {}) {
  Executor exec(cfg.execution);
  Evaluator ev(candidates, exec, cfg);
  return ev.eval_forall(t, env).counts;
}

}  // namespace tri
