#pragma once

// Triangulation schemes: the property linking a program to a witness
// sampled for a transformed problem, and the enumerator cascade.
//
// Input tuples are bound as Tuple(args); `whole(i)` is the single argument
// for unary problems and the tuple itself otherwise. Quantifiers over the
// output space range over outputs observed on the test inputs.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/error.hpp"
#include "tri/eval.hpp"
#include "tri/exec.hpp"
#include "tri/problem.hpp"
#include "tri/term.hpp"
#include "tri/types.hpp"
#include "tri/value.hpp"

namespace tri {

struct TriangulationScheme;

namespace scheme {
struct FullFwdInv {};
struct PartialFwdInv {
  std::size_t argIndex;
};
struct FullFwdSinv {};
struct PartialFwdSinv {
  std::size_t argIndex;
};
struct FullEnumSinv {};
struct PartialEnumSinv {
  std::size_t argIndex;
};
struct FwdEnum {};
struct Stream {
  std::shared_ptr<const TriangulationScheme> inner;
};
}  // namespace scheme

struct TriangulationScheme {
  std::variant<scheme::FullFwdInv, scheme::PartialFwdInv, scheme::FullFwdSinv, scheme::PartialFwdSinv,
               scheme::FullEnumSinv, scheme::PartialEnumSinv, scheme::FwdEnum, scheme::Stream>
      v;

  static TriangulationScheme full_fwd_inv() { return {scheme::FullFwdInv{}}; }
  static TriangulationScheme partial_fwd_inv(std::size_t j) { return {scheme::PartialFwdInv{j}}; }
  static TriangulationScheme full_fwd_sinv() { return {scheme::FullFwdSinv{}}; }
  static TriangulationScheme partial_fwd_sinv(std::size_t j) { return {scheme::PartialFwdSinv{j}}; }
  static TriangulationScheme full_enum_sinv() { return {scheme::FullEnumSinv{}}; }
  static TriangulationScheme partial_enum_sinv(std::size_t j) { return {scheme::PartialEnumSinv{j}}; }
  static TriangulationScheme fwd_enum() { return {scheme::FwdEnum{}}; }
  static TriangulationScheme stream(TriangulationScheme inner) {
    if (inner.is_stream()) throw ContractViolation("stream scheme cannot wrap another stream scheme");
    return {scheme::Stream{std::make_shared<const TriangulationScheme>(std::move(inner))}};
  }

  bool is_stream() const { return std::holds_alternative<scheme::Stream>(v); }
  const TriangulationScheme& inner() const { return *std::get<scheme::Stream>(v).inner; }

  /// Argument index for partial variants.
  std::optional<std::size_t> arg_index() const {
    return std::visit(
        [](const auto& s) -> std::optional<std::size_t> {
          if constexpr (requires { s.argIndex; }) return s.argIndex;
          else return std::nullopt;
        },
        v);
  }
};

inline std::string scheme_name(const TriangulationScheme& s) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, scheme::FullFwdInv>) return "full-fwd-inv";
        else if constexpr (std::is_same_v<T, scheme::PartialFwdInv>) return "partial-fwd-inv(" + std::to_string(x.argIndex) + ")";
        else if constexpr (std::is_same_v<T, scheme::FullFwdSinv>) return "full-fwd-sinv";
        else if constexpr (std::is_same_v<T, scheme::PartialFwdSinv>) return "partial-fwd-sinv(" + std::to_string(x.argIndex) + ")";
        else if constexpr (std::is_same_v<T, scheme::FullEnumSinv>) return "full-enum-sinv";
        else if constexpr (std::is_same_v<T, scheme::PartialEnumSinv>) return "partial-enum-sinv(" + std::to_string(x.argIndex) + ")";
        else if constexpr (std::is_same_v<T, scheme::FwdEnum>) return "fwd-enum";
        else return "stream(" + scheme_name(*x.inner) + ")";
      },
      s.v);
}

// ---------------------------------------------------------------------------
// Derived candidates

inline std::string pointwise_id(const std::string& id) { return id + "@pointwise"; }

/// p° = args -> head(p([item])), where item is the single argument or the
/// tuple of all arguments.
inline CandidateProgram stream_lift(const CandidateProgram& p) {
  DerivedProgram prog{
      "head(" + p.id() + "([x]))",
      [p](const std::vector<Value>& args, const Invoke& invoke) -> Value {
        Value item = args.size() == 1 ? args[0] : Value::tuple(args);
        Value out = invoke(p, {Value::seq({std::move(item)})});
        if (out.is_special()) return out;
        if (!out.is_seq()) throw EvalError("stream program returned a non-sequence");
        if (out.as_seq().empty()) throw EvalError("stream program returned an empty sequence");
        return out.as_seq().front();
      }};
  return CandidateProgram::derived(pointwise_id(p.id()), p.problem_id(), std::move(prog));
}

/// Pointwise argument tuples of stream inputs; tuple elements are unpacked.
inline std::vector<std::vector<Value>> flatten_stream_inputs(const TestInputSet& inputs) {
  std::vector<std::vector<Value>> out;
  std::unordered_set<std::string> seen;
  for (const auto& args : inputs.inputs()) {
    if (args.size() != 1 || !args[0].is_seq()) throw ContractViolation("stream inputs must be single sequences");
    for (const auto& x : args[0].as_seq()) {
      std::vector<Value> a = x.is_tuple() ? x.as_tuple() : std::vector<Value>{x};
      if (seen.insert(args_key(a)).second) out.push_back(std::move(a));
    }
  }
  return out;
}

/// Dispatches on the constructor of the output-valued argument. The "none"
/// branch receives the remaining arguments without the payload.
inline CandidateProgram compose_union_inverse(std::string id, std::string problemId,
                                              std::map<std::string, CandidateProgram> branches, TypeTag outputType,
                                              std::size_t outputArgIndex = 0) {
  if (branches.empty()) throw ContractViolation("compose_union_inverse: no branches");
  std::string desc = "compose(";
  for (const auto& [tag, c] : branches) desc += tag + ":" + c.id() + " ";
  desc.back() = ')';
  DerivedProgram prog{
      std::move(desc),
      [branches = std::move(branches), outputType = std::move(outputType), outputArgIndex](
          const std::vector<Value>& args, const Invoke& invoke) -> Value {
        if (outputArgIndex >= args.size()) throw EvalError("missing output-valued argument");
        auto ctor = constructor_of(args[outputArgIndex], outputType);
        if (!ctor) throw EvalError("value matches no constructor of " + to_string(outputType));
        auto it = branches.find(ctor->first);
        if (it == branches.end()) throw EvalError("no branch for constructor '" + ctor->first + "'");
        std::vector<Value> fwd = args;
        if (ctor->first == "none") fwd.erase(fwd.begin() + static_cast<long>(outputArgIndex));
        return invoke(it->second, fwd);
      }};
  return CandidateProgram::derived(std::move(id), std::move(problemId), std::move(prog));
}

/// o -> o + delta on integer outputs, the off-by-one perturbation.
inline CandidateProgram output_offset(const CandidateProgram& p, long long delta) {
  DerivedProgram prog{p.id() + (delta >= 0 ? "+" : "") + std::to_string(delta),
                      [p, delta](const std::vector<Value>& args, const Invoke& invoke) -> Value {
                        Value out = invoke(p, args);
                        if (out.is_special()) return out;
                        if (!out.is_int()) throw EvalError("offset applied to a non-integer output");
                        return Value::integer(out.as_int() + delta);
                      }};
  return CandidateProgram::derived(p.id() + "@offset" + std::to_string(delta), p.problem_id(), std::move(prog));
}

// ---------------------------------------------------------------------------
// Property construction

namespace detail {

inline std::vector<Term> arg_terms(const Term& tuple, std::size_t k) {
  std::vector<Term> out;
  for (std::size_t m = 0; m < k; ++m) out.push_back(nth(tuple, m));
  return out;
}

inline Term whole(const Term& tuple, std::size_t k) { return k == 1 ? nth(tuple, 0) : tuple; }

/// Arguments of a k-ary call where position j comes from `xj` and the
/// others from `rest` (a tuple of the k-1 remaining arguments, in order).
inline std::vector<Term> with_arg(const Term& rest, std::size_t k, std::size_t j, const Term& xj) {
  std::vector<Term> out;
  std::size_t r = 0;
  for (std::size_t m = 0; m < k; ++m) out.push_back(m == j ? xj : nth(rest, r++));
  return out;
}

inline Value rest_of(const std::vector<Value>& args, std::size_t j) {
  std::vector<Value> r;
  for (std::size_t m = 0; m < args.size(); ++m) {
    if (m != j) r.push_back(args[m]);
  }
  return Value::tuple(std::move(r));
}

inline bool usable(const Value& v) { return !v.contains_special_or_subset() && !v.is_special(); }

inline std::vector<Value> input_domain(const TestInputSet& inputs) {
  std::vector<Value> out;
  for (const auto& a : inputs.inputs()) out.push_back(Value::tuple(a));
  return out;
}

/// Unordered pairs (o, o') of distinct observed outputs sharing a group.
inline std::vector<Value> output_pairs(const std::vector<std::pair<std::string, Value>>& grouped) {
  std::map<std::string, std::map<std::string, Value>> byGroup;
  for (const auto& [g, o] : grouped) {
    if (usable(o)) byGroup[g].emplace(canonical_encode(o), o);
  }
  std::vector<Value> out;
  for (const auto& [g, outs] : byGroup) {
    for (auto a = outs.begin(); a != outs.end(); ++a) {
      for (auto b = std::next(a); b != outs.end(); ++b) out.push_back(Value::tuple({a->second, b->second}));
    }
  }
  return out;
}

inline std::size_t checked_arity(const TestInputSet& inputs, std::optional<std::size_t> j, bool partial) {
  const std::size_t k = inputs.arity();
  if (partial) {
    if (k < 2) throw ContractViolation("partial scheme needs at least two parameters");
    if (*j >= k) throw ContractViolation("scheme argument index out of range");
  }
  return k;
}

inline void check_aligned(const TestInputSet& inputs, const std::vector<Value>& observed) {
  if (observed.size() != inputs.size()) {
    throw ContractViolation("observed outputs are not aligned with the test inputs");
  }
}

}  // namespace detail

/// The property of `scheme` for program `p` and witness `q`.
///
/// `observedOutputs` are p's outputs on `testInputs`, positionally aligned.
/// For the enumerator schemes p is the enumerator and these are its output
/// sets. FwdEnum ignores them. For Stream they are the pointwise program's
/// outputs on flatten_stream_inputs(testInputs), and the inner property is
/// stated over pointwise_id(p) on those flattened inputs.
inline Term build_property(const TriangulationScheme& s, const std::string& p, const std::string& q,
                           const TestInputSet& testInputs, const std::vector<Value>& observedOutputs) {
  using namespace detail;
  const Term i = var("i");
  auto P = [&](std::vector<Term> args) { return call(p, std::move(args)); };
  auto Q = [&](std::vector<Term> args) { return call(q, std::move(args)); };

  return std::visit(
      [&](const auto& sch) -> Term {
        using T = std::decay_t<decltype(sch)>;

        if constexpr (std::is_same_v<T, scheme::Stream>) {
          auto flat = flatten_stream_inputs(testInputs);
          if (flat.empty()) throw ContractViolation("stream inputs have no elements");
          TestInputSet pointwise(testInputs.problem_id(), std::move(flat));
          const std::string lifted = pointwise_id(p);
          Term inner = build_property(*sch.inner, lifted, q, pointwise, observedOutputs);
          Term consistency = forall_in("s", input_domain(testInputs),
                                       eq(call(p, {nth(var("s"), 0)}), map_call(lifted, nth(var("s"), 0))),
                                       "pointwise");
          return and_(inner, consistency);

        } else if constexpr (std::is_same_v<T, scheme::FwdEnum>) {
          const std::size_t k = testInputs.arity();
          return forall_in("i", input_domain(testInputs), in(P(arg_terms(i, k)), Q(arg_terms(i, k))), "membership");

        } else if constexpr (std::is_same_v<T, scheme::FullFwdInv>) {
          check_aligned(testInputs, observedOutputs);
          const std::size_t k = testInputs.arity();
          Term roundTrip = forall_in("i", input_domain(testInputs),
                                     eq(Q({tolerate(P(arg_terms(i, k)))}), whole(i, k)), "round-trip");
          std::vector<std::pair<std::string, Value>> grouped;
          for (const auto& o : observedOutputs) grouped.emplace_back("", o);
          const Term pr = var("pr");
          Term injective = forall_in("pr", output_pairs(grouped),
                                     not_(eq(Q({nth(pr, 0)}), Q({nth(pr, 1)}))), "injectivity");
          return and_(roundTrip, injective);

        } else if constexpr (std::is_same_v<T, scheme::PartialFwdInv>) {
          check_aligned(testInputs, observedOutputs);
          const std::size_t j = sch.argIndex;
          const std::size_t k = checked_arity(testInputs, j, true);
          std::vector<Term> qargs{tolerate(P(arg_terms(i, k)))};
          for (std::size_t m = 0; m < k; ++m) {
            if (m != j) qargs.push_back(nth(i, m));
          }
          Term roundTrip = forall_in("i", input_domain(testInputs), eq(Q(qargs), nth(i, j)), "round-trip");
          // pairs of outputs observed under the same remaining arguments
          std::map<std::string, std::pair<Value, std::vector<std::pair<std::string, Value>>>> groups;
          for (std::size_t n = 0; n < testInputs.size(); ++n) {
            Value rest = rest_of(testInputs.inputs()[n], j);
            auto& g = groups[canonical_encode(rest)];
            g.first = rest;
            g.second.emplace_back("", observedOutputs[n]);
          }
          std::vector<Value> domain;
          for (const auto& [key, g] : groups) {
            for (const auto& pair : output_pairs(g.second)) {
              domain.push_back(Value::tuple({pair.as_tuple()[0], pair.as_tuple()[1], g.first}));
            }
          }
          const Term pr = var("pr");
          auto qcall = [&](const Term& o) {
            std::vector<Term> a{o};
            for (std::size_t m = 0; m + 1 < k; ++m) a.push_back(nth(nth(pr, 2), m));
            return Q(a);
          };
          Term injective = forall_in("pr", domain, not_(eq(qcall(nth(pr, 0)), qcall(nth(pr, 1)))), "injectivity");
          return and_(roundTrip, injective);

        } else if constexpr (std::is_same_v<T, scheme::FullFwdSinv>) {
          check_aligned(testInputs, observedOutputs);
          const std::size_t k = testInputs.arity();
          auto dom = input_domain(testInputs);
          Term preimage = Q({tolerate(P(arg_terms(i, k)))});
          Term l1 = forall_in("i", dom, in(whole(i, k), preimage), "L1");
          const Term x = var("x");
          std::vector<Term> xargs = k == 1 ? std::vector<Term>{x} : arg_terms(x, k);
          Term l2 = forall_in("i", dom, forall("x", preimage, eq(P(xargs), P(arg_terms(i, k))), "", true), "L2");
          std::vector<std::pair<std::string, Value>> grouped;
          for (const auto& o : observedOutputs) grouped.emplace_back("", o);
          const Term pr = var("pr");
          Term l3 = forall_in("pr", output_pairs(grouped),
                              forall("x", Q({nth(pr, 0)}), not_(in(x, Q({nth(pr, 1)}))), "", true), "L3");
          return all_of({l1, l2, l3});

        } else if constexpr (std::is_same_v<T, scheme::PartialFwdSinv>) {
          check_aligned(testInputs, observedOutputs);
          const std::size_t j = sch.argIndex;
          const std::size_t k = checked_arity(testInputs, j, true);
          auto dom = input_domain(testInputs);
          std::vector<Term> qargs{tolerate(P(arg_terms(i, k)))};
          std::vector<Term> rest;
          for (std::size_t m = 0; m < k; ++m) {
            if (m != j) {
              qargs.push_back(nth(i, m));
              rest.push_back(nth(i, m));
            }
          }
          Term preimage = Q(qargs);
          Term l1 = forall_in("i", dom, in(nth(i, j), preimage), "L1");
          const Term x = var("x");
          std::vector<Term> xargs = arg_terms(i, k);
          xargs[j] = x;
          Term l2 = forall_in("i", dom, forall("x", preimage, eq(P(xargs), P(arg_terms(i, k))), "", true), "L2");
          std::map<std::string, std::pair<Value, std::vector<std::pair<std::string, Value>>>> groups;
          for (std::size_t n = 0; n < testInputs.size(); ++n) {
            Value r = rest_of(testInputs.inputs()[n], j);
            auto& g = groups[canonical_encode(r)];
            g.first = r;
            g.second.emplace_back("", observedOutputs[n]);
          }
          std::vector<Value> domain;
          for (const auto& [key, g] : groups) {
            for (const auto& pair : output_pairs(g.second)) {
              domain.push_back(Value::tuple({pair.as_tuple()[0], pair.as_tuple()[1], g.first}));
            }
          }
          const Term pr = var("pr");
          auto qcall = [&](const Term& o) {
            std::vector<Term> a{o};
            for (std::size_t m = 0; m + 1 < k; ++m) a.push_back(nth(nth(pr, 2), m));
            return Q(a);
          };
          Term l3 = forall_in("pr", domain, forall("x", qcall(nth(pr, 0)), not_(in(x, qcall(nth(pr, 1)))), "", true),
                              "L3");
          return all_of({l1, l2, l3});

        } else if constexpr (std::is_same_v<T, scheme::FullEnumSinv>) {
          check_aligned(testInputs, observedOutputs);
          const std::size_t k = testInputs.arity();
          const Term o = var("o");
          const Term x = var("x");
          Term d1 = forall_in("i", input_domain(testInputs),
                              forall("o", tolerate(P(arg_terms(i, k))), in(whole(i, k), Q({o})), "", true), "D1");
          std::map<std::string, Value> outs;
          for (const auto& set : observedOutputs) {
            if (!set.is_set() && !set.is_seq()) continue;
            for (const auto& e : set.children()) {
              if (usable(e)) outs.emplace(canonical_encode(e), e);
            }
          }
          std::vector<Value> domain;
          for (auto& [key, v] : outs) domain.push_back(v);
          std::vector<Term> xargs = k == 1 ? std::vector<Term>{x} : arg_terms(x, k);
          Term d2 = forall_in("o", domain, forall("x", Q({o}), in(o, P(xargs)), "", true), "D2");
          return and_(d1, d2);

        } else {  // PartialEnumSinv
          check_aligned(testInputs, observedOutputs);
          const std::size_t j = sch.argIndex;
          const std::size_t k = checked_arity(testInputs, j, true);
          const Term o = var("o");
          const Term x = var("x");
          std::vector<Term> qargs{o};
          for (std::size_t m = 0; m < k; ++m) {
            if (m != j) qargs.push_back(nth(i, m));
          }
          Term d1 = forall_in("i", input_domain(testInputs),
                              forall("o", tolerate(P(arg_terms(i, k))), in(nth(i, j), Q(qargs)), "", true), "D1");
          std::map<std::string, Value> pairs;
          for (std::size_t n = 0; n < testInputs.size(); ++n) {
            const Value& set = observedOutputs[n];
            if (!set.is_set() && !set.is_seq()) continue;
            Value rest = rest_of(testInputs.inputs()[n], j);
            for (const auto& e : set.children()) {
              if (!usable(e)) continue;
              Value pair = Value::tuple({e, rest});
              pairs.emplace(canonical_encode(pair), pair);
            }
          }
          std::vector<Value> domain;
          for (auto& [key, v] : pairs) domain.push_back(v);
          const Term orr = var("or");
          std::vector<Term> q2{nth(orr, 0)};
          for (std::size_t m = 0; m + 1 < k; ++m) q2.push_back(nth(nth(orr, 1), m));
          Term d2 = forall_in("or", domain,
                              forall("x", Q(q2), in(nth(orr, 0), P(with_arg(nth(orr, 1), k, j, x))), "", true), "D2");
          return and_(d1, d2);
        }
      },
      s.v);
}

// ---------------------------------------------------------------------------
// Agreement

struct Counterexample {
  Value input;
  std::string branch;
};

struct AgreementVerdict {
  bool agrees = false;
  std::optional<Counterexample> counterexample;
  std::vector<ForAllReport> clauses;
  std::string note;
};

/// Outputs of the program in the p position, as build_property expects them.
inline std::vector<Value> observe(const TriangulationScheme& s, const CandidateProgram& p, const TestInputSet& inputs,
                                  Executor& exec) {
  if (std::holds_alternative<scheme::FwdEnum>(s.v)) return {};
  if (s.is_stream()) {
    auto flat = flatten_stream_inputs(inputs);
    if (flat.empty()) return {};
    TestInputSet pointwise(inputs.problem_id(), std::move(flat));
    return observe(s.inner(), stream_lift(p), pointwise, exec);
  }
  std::vector<Value> out;
  for (const auto& o : exec.execute_batch(p, inputs)) out.push_back(o.value);
  return out;
}

/// agree(p, q) under `s`, evaluated over `inputs`.
inline AgreementVerdict check_agreement(const TriangulationScheme& s, const CandidateProgram& p,
                                        const CandidateProgram& q, const TestInputSet& inputs, Executor& exec,
                                        const EvalConfig& cfg = {}) {
  AgreementVerdict v;
  CandidateTable table;
  table.add(p);
  table.add(q);
  if (s.is_stream()) table.add(stream_lift(p));

  Term prop;
  try {
    prop = build_property(s, p.id(), q.id(), inputs, observe(s, p, inputs, exec));
  } catch (const ContractViolation& e) {
    if (!s.is_stream()) throw;
    v.note = e.what();
    return v;
  }

  Evaluator ev(table, exec, cfg);
  try {
    auto r = ev.eval(prop);
    v.agrees = r.value.is_bool() && r.value.as_bool();
    v.clauses = std::move(r.trace);
  } catch (const DomainTypeError& e) {
    v.note = e.what();
    return v;
  }
  for (const auto& c : v.clauses) {
    if (c.holds) continue;
    if (c.firstFailure) v.counterexample = Counterexample{c.firstFailure->binding, describe(c)};
    else if (v.note.empty()) v.note = describe(c);
    if (v.counterexample) break;
  }
  return v;
}

inline AgreementVerdict check_agreement(const TriangulationScheme& s, const CandidateProgram& p,
                                        const CandidateProgram& q, const TestInputSet& inputs,
                                        const EvalConfig& cfg = {}) {
  Executor exec(cfg.execution);
  return check_agreement(s, p, q, inputs, exec, cfg);
}

// ---------------------------------------------------------------------------
// Cascade

struct VerdictRecord {
  std::string problemId;
  std::string scheme;
  std::string pId;
  std::string qId;
  bool agrees = false;
  std::string counterexample;
};

inline VerdictRecord make_record(const std::string& problemId, const TriangulationScheme& s, const std::string& p,
                                 const std::string& q, const AgreementVerdict& v) {
  std::string cex;
  if (v.counterexample) cex = to_display(v.counterexample->input) + ": " + v.counterexample->branch;
  else if (!v.agrees) cex = v.note;
  return {problemId, scheme_name(s), p, q, v.agrees, std::move(cex)};
}

struct CascadeResult {
  std::vector<std::string> survivingForward;
  std::vector<std::string> survivingEnumerators;
  std::vector<VerdictRecord> log;
};

struct CascadeOptions {
  TriangulationScheme enumScheme = TriangulationScheme::full_enum_sinv();
  bool stream = false;  // forward programs are stream programs; enum/sinv are pointwise
};

/// Stage 1 keeps enumerators agreeing with some set-valued inverse; stage 2
/// keeps forward programs whose outputs belong to some surviving enumerator.
inline CascadeResult cascade_enum_sinv(const std::vector<CandidateProgram>& forward,
                                       const std::vector<CandidateProgram>& enums,
                                       const std::vector<CandidateProgram>& sinvs, const TestInputSet& inputs,
                                       Executor& exec, const EvalConfig& cfg = {}, const CascadeOptions& opt = {}) {
  if (forward.empty() || enums.empty() || sinvs.empty()) throw ContractViolation("cascade needs non-empty samples");
  CascadeResult out;
  const std::string& pid = inputs.problem_id();

  std::optional<TestInputSet> pointwise;
  if (opt.stream) {
    auto flat = flatten_stream_inputs(inputs);
    if (flat.empty()) throw ContractViolation("stream inputs have no elements");
    pointwise.emplace(pid, std::move(flat));
  }
  const TestInputSet& stage1Inputs = pointwise ? *pointwise : inputs;

  std::vector<const CandidateProgram*> enumSurvivors;
  for (const auto& e : enums) {
    bool kept = false;
    for (const auto& q : sinvs) {
      auto v = check_agreement(opt.enumScheme, e, q, stage1Inputs, exec, cfg);
      out.log.push_back(make_record(pid, opt.enumScheme, e.id(), q.id(), v));
      kept = kept || v.agrees;
    }
    if (kept) {
      enumSurvivors.push_back(&e);
      out.survivingEnumerators.push_back(e.id());
    }
  }

  const auto stage2 = opt.stream ? TriangulationScheme::stream(TriangulationScheme::fwd_enum())
                                 : TriangulationScheme::fwd_enum();
  for (const auto& p : forward) {
    bool kept = false;
    for (const auto* e : enumSurvivors) {
      auto v = check_agreement(stage2, p, *e, inputs, exec, cfg);
      out.log.push_back(make_record(pid, stage2, p.id(), e->id(), v));
      kept = kept || v.agrees;
    }
    if (kept) out.survivingForward.push_back(p.id());
  }
  return out;
}

}  // namespace tri
