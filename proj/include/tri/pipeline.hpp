#pragma once

// Select-or-abstain over triangulation schemes, and the witness-based
// baselines sharing the same machinery.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/consensus.hpp"
#include "tri/eval.hpp"
#include "tri/exec.hpp"
#include "tri/problem.hpp"
#include "tri/term.hpp"
#include "tri/triangulation.hpp"

namespace tri {

struct PipelineSamples {
  std::vector<CandidateProgram> forward;
  std::vector<CandidateProgram> enumerators;
  std::vector<CandidateProgram> sinvs;
  std::vector<CandidateProgram> inverses;
  std::optional<std::size_t> invertArg;  // partial schemes when the problem has several parameters
  bool stream = false;                   // enumerators/inverses solve the pointwise problem
};

struct PipelineResult {
  ConsensusDecision decision;
  std::string scheme;  // scheme that produced the selection, empty on abstention
  std::vector<EquivalenceClass> forwardClasses;
  std::vector<VerdictRecord> verdicts;
};

namespace detail {

inline std::map<std::string, const CandidateProgram*> index(const std::vector<CandidateProgram>& cs) {
  std::map<std::string, const CandidateProgram*> out;
  for (const auto& c : cs) out[c.id()] = &c;
  return out;
}

inline std::vector<CandidateProgram> representatives(const std::vector<EquivalenceClass>& classes,
                                                     const std::vector<CandidateProgram>& cs) {
  auto byId = index(cs);
  std::vector<CandidateProgram> out;
  for (const auto& c : classes) out.push_back(*byId.at(c.representative));
  return out;
}

/// Clusters on `inputs`, or one class per candidate when there is nothing to
/// run them on.
inline std::vector<EquivalenceClass> cluster_or_singletons(const std::vector<CandidateProgram>& cs,
                                                           const std::vector<std::vector<Value>>& inputs,
                                                           const std::string& problemId, Executor& exec) {
  if (!inputs.empty()) return cluster(cs, TestInputSet(problemId, inputs), exec);
  std::vector<std::string> ids;
  std::vector<std::vector<Value>> outcomes;
  for (const auto& c : cs) {
    ids.push_back(c.id());
    outcomes.push_back({Value::str(c.id())});
  }
  auto classes = cluster_outcomes(ids, outcomes);
  for (auto& c : classes) c.behavior.clear();
  return classes;
}

/// Arguments for an inverse-style witness: each observed output (or each
/// element of an observed output set), followed by the remaining arguments
/// of a partial inversion.
inline std::vector<std::vector<Value>> witness_inputs(const std::vector<std::vector<Value>>& outputsPerProgram,
                                                      const std::vector<std::vector<Value>>& inputs,
                                                      std::optional<std::size_t> invertArg, bool elements) {
  std::vector<std::vector<Value>> out;
  std::set<std::string> seen;
  for (const auto& outs : outputsPerProgram) {
    for (std::size_t n = 0; n < outs.size() && n < inputs.size(); ++n) {
      std::vector<Value> os;
      if (elements) {
        if (outs[n].is_set() || outs[n].is_seq()) os.assign(outs[n].children().begin(), outs[n].children().end());
      } else {
        os.push_back(outs[n]);
      }
      for (const auto& o : os) {
        if (!usable(o)) continue;
        std::vector<Value> args{o};
        if (invertArg) {
          for (std::size_t m = 0; m < inputs[n].size(); ++m) {
            if (m != *invertArg) args.push_back(inputs[n][m]);
          }
        }
        if (seen.insert(args_key(args)).second) out.push_back(std::move(args));
      }
    }
  }
  return out;
}

inline std::vector<Rational> masses(const std::vector<EquivalenceClass>& cs) {
  std::vector<Rational> out;
  for (const auto& c : cs) out.push_back(c.mass);
  return out;
}

inline std::vector<std::string> ids_of(const std::vector<EquivalenceClass>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.id);
  return out;
}

}  // namespace detail

/// Scheme-level RANSAC of forward classes against witness classes.
inline ConsensusDecision triangulate_classes(const TriangulationScheme& s,
                                             const std::vector<EquivalenceClass>& forwardClasses,
                                             const std::vector<CandidateProgram>& forward,
                                             const std::vector<EquivalenceClass>& witnessClasses,
                                             const std::vector<CandidateProgram>& witnesses,
                                             const TestInputSet& inputs, Executor& exec, const EvalConfig& cfg,
                                             std::vector<VerdictRecord>& log, const std::string& strategy) {
  auto fwd = detail::index(forward);
  auto wit = detail::index(witnesses);
  AgreementMatrix m(detail::ids_of(forwardClasses), detail::ids_of(witnessClasses));
  for (const auto& pc : forwardClasses) {
    for (const auto& wc : witnessClasses) {
      auto v = check_agreement(s, *fwd.at(pc.representative), *wit.at(wc.representative), inputs, exec, cfg);
      log.push_back(make_record(inputs.problem_id(), s, pc.representative, wc.representative, v));
      m.set(pc.id, wc.id, v.agrees);
    }
  }
  return ransac(m, forwardClasses, detail::masses(witnessClasses), strategy);
}

/// ENUM-SINV cascade, then FWD-SINV, then FWD-INV; the first scheme whose
/// RANSAC selects a class decides. Schemes without samples are skipped.
inline PipelineResult decide_pipeline(const PipelineSamples& samples, const TestInputSet& inputs, Executor& exec,
                                      const EvalConfig& cfg = {}) {
  if (samples.forward.empty()) throw ContractViolation("decide_pipeline: no forward samples");
  const std::string& pid = inputs.problem_id();
  PipelineResult out;
  out.forwardClasses = cluster(samples.forward, inputs, exec);
  auto forwardReps = detail::representatives(out.forwardClasses, samples.forward);

  // The forward programs as seen by the witnesses: lifted to pointwise
  // programs over flattened inputs for stream problems.
  std::vector<std::vector<Value>> viewInputs = inputs.inputs();
  std::vector<CandidateProgram> viewReps = forwardReps;
  if (samples.stream) {
    viewInputs = flatten_stream_inputs(inputs);
    viewReps.clear();
    for (const auto& p : forwardReps) viewReps.push_back(stream_lift(p));
  }
  if (viewInputs.empty()) {
    out.decision = ConsensusDecision::abstain("tri", "no inputs to triangulate on");
    return out;
  }
  const TestInputSet view(pid, viewInputs);
  const std::size_t k = view.arity();
  const auto invertArg = k > 1 ? samples.invertArg : std::nullopt;
  auto wrap = [&](TriangulationScheme s) { return samples.stream ? TriangulationScheme::stream(std::move(s)) : s; };

  std::vector<std::vector<Value>> forwardOutputs;
  for (const auto& p : viewReps) {
    std::vector<Value> vs;
    for (auto& o : exec.execute_batch(p, view)) vs.push_back(o.value);
    forwardOutputs.push_back(std::move(vs));
  }

  if (!samples.enumerators.empty() && !samples.sinvs.empty()) {
    auto enumClasses = cluster(samples.enumerators, view, exec);
    auto enumReps = detail::representatives(enumClasses, samples.enumerators);
    std::vector<std::vector<Value>> enumOutputs;
    for (const auto& e : enumReps) {
      std::vector<Value> vs;
      for (auto& o : exec.execute_batch(e, view)) vs.push_back(o.value);
      enumOutputs.push_back(std::move(vs));
    }
    auto sinvClasses = detail::cluster_or_singletons(
        samples.sinvs, detail::witness_inputs(enumOutputs, viewInputs, invertArg, true), pid, exec);
    auto sinvReps = detail::representatives(sinvClasses, samples.sinvs);

    CascadeOptions opt;
    opt.enumScheme = invertArg ? TriangulationScheme::partial_enum_sinv(*invertArg)
                               : TriangulationScheme::full_enum_sinv();
    opt.stream = samples.stream;
    auto cascade = cascade_enum_sinv(forwardReps, enumReps, sinvReps, inputs, exec, cfg, opt);
    out.verdicts.insert(out.verdicts.end(), cascade.log.begin(), cascade.log.end());

    std::vector<EquivalenceClass> surviving;
    for (const auto& c : enumClasses) {
      if (std::count(cascade.survivingEnumerators.begin(), cascade.survivingEnumerators.end(), c.id)) {
        surviving.push_back(c);
      }
    }
    if (!surviving.empty()) {
      const auto stage2 = wrap(TriangulationScheme::fwd_enum());
      AgreementMatrix m(detail::ids_of(out.forwardClasses), detail::ids_of(surviving));
      for (const auto& r : cascade.log) {
        if (r.scheme == scheme_name(stage2) && std::count(m.cols.begin(), m.cols.end(), r.qId)) {
          m.set(r.pId, r.qId, r.agrees);
        }
      }
      auto d = ransac(m, out.forwardClasses, detail::masses(surviving), "tri");
      if (d.selected) {
        d.reason = "enum-sinv: " + d.reason;
        out.decision = d;
        out.scheme = "enum-sinv";
        return out;
      }
    }
  }

  auto inverseStage = [&](const std::vector<CandidateProgram>& witnesses, TriangulationScheme s,
                          const std::string& name) -> bool {
    if (witnesses.empty()) return false;
    auto classes = detail::cluster_or_singletons(
        witnesses, detail::witness_inputs(forwardOutputs, viewInputs, invertArg, false), pid, exec);
    auto d = triangulate_classes(wrap(std::move(s)), out.forwardClasses, samples.forward, classes, witnesses, inputs,
                                 exec, cfg, out.verdicts, "tri");
    if (!d.selected) return false;
    d.reason = name + ": " + d.reason;
    out.decision = d;
    out.scheme = name;
    return true;
  };

  if (inverseStage(samples.sinvs,
                   invertArg ? TriangulationScheme::partial_fwd_sinv(*invertArg) : TriangulationScheme::full_fwd_sinv(),
                   "fwd-sinv")) {
    return out;
  }
  if (inverseStage(samples.inverses,
                   invertArg ? TriangulationScheme::partial_fwd_inv(*invertArg) : TriangulationScheme::full_fwd_inv(),
                   "fwd-inv")) {
    return out;
  }
  out.decision = ConsensusDecision::abstain("tri", "all schemes failed");
  return out;
}

// ---------------------------------------------------------------------------
// Witness baselines

/// A generated test: a fixed input and a checker over the program's output.
struct AssertionTest {
  CandidateProgram checker;  // output -> bool
  std::vector<Value> args;
};

struct BaselineResult {
  ConsensusDecision decision;
  std::vector<VerdictRecord> verdicts;
};

namespace detail {

/// RANSAC where witnesses are grouped by which program classes they accept.
inline BaselineResult ransac_by_columns(
    const std::string& strategy, const std::vector<EquivalenceClass>& forwardClasses,
    const std::vector<CandidateProgram>& forward, const std::vector<std::string>& witnessIds,
    const std::function<AgreementVerdict(const CandidateProgram&, std::size_t)>& agree, const std::string& problemId,
    const std::string& schemeLabel) {
  BaselineResult out;
  if (witnessIds.empty()) {
    out.decision = ConsensusDecision::abstain(strategy, "no witnesses");
    return out;
  }
  auto fwd = index(forward);
  std::vector<std::string> columns(witnessIds.size());
  for (const auto& pc : forwardClasses) {
    for (std::size_t w = 0; w < witnessIds.size(); ++w) {
      auto v = agree(*fwd.at(pc.representative), w);
      std::string cex = v.counterexample ? to_display(v.counterexample->input) + ": " + v.counterexample->branch : v.note;
      out.verdicts.push_back({problemId, schemeLabel, pc.representative, witnessIds[w], v.agrees, cex});
      columns[w] += v.agrees ? '1' : '0';
    }
  }
  std::map<std::string, std::vector<std::string>> groups;
  for (std::size_t w = 0; w < witnessIds.size(); ++w) groups[columns[w]].push_back(witnessIds[w]);
  std::vector<std::string> colIds;
  std::vector<Rational> colMass;
  AgreementMatrix m(ids_of(forwardClasses), {});
  for (auto& [pattern, members] : groups) {
    std::sort(members.begin(), members.end());
    colIds.push_back(members.front());
    colMass.emplace_back(static_cast<long long>(members.size()), static_cast<long long>(witnessIds.size()));
  }
  m.cols = colIds;
  m.cells.assign(m.rows.size(), std::vector<bool>(colIds.size(), false));
  std::size_t c = 0;
  for (auto& [pattern, members] : groups) {
    for (std::size_t r = 0; r < m.rows.size(); ++r) m.cells[r][c] = pattern[r] == '1';
    ++c;
  }
  out.decision = ransac(m, forwardClasses, colMass, strategy);
  return out;
}

}  // namespace detail

/// CodeT-style: programs against generated assertion tests.
inline BaselineResult ransac_tests(const std::vector<EquivalenceClass>& forwardClasses,
                                   const std::vector<CandidateProgram>& forward, const std::vector<AssertionTest>& tests,
                                   const std::string& problemId, Executor& exec, const EvalConfig& cfg = {}) {
  std::vector<std::string> ids;
  for (const auto& t : tests) ids.push_back(t.checker.id());
  auto agree = [&](const CandidateProgram& p, std::size_t w) {
    const auto& t = tests[w];
    std::vector<Term> args;
    for (const auto& a : t.args) args.push_back(lit(a));
    Term prop = forall_in("t", {Value::tuple(t.args)}, eq(call(t.checker.id(), {call(p.id(), args)}), lit(Value::boolean(true))),
                          "assertion");
    CandidateTable table({p, t.checker});
    Evaluator ev(table, exec, cfg);
    auto r = ev.eval(prop);
    AgreementVerdict v;
    v.agrees = r.value.is_bool() && r.value.as_bool();
    v.clauses = r.trace;
    if (!v.agrees && !r.trace.empty()) v.note = describe(r.trace.front());
    return v;
  };
  return detail::ransac_by_columns("ransac-tests", forwardClasses, forward, ids, agree, problemId, "assertion-test");
}

/// Programs against generated postconditions (args..., output) -> bool.
inline BaselineResult ransac_postconditions(const std::vector<EquivalenceClass>& forwardClasses,
                                            const std::vector<CandidateProgram>& forward,
                                            const std::vector<CandidateProgram>& posts, const TestInputSet& inputs,
                                            Executor& exec, const EvalConfig& cfg = {}) {
  std::vector<std::string> ids;
  for (const auto& q : posts) ids.push_back(q.id());
  const std::size_t k = inputs.arity();
  auto agree = [&](const CandidateProgram& p, std::size_t w) {
    const Term i = var("i");
    std::vector<Term> args = detail::arg_terms(i, k);
    std::vector<Term> postArgs = args;
    postArgs.push_back(tolerate(call(p.id(), args)));
    Term prop = forall_in("i", detail::input_domain(inputs), eq(call(posts[w].id(), postArgs), lit(Value::boolean(true))),
                          "postcondition");
    CandidateTable table({p, posts[w]});
    Evaluator ev(table, exec, cfg);
    auto r = ev.eval(prop);
    AgreementVerdict v;
    v.agrees = r.value.is_bool() && r.value.as_bool();
    v.clauses = r.trace;
    if (!v.agrees && !r.trace.empty()) v.note = describe(r.trace.front());
    return v;
  };
  return detail::ransac_by_columns("ransac-postcondition", forwardClasses, forward, ids, agree, inputs.problem_id(),
                                   "postcondition");
}

/// Programs against samples for a reformulated problem with the same
/// semantics (Syntactic), or for a problem whose answer is shifted by
/// `offset` (OffByOne, offset = 1).
inline BaselineResult ransac_equivalence(const std::string& strategy,
                                         const std::vector<EquivalenceClass>& forwardClasses,
                                         const std::vector<CandidateProgram>& forward,
                                         const std::vector<CandidateProgram>& witnesses, const TestInputSet& inputs,
                                         Executor& exec, const EvalConfig& cfg = {}, long long offset = 0) {
  BaselineResult out;
  if (witnesses.empty()) {
    out.decision = ConsensusDecision::abstain(strategy, "no witnesses");
    return out;
  }
  auto classes = cluster(witnesses, inputs, exec);
  auto wit = detail::index(witnesses);
  auto fwd = detail::index(forward);
  const std::size_t k = inputs.arity();
  const std::string label = offset == 0 ? "equivalence" : "equivalence" + std::string(offset > 0 ? "+" : "") +
                                                               std::to_string(offset);
  AgreementMatrix m(detail::ids_of(forwardClasses), detail::ids_of(classes));
  for (const auto& pc : forwardClasses) {
    const CandidateProgram& p0 = *fwd.at(pc.representative);
    CandidateProgram p = offset == 0 ? p0 : output_offset(p0, offset);
    for (const auto& wc : classes) {
      const CandidateProgram& q = *wit.at(wc.representative);
      const Term i = var("i");
      Term prop = forall_in("i", detail::input_domain(inputs),
                            eq(call(p.id(), detail::arg_terms(i, k)), call(q.id(), detail::arg_terms(i, k))), label);
      CandidateTable table({p0, p, q});
      Evaluator ev(table, exec, cfg);
      auto r = ev.eval(prop);
      const bool agrees = r.value.is_bool() && r.value.as_bool();
      std::string cex;
      if (!agrees && !r.trace.empty()) cex = describe(r.trace.front());
      out.verdicts.push_back({inputs.problem_id(), label, pc.representative, wc.representative, agrees, cex});
      m.set(pc.id, wc.id, agrees);
    }
  }
  out.decision = ransac(m, forwardClasses, detail::masses(classes), strategy);
  return out;
}

}  // namespace tri
