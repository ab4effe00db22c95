#pragma once

// Batch orchestration behind the command-line tool: sampling (or fixture
// loading), clustering, every selection strategy, judging, records and
// metrics. Also the theory simulation and entropy reports.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tri/consensus.hpp"
#include "tri/corpus.hpp"
#include "tri/evaluation.hpp"
#include "tri/exec.hpp"
#include "tri/gateway.hpp"
#include "tri/pipeline.hpp"
#include "tri/theory.hpp"

namespace tri::run {

namespace fs = std::filesystem;

inline const std::vector<std::string>& all_strategies() {
  static const std::vector<std::string> s{"tri",          "plurality",         "majority", "ransac-tests",
                                          "ransac-postcondition", "syntactic", "off-by-one"};
  return s;
}

struct RunConfig {
  std::string problems;
  std::vector<std::string> strategies = all_strategies();
  fs::path output;
  EvalConfig eval;
  llm::SamplingParams sampling;
  std::size_t jobs = 1;
  bool metrics = true;
  std::vector<std::string> runnerCommand{"python3", "-m", "tri_runner"};

  void validate() const {
    if (strategies.empty()) throw ContractViolation("no strategies selected");
    for (const auto& s : strategies) {
      if (std::find(all_strategies().begin(), all_strategies().end(), s) == all_strategies().end()) {
        throw ContractViolation("unknown strategy '" + s + "'");
      }
    }
    if (jobs == 0) throw ContractViolation("--jobs must be at least 1");
    eval.validate();
    sampling.validate();
  }

  bool wants(const std::string& s) const { return std::find(strategies.begin(), strategies.end(), s) != strategies.end(); }
};

// ---------------------------------------------------------------------------
// Sampling through the gateway

struct SampledProblem {
  TestInputSet inputs;
  corpus::FixtureSamples samples;
  std::optional<std::size_t> invertArg;
};

namespace detail {

inline std::vector<CandidateProgram> programs(llm::Gateway& gw, const ProblemDescription& d,
                                              const llm::SamplingParams& params, const llm::SourceStore& sources,
                                              const std::string& prefix) {
  std::vector<CandidateProgram> out;
  auto srcs = gw.sample_programs(d, params);
  for (std::size_t k = 0; k < srcs.size(); ++k) {
    out.push_back(CandidateProgram::runner(prefix + "#" + std::to_string(k), d.id,
                                           sources.materialize(srcs[k], d.signature.name)));
  }
  return out;
}

}  // namespace detail

/// Everything the selected strategies need for a problem without fixture samples.
inline SampledProblem sample_problem(const corpus::ProblemEntry& e, const RunConfig& cfg, llm::Gateway& gw,
                                     const llm::SourceStore& sources) {
  using K = llm::TransformKind::Kind;
  using llm::TransformKind;
  const auto& d = e.description;
  const auto& params = cfg.sampling;
  std::optional<TestInputSet> inputs = e.inputs;
  if (!inputs) inputs = gw.gen_test_inputs(d, params).inputs;
  SampledProblem out{*inputs, {}, e.invertArg};
  auto& s = out.samples;
  s.forward = detail::programs(gw, d, params, sources, "fwd");

  if (cfg.wants("tri")) {
    ProblemDescription base = e.stream ? gw.transform(d, TransformKind::of(K::Pointwise), params).front() : d;
    if (base.signature.arity() > 1 && !out.invertArg) out.invertArg = gw.choose_invert_arg(base, params);
    const std::size_t j = out.invertArg.value_or(0);
    auto one = [&](TransformKind k, const std::string& prefix) {
      return detail::programs(gw, gw.transform(base, k, params).front(), params, sources, prefix);
    };
    s.enumerators = one(TransformKind::of(K::Enumeration), "enum");
    s.sinvs = one(TransformKind::of(K::SetValuedInverse, j), "sinv");
    s.inverses = base.signature.arity() == 1 ? one(TransformKind::of(K::Inverse), "inv")
                                             : one(TransformKind::of(K::PartialInverse, j), "pinv");
  }
  if (cfg.wants("ransac-tests")) {
    s.tests = gw.gen_baseline_artifacts(d, TransformKind::of(K::BaselineTests), params, sources).tests;
  }
  if (cfg.wants("ransac-postcondition")) {
    s.postconditions =
        gw.gen_baseline_artifacts(d, TransformKind::of(K::BaselinePostcondition), params, sources).postconditions;
  }
  if (cfg.wants("syntactic")) {
    s.syntactic = detail::programs(gw, gw.transform(d, TransformKind::of(K::BaselineTranslate), params).front(), params,
                                   sources, "syn");
  }
  if (cfg.wants("off-by-one") && d.signature.returns.kind == TypeTag::Kind::Int) {
    s.offByOne = detail::programs(gw, gw.transform(d, TransformKind::of(K::BaselineOffByOne), params).front(), params,
                                  sources, "obo");
  }
  return out;
}

// ---------------------------------------------------------------------------
// One problem

struct ProblemResult {
  std::string id;
  std::vector<json> decisions;
  std::vector<json> verdicts;
  std::vector<json> clusters;
  std::map<std::string, ProblemOutcome> outcomes;  // per strategy; empty without a judge
  std::optional<std::string> error;                // soft failure, problem skipped
};

/// Runs every configured strategy on fixture (or pre-sampled) samples.
inline ProblemResult evaluate_problem(const corpus::ProblemEntry& e, const TestInputSet& inputs,
                                      const corpus::FixtureSamples& s, std::optional<std::size_t> invertArg,
                                      const RunConfig& cfg, Executor& exec) {
  const std::string& pid = e.description.id;
  ProblemResult out;
  out.id = pid;
  if (s.forward.empty()) {
    out.error = "no forward samples";
    return out;
  }
  auto classes = cluster(s.forward, inputs, exec);
  for (const auto& c : classes) out.clusters.push_back(corpus::cluster_record(pid, c));

  std::map<std::string, Verdict> verdictOf;
  bool solvable = false;
  if (e.judge) {
    for (const auto& c : classes) {
      verdictOf[c.id] = judge_class(*e.judge, c, inputs);
      solvable = solvable || verdictOf[c.id] == Verdict::Correct;
    }
  }

  auto emit = [&](const ConsensusDecision& d, const std::string& scheme) {
    std::optional<bool> correct;
    if (e.judge && d.selected) correct = verdictOf.at(d.classId) == Verdict::Correct;
    out.decisions.push_back(corpus::decision_record(pid, d, scheme, correct));
    if (e.judge) out.outcomes[d.strategy] = {solvable, d.selected, correct.value_or(false)};
  };
  auto keep = [&](const std::vector<VerdictRecord>& vs) {
    for (const auto& v : vs) out.verdicts.push_back(corpus::verdict_record(v));
  };

  for (const auto& strategy : all_strategies()) {
    if (!cfg.wants(strategy)) continue;
    if (strategy == "tri") {
      PipelineSamples ps{s.forward, s.enumerators, s.sinvs, s.inverses, invertArg, e.stream};
      auto r = decide_pipeline(ps, inputs, exec, cfg.eval);
      keep(r.verdicts);
      emit(r.decision, r.scheme);
    } else if (strategy == "plurality") {
      emit(plurality(classes), "");
    } else if (strategy == "majority") {
      emit(majority(classes), "");
    } else if (strategy == "ransac-tests") {
      auto r = ransac_tests(classes, s.forward, s.tests, pid, exec, cfg.eval);
      keep(r.verdicts);
      emit(r.decision, "");
    } else if (strategy == "ransac-postcondition") {
      auto r = ransac_postconditions(classes, s.forward, s.postconditions, inputs, exec, cfg.eval);
      keep(r.verdicts);
      emit(r.decision, "");
    } else if (strategy == "syntactic") {
      auto r = ransac_equivalence("syntactic", classes, s.forward, s.syntactic, inputs, exec, cfg.eval);
      keep(r.verdicts);
      emit(r.decision, "");
    } else if (strategy == "off-by-one") {
      auto r = ransac_equivalence("off-by-one", classes, s.forward, s.offByOne, inputs, exec, cfg.eval, 1);
      keep(r.verdicts);
      emit(r.decision, "");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// A whole manifest

struct RunSummary {
  std::vector<json> metrics;  // one record per strategy
  std::size_t problems = 0;
  std::size_t skipped = 0;
};

inline void write_lines(const fs::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << "\n";
}

/// Processes every problem of the manifest and writes decisions.jsonl,
/// verdicts.jsonl, clusters.jsonl, errors.jsonl and metrics.jsonl under
/// cfg.output. `gw` may be null when every problem carries fixture samples.
inline RunSummary run(const RunConfig& cfg, llm::Gateway* gw) {
  cfg.validate();
  auto entries = corpus::load_manifest(cfg.problems);
  for (const auto& e : entries) {
    if (cfg.metrics && !e.judge) throw Error("problem '" + e.description.id + "' has no judge; metrics need one");
    if (!e.samples && !gw) throw Error("problem '" + e.description.id + "' needs sampling but no model is configured");
    if (e.samples && !e.inputs) throw Error("problem '" + e.description.id + "' has fixture samples but no inputs");
  }
  fs::create_directories(cfg.output);
  const llm::SourceStore sources(cfg.output / "sources", cfg.runnerCommand);

  std::vector<ProblemResult> results(entries.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    Executor exec(cfg.eval.execution);
    for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) {
      const auto& e = entries[i];
      try {
        if (e.samples) {
          results[i] = evaluate_problem(e, *e.inputs, *e.samples, e.invertArg, cfg, exec);
        } else {
          auto sp = sample_problem(e, cfg, *gw, sources);
          results[i] = evaluate_problem(e, sp.inputs, sp.samples, sp.invertArg, cfg, exec);
        }
      } catch (const GatewayError& ex) {
        results[i].id = e.description.id;
        results[i].error = ex.what();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = entries.size();
      }
    }
  };
  const std::size_t threads = std::min(cfg.jobs, std::max<std::size_t>(entries.size(), 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<json> decisions, verdicts, clusters, errors;
  std::map<std::string, std::vector<ProblemOutcome>> outcomes;
  RunSummary summary;
  summary.problems = entries.size();
  for (const auto& r : results) {
    if (r.error) {
      ++summary.skipped;
      errors.push_back({{"problem", r.id}, {"error", *r.error}});
      continue;
    }
    decisions.insert(decisions.end(), r.decisions.begin(), r.decisions.end());
    verdicts.insert(verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    clusters.insert(clusters.end(), r.clusters.begin(), r.clusters.end());
    for (const auto& [s, o] : r.outcomes) outcomes[s].push_back(o);
  }
  if (cfg.metrics) {
    for (const auto& s : all_strategies()) {
      if (cfg.wants(s)) summary.metrics.push_back(corpus::metrics_record(s, confusion(outcomes[s])));
    }
  }
  write_lines(cfg.output / "decisions.jsonl", decisions);
  write_lines(cfg.output / "verdicts.jsonl", verdicts);
  write_lines(cfg.output / "clusters.jsonl", clusters);
  write_lines(cfg.output / "errors.jsonl", errors);
  if (cfg.metrics) write_lines(cfg.output / "metrics.jsonl", summary.metrics);
  return summary;
}

// ---------------------------------------------------------------------------
// Theory simulation

struct SimulationReport {
  theory::ModelSpec spec;
  std::uint64_t seed = 0;
  std::size_t models = 0;
  std::size_t trials = 0;

  std::size_t equalCorrectPositive = 0;  // of `models`
  std::size_t dissociativeFound = 0;
  std::size_t dissociativePositive = 0;
  std::size_t rearrangementChecked = 0;
  std::size_t rearrangementOk = 0;
  double meanDelta = 0;  // over the unconstrained models
  double exactDelta = 0;  // first unconstrained model
  theory::MonteCarloEstimate estimate;

  bool monte_carlo_ok() const { return std::abs(estimate.delta - exactDelta) <= 3 * estimate.stderr_; }
  bool passed() const {
    return equalCorrectPositive == models && dissociativePositive == dissociativeFound && dissociativeFound > 0 &&
           rearrangementOk == rearrangementChecked && monte_carlo_ok();
  }
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + k + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline bool all_distinct(const std::vector<theory::Q>& pi) {
  std::set<theory::Q> s(pi.begin(), pi.end());
  return s.size() == pi.size();
}

/// Positivity checks on `models` random models per family, the
/// rearrangement classification on every class seen, and a Monte Carlo
/// cross-check on the first unconstrained model. Dissociative models are
/// found by rejection over at most 50 x models seeds.
inline SimulationReport simulate(const theory::ModelSpec& spec, std::uint64_t seed, std::size_t models,
                                 std::size_t trials) {
  spec.validate();
  if (models == 0) throw ContractViolation("need at least one model");
  if (trials == 0) throw ContractViolation("need at least one trial");
  SimulationReport r;
  r.spec = spec;
  r.seed = seed;
  r.models = models;
  r.trials = trials;
  auto rearrangement = [&](const theory::ParrotModel& m) {
    for (const auto& h : m.classes) {
      auto c = theory::rearrangement_check(h.pi, h.sigma);
      ++r.rearrangementChecked;
      const bool strict = all_distinct(h.pi) && theory::fixed_point_free(h.sigma);
      if (c.lhs >= c.rhs && c.strict == strict && (strict ? c.lhs > c.rhs : true)) ++r.rearrangementOk;
    }
  };

  theory::ModelSpec eq = spec;
  eq.equalCorrect = true;
  for (std::size_t k = 0; k < models; ++k) {
    auto m = theory::random_model(eq, derive_seed(seed, 2 * k));
    rearrangement(m);
    if (theory::expected_delta(m) > 0) ++r.equalCorrectPositive;
  }

  theory::ModelSpec free = spec;
  free.equalCorrect = false;
  double total = 0;
  for (std::size_t k = 0; k < 50 * models && r.dissociativeFound < models; ++k) {
    auto m = theory::random_model(free, derive_seed(seed, 2 * k + 1));
    const auto delta = theory::expected_delta(m);
    if (k == 0) {
      r.exactDelta = theory::to_double(delta);
      r.estimate = theory::monte_carlo_delta(m, trials, derive_seed(seed, ~0ull));
    }
    if (k < models) {
      rearrangement(m);
      total += theory::to_double(delta);
    }
    if (std::all_of(m.classes.begin(), m.classes.end(), [](const auto& h) { return theory::dissociative(h); })) {
      ++r.dissociativeFound;
      if (delta > 0) ++r.dissociativePositive;
    }
  }
  r.meanDelta = total / static_cast<double>(models);
  return r;
}

// ---------------------------------------------------------------------------
// Semantic entropy by sample-size prefix

struct EntropyRow {
  std::string problem;
  std::size_t n = 0;
  double entropy = 0;
};

inline std::vector<std::size_t> default_sizes(std::size_t available) {
  std::vector<std::size_t> out;
  for (std::size_t n = 5; n <= available; n += 5) out.push_back(n);
  if (out.empty() && available > 0) out.push_back(available);
  return out;
}

/// Entropy of the class distribution of the first n samples, for each n.
/// Sizes beyond the recorded samples are left out.
inline std::vector<EntropyRow> entropy_rows(const std::string& problem, const std::vector<std::string>& fingerprints,
                                            std::vector<std::size_t> sizes) {
  if (fingerprints.empty()) throw Error("problem '" + problem + "' has no recorded samples");
  if (sizes.empty()) sizes = default_sizes(fingerprints.size());
  std::vector<std::size_t> usable;
  for (auto n : sizes) {
    if (n >= 1 && n <= fingerprints.size()) usable.push_back(n);
  }
  std::vector<EntropyRow> out;
  for (auto& [n, h] : entropy_by_prefix(fingerprints, usable)) out.push_back({problem, n, h});
  return out;
}

/// Fingerprints of a fixture problem's forward samples, in sample order.
inline std::vector<std::string> fingerprints(const corpus::ProblemEntry& e, Executor& exec) {
  if (!e.samples || e.samples->forward.empty() || !e.inputs) {
    throw Error("problem '" + e.description.id + "' has no recorded samples");
  }
  const auto& fwd = e.samples->forward;
  std::map<std::string, std::string> classOf;
  for (const auto& c : cluster(fwd, *e.inputs, exec)) {
    for (const auto& m : c.members) classOf[m] = c.id;
  }
  std::vector<std::string> out;
  for (const auto& p : fwd) out.push_back(classOf.at(p.id()));
  return out;
}

/// Reads {"problem", "fingerprint"} lines, grouped by problem in first-seen order.
inline std::vector<std::pair<std::string, std::vector<std::string>>> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open samples " + path);
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::map<std::string, std::size_t> slot;
  std::size_t lineNo = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      auto p = j.at("problem").get<std::string>();
      auto [it, fresh] = slot.emplace(p, out.size());
      if (fresh) out.push_back({p, {}});
      out[it->second].second.push_back(j.at("fingerprint").get<std::string>());
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tri::run
