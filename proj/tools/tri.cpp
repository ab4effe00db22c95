// tri: select-or-abstain over sampled programs.
//
//   tri run       --problems M --out DIR [--strategies a,b] [--replay DIR | --record DIR]
//   tri simulate  [--seed S] [--models N] [--trials T] [spec flags]
//   tri entropy   (--problems M | --samples F) [--sizes 5,10,...]
//   tri inspect   --problems M [--problem ID] [--property SEXPR]

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tri/http_transport.hpp"
#include "tri/run.hpp"

using namespace tri;
namespace fs = std::filesystem;

namespace {

Rational parse_fraction(const std::string& s) {
  try {
    auto slash = s.find('/');
    if (slash == std::string::npos) {
      auto dot = s.find('.');
      if (dot == std::string::npos) return Rational(std::stoll(s));
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      long long den = 1;
      for (std::size_t k = dot + 1; k < s.size(); ++k) den *= 10;
      return Rational(std::stoll(digits), den);
    }
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ContractViolation("not a fraction: '" + s + "'");
  }
}

std::string show(const json& r) {
  if (r.is_null()) return "-";
  auto s = r.get<std::string>();
  auto slash = s.find('/');
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  return out.str();
}

const std::vector<std::string> kMetricKeys{"reliableAccuracy", "overallAccuracy", "abstentionRate", "precisionAbs",
                                           "recallAbs", "f1Abs"};

void print_metrics(const std::vector<json>& metrics, std::ostream& out) {
  out << std::left << std::setw(22) << "strategy" << std::right;
  for (const char* k : {"n1", "n2", "n3", "n4", "n5"}) out << std::setw(5) << k;
  for (const char* k : {"rel.acc", "ovr.acc", "abst", "prec", "recall", "f1"}) out << std::setw(9) << k;
  out << "\n";
  for (const auto& m : metrics) {
    out << std::left << std::setw(22) << m["strategy"].get<std::string>() << std::right;
    for (const char* k : {"n1", "n2", "n3", "n4", "n5"}) out << std::setw(5) << m[k].get<std::size_t>();
    for (const auto& k : kMetricKeys) out << std::setw(9) << show(m[k]);
    out << "\n";
  }
}

void write_metrics_csv(const std::vector<json>& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "strategy,n1,n2,n3,n4,n5";
  for (const auto& k : kMetricKeys) out << "," << k;
  out << "\n";
  for (const auto& m : metrics) {
    out << m["strategy"].get<std::string>();
    for (const char* k : {"n1", "n2", "n3", "n4", "n5"}) out << "," << m[k].get<std::size_t>();
    for (const auto& k : kMetricKeys) out << "," << (m[k].is_null() ? "" : m[k].get<std::string>());
    out << "\n";
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& x : split_list(s)) out.push_back(std::stoul(x));
  return out;
}

struct Common {
  std::string angelicFraction = "1/3";
  long long timeoutMs = 10000;
  std::size_t jobs = 1;
};

EvalConfig eval_config(const Common& c) {
  EvalConfig cfg;
  cfg.angelicFraction = parse_fraction(c.angelicFraction);
  cfg.execution.timeout = std::chrono::milliseconds(c.timeoutMs);
  cfg.validate();
  return cfg;
}

// -- run ----------------------------------------------------------------------

struct RunArgs {
  std::string problems, out, strategies, replay, record, csv, runner, model = "gpt-4o";
  std::size_t n = 30;
  double temperature = 1.0;
  bool noMetrics = false;
};

int cmd_run(const RunArgs& a, const Common& c) {
  run::RunConfig cfg;
  cfg.problems = a.problems;
  cfg.output = a.out;
  if (!a.strategies.empty()) cfg.strategies = split_list(a.strategies);
  cfg.eval = eval_config(c);
  cfg.sampling.n = a.n;
  cfg.sampling.temperature = a.temperature;
  cfg.sampling.model = a.model;
  cfg.jobs = c.jobs;
  cfg.metrics = !a.noMetrics;
  if (!a.runner.empty()) cfg.runnerCommand = split_command(a.runner);
  if (!a.replay.empty() && !a.record.empty()) throw ContractViolation("--replay and --record are exclusive");

  // The model is only contacted for problems without fixture samples.
  std::optional<llm::Gateway> gw;
  auto needsModel = [&] {
    for (const auto& e : corpus::load_manifest(a.problems)) {
      if (!e.samples) return true;
    }
    return false;
  };
  if (!a.replay.empty()) {
    gw.emplace(llm::Gateway::Mode::Replay, nullptr, fs::path(a.replay));
  } else if (needsModel()) {
    fs::path dir = a.record.empty() ? fs::path(a.out) / "transcripts" : fs::path(a.record);
    gw.emplace(llm::Gateway::Mode::Record, std::make_shared<llm::HttpTransport>(), dir);
  }
  auto summary = run::run(cfg, gw ? &*gw : nullptr);
  std::cout << summary.problems << " problems, " << summary.skipped << " skipped; records in " << a.out << "\n";
  if (cfg.metrics) {
    print_metrics(summary.metrics, std::cout);
    if (!a.csv.empty()) write_metrics_csv(summary.metrics, a.csv);
  }
  return 0;
}

// -- simulate -----------------------------------------------------------------

struct SimArgs {
  std::uint64_t seed = 0;
  std::size_t models = 1000;
  std::size_t trials = 100000;
  theory::ModelSpec spec;
  std::string csv;
};

int cmd_simulate(const SimArgs& a) {
  auto r = run::simulate(a.spec, a.seed, a.models, a.trials);
  const auto& s = r.spec;
  auto yes = [](bool b) { return b ? "pass" : "FAIL"; };
  std::cout << "spec: " << s.numHallucinationClasses << " hallucination classes x " << s.problemsPerClass
            << " problems, " << s.numProgramClasses << " program classes, " << s.correctPerProblem
            << " correct per problem; seed " << r.seed << "\n";
  std::cout << std::setprecision(6);
  std::cout << "mean delta over " << r.models << " models: " << r.meanDelta << "\n";
  std::cout << "equal correct probabilities: " << r.equalCorrectPositive << "/" << r.models << " positive  "
            << yes(r.equalCorrectPositive == r.models) << "\n";
  std::cout << "dissociative: " << r.dissociativePositive << "/" << r.dissociativeFound << " positive  "
            << yes(r.dissociativeFound > 0 && r.dissociativePositive == r.dissociativeFound) << "\n";
  std::cout << "rearrangement: " << r.rearrangementOk << "/" << r.rearrangementChecked << "  "
            << yes(r.rearrangementOk == r.rearrangementChecked) << "\n";
  std::cout << "monte carlo (" << r.trials << " trials): " << r.estimate.delta << " +- " << r.estimate.stderr_
            << " vs exact " << r.exactDelta << (r.estimate.widened ? " (widened)" : "") << "  "
            << yes(r.monte_carlo_ok()) << "\n";
  std::cout << "checks " << (r.passed() ? "passed" : "FAILED") << "\n";
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw Error("cannot write " + a.csv);
    out << std::setprecision(12);
    out << "seed,models,trials,mean_delta,equal_positive,dissociative_found,dissociative_positive,"
           "rearrangement_checked,rearrangement_ok,mc_delta,mc_stderr,exact_delta,passed\n";
    out << r.seed << "," << r.models << "," << r.trials << "," << r.meanDelta << "," << r.equalCorrectPositive << ","
        << r.dissociativeFound << "," << r.dissociativePositive << "," << r.rearrangementChecked << ","
        << r.rearrangementOk << "," << r.estimate.delta << "," << r.estimate.stderr_ << "," << r.exactDelta << ","
        << (r.passed() ? 1 : 0) << "\n";
  }
  return r.passed() ? 0 : 1;
}

// -- entropy ------------------------------------------------------------------

int cmd_entropy(const std::string& problems, const std::string& samples, const std::string& sizes,
                const std::string& csv) {
  if (problems.empty() == samples.empty()) throw ContractViolation("give exactly one of --problems and --samples");
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  if (!samples.empty()) {
    groups = run::read_samples(samples);
  } else {
    Executor exec;
    for (const auto& e : corpus::load_manifest(problems)) groups.push_back({e.description.id, run::fingerprints(e, exec)});
  }
  if (groups.empty()) throw Error("no recorded samples");
  std::vector<run::EntropyRow> rows;
  for (const auto& [p, fps] : groups) {
    auto r = run::entropy_rows(p, fps, parse_sizes(sizes));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::cout << std::left << std::setw(24) << "problem" << std::right << std::setw(6) << "n" << std::setw(12) << "entropy"
            << "\n";
  std::cout << std::fixed << std::setprecision(6);
  for (const auto& r : rows) std::cout << std::left << std::setw(24) << r.problem << std::right << std::setw(6) << r.n
                                       << std::setw(12) << r.entropy << "\n";
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv);
    out << "problem,n,entropy\n" << std::setprecision(12);
    for (const auto& r : rows) out << r.problem << "," << r.n << "," << r.entropy << "\n";
  }
  return 0;
}

// -- inspect ------------------------------------------------------------------

int cmd_inspect(const std::string& problems, const std::string& only, const std::string& property, const Common& c) {
  auto cfg = eval_config(c);
  Executor exec(cfg.execution);
  bool found = false;
  for (const auto& e : corpus::load_manifest(problems)) {
    const auto& d = e.description;
    if (!only.empty() && d.id != only) continue;
    found = true;
    std::cout << d.id << ": " << to_string(d.signature) << (e.stream ? "  [stream]" : "") << "\n";
    if (!e.samples) {
      std::cout << "  sampled through the model\n";
      continue;
    }
    const auto& s = *e.samples;
    std::cout << "  samples: " << s.forward.size() << " forward, " << s.enumerators.size() << " enumerators, "
              << s.sinvs.size() << " sinvs, " << s.inverses.size() << " inverses, " << s.tests.size() << " tests, "
              << s.postconditions.size() << " postconditions\n";
    if (!property.empty()) {
      CandidateTable table;
      for (const auto* group : {&s.forward, &s.enumerators, &s.sinvs, &s.inverses, &s.syntactic, &s.offByOne,
                                &s.postconditions}) {
        for (const auto& p : *group) table.add(p);
      }
      Evaluator ev(table, exec, cfg);
      auto r = ev.eval(parse_term(property));
      std::cout << "  " << to_display(r.value) << "\n";
      for (const auto& t : r.trace) std::cout << "    " << describe(t) << "\n";
      continue;
    }
    if (!e.inputs || s.forward.empty()) continue;
    for (const auto& cl : cluster(s.forward, *e.inputs, exec)) {
      std::cout << "  class " << cl.id << "  mass " << cl.mass.numerator() << "/" << cl.mass.denominator() << "  "
                << cl.members.size() << " samples";
      if (e.judge) std::cout << "  " << (judge_class(*e.judge, cl, *e.inputs) == Verdict::Correct ? "correct" : "incorrect");
      std::cout << "\n";
    }
  }
  if (!found) throw Error("no problem '" + only + "' in " + problems);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Select-or-abstain over sampled programs by semantic triangulation."};
  app.require_subcommand(1);
  Common common;
  auto commonFlags = [&](CLI::App* sub) {
    sub->add_option("--angelic-fraction", common.angelicFraction, "tolerated fraction of angelic branches")
        ->capture_default_str();
    sub->add_option("--timeout-ms", common.timeoutMs, "per-call execution timeout")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "problems processed concurrently")->capture_default_str();
  };

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run every strategy over a problem manifest");
  run->add_option("--problems", ra.problems, "problem manifest (jsonl)")->required();
  run->add_option("--out", ra.out, "output directory")->required();
  run->add_option("--strategies", ra.strategies, "comma-separated subset of strategies");
  run->add_option("--replay", ra.replay, "transcript directory to replay");
  run->add_option("--record", ra.record, "transcript directory to record into");
  run->add_option("--n", ra.n, "programs sampled per problem")->capture_default_str();
  run->add_option("--temperature", ra.temperature, "sampling temperature")->capture_default_str();
  run->add_option("--model", ra.model, "model name")->capture_default_str();
  run->add_option("--runner", ra.runner, "command that serves sampled sources");
  run->add_option("--csv", ra.csv, "also write metrics as csv");
  run->add_flag("--no-metrics", ra.noMetrics, "skip judging and metrics");
  commonFlags(run);

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "check the stochastic-parrot propositions numerically");
  sim->add_option("--seed", sa.seed)->capture_default_str();
  sim->add_option("--models", sa.models, "random models per family")->capture_default_str();
  sim->add_option("--trials", sa.trials, "monte carlo trials")->capture_default_str();
  sim->add_option("--hallucination-classes", sa.spec.numHallucinationClasses)->capture_default_str();
  sim->add_option("--problems-per-class", sa.spec.problemsPerClass)->capture_default_str();
  sim->add_option("--program-classes", sa.spec.numProgramClasses)->capture_default_str();
  sim->add_option("--correct-per-problem", sa.spec.correctPerProblem)->capture_default_str();
  sim->add_option("--csv", sa.csv);

  std::string eProblems, eSamples, eSizes, eCsv;
  auto* ent = app.add_subcommand("entropy", "semantic entropy by sample-size prefix");
  ent->add_option("--problems", eProblems, "fixture manifest");
  ent->add_option("--samples", eSamples, "jsonl of {problem, fingerprint} in sample order");
  ent->add_option("--sizes", eSizes, "comma-separated prefix sizes (default 5,10,...)");
  ent->add_option("--csv", eCsv);

  std::string iProblems, iProblem, iProperty;
  auto* ins = app.add_subcommand("inspect", "show a problem's classes or evaluate a property on its candidates");
  ins->add_option("--problems", iProblems, "problem manifest")->required();
  ins->add_option("--problem", iProblem, "problem id");
  ins->add_option("--property", iProperty, "property as an s-expression");
  commonFlags(ins);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(ra, common);
    if (*sim) return cmd_simulate(sa);
    if (*ent) return cmd_entropy(eProblems, eSamples, eSizes, eCsv);
    if (*ins) return cmd_inspect(iProblems, iProblem, iProperty, common);
  } catch (const std::exception& e) {
    std::cerr << "tri: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
