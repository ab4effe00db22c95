#pragma once

// Problem manifests and run records, both line-delimited JSON.
//
// Manifest line (one problem):
//
//   {"id": "...", "text": "...",
//    "signature": {"name": "f", "params": [["x", "int"]], "returns": "int"},
//    "invertArg": 0,                      optional
//    "stream": false,                     optional
//    "inputs": [[<wire>...], ...],        fixture test inputs, optional
//    "judge": [[[<wire args>], [<accepted wire outputs>]], ...],   optional
//    "candidates": {                      fixture samples, optional
//      "forward" | "enumerators" | "sinvs" | "inverses" | "syntactic" |
//      "offByOne" | "postconditions": [<program>...]},
//    "tests": [{"id": "...", "args": [<wire>...], "table": [[[<wire out>], <bool>], ...]}]}
//
//   <program> = {"id": "...", "count": 1, "table": [[[<wire args>], <wire out>], ...]}
//             | {"id": "...", "count": 1, "branches": {"<tag>": <table>, ...}}
//
// "count" stands for that many samples with the same behaviour (ids get a
// "#k" suffix). "branches" builds a set-valued inverse from union-split
// branch programs, dispatching on the constructor of the output argument.
// Outputs may use {"special": ...}. A problem without "candidates" is
// sampled through the language model.

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tri/candidate.hpp"
#include "tri/consensus.hpp"
#include "tri/error.hpp"
#include "tri/evaluation.hpp"
#include "tri/pipeline.hpp"
#include "tri/problem.hpp"
#include "tri/triangulation.hpp"
#include "tri/types.hpp"
#include "tri/wire.hpp"

namespace tri::corpus {

struct FixtureSamples {
  std::vector<CandidateProgram> forward, enumerators, sinvs, inverses, syntactic, offByOne, postconditions;
  std::vector<AssertionTest> tests;
};

struct ProblemEntry {
  ProblemDescription description;
  std::optional<std::size_t> invertArg;
  bool stream = false;
  std::optional<TestInputSet> inputs;
  std::optional<Judge> judge;
  std::optional<FixtureSamples> samples;
};

namespace detail {

inline std::vector<Value> args_of(const json& j) {
  if (!j.is_array()) throw FormatError("argument list must be an array: " + j.dump());
  std::vector<Value> out;
  for (const auto& a : j) out.push_back(from_wire(a));
  return out;
}

inline FixtureTable table_of(const json& j) {
  if (!j.is_array()) throw FormatError("table must be an array of [args, out] pairs");
  FixtureTable t;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2) throw FormatError("table row must be [args, out]: " + row.dump());
    t.set(args_of(row[0]), from_wire(row[1], /*allowSpecial=*/true));
  }
  return t;
}

inline std::vector<CandidateProgram> expand(const CandidateProgram& c, std::size_t count) {
  if (count == 1) return {c};
  std::vector<CandidateProgram> out;
  for (std::size_t k = 0; k < count; ++k) out.emplace_back(c.id() + "#" + std::to_string(k), c.problem_id(), c.backend());
  return out;
}

inline std::vector<CandidateProgram> programs_of(const json& arr, const std::string& problemId,
                                                 const FunctionSignature& sig) {
  std::vector<CandidateProgram> out;
  for (const auto& p : arr) {
    const auto id = p.at("id").get<std::string>();
    const auto count = p.value("count", std::size_t{1});
    if (count == 0) throw FormatError("program '" + id + "' has count 0");
    std::optional<CandidateProgram> c;
    if (p.contains("table")) {
      c = CandidateProgram::fixture(id, problemId, table_of(p.at("table")));
    } else if (p.contains("branches")) {
      std::map<std::string, CandidateProgram> branches;
      for (const auto& [tag, t] : p.at("branches").items()) {
        branches.emplace(tag, CandidateProgram::fixture(id + "/" + tag, problemId, table_of(t)));
      }
      c = compose_union_inverse(id, problemId, std::move(branches), sig.returns, 0);
    } else {
      throw FormatError("program '" + id + "' has neither a table nor branches");
    }
    for (auto& e : expand(*c, count)) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

inline FunctionSignature signature_from_json(const json& j) {
  FunctionSignature s;
  s.name = j.at("name").get<std::string>();
  for (const auto& p : j.at("params")) {
    if (!p.is_array() || p.size() != 2) throw FormatError("parameter must be [name, type]");
    s.params.push_back({p[0].get<std::string>(), parse_type(p[1].get<std::string>())});
  }
  s.returns = parse_type(j.at("returns").get<std::string>());
  s.validate();
  return s;
}

inline json signature_to_json(const FunctionSignature& s) {
  json params = json::array();
  for (const auto& p : s.params) params.push_back({p.name, to_string(p.type)});
  return {{"name", s.name}, {"params", params}, {"returns", to_string(s.returns)}};
}

inline ProblemEntry parse_problem(const json& j) {
  try {
    ProblemEntry e;
    e.description.id = j.at("id").get<std::string>();
    e.description.text = j.value("text", std::string());
    e.description.signature = signature_from_json(j.at("signature"));
    if (j.contains("invertArg")) e.invertArg = j.at("invertArg").get<std::size_t>();
    if (e.invertArg && *e.invertArg >= e.description.signature.arity()) {
      throw FormatError("invertArg out of range");
    }
    e.stream = j.value("stream", false);
    const auto& id = e.description.id;
    if (j.contains("inputs")) {
      std::vector<std::vector<Value>> ins;
      for (const auto& a : j.at("inputs")) ins.push_back(detail::args_of(a));
      e.inputs.emplace(id, std::move(ins), InputProvenance::Fixture);
    }
    if (j.contains("judge")) {
      Judge judge{id, {}};
      for (const auto& row : j.at("judge")) {
        auto args = detail::args_of(row.at(0));
        for (const auto& out : row.at(1)) judge.accept(args, from_wire(out));
      }
      e.judge = std::move(judge);
    }
    if (j.contains("candidates")) {
      FixtureSamples s;
      const auto& c = j.at("candidates");
      const auto& sig = e.description.signature;
      auto take = [&](const char* role, std::vector<CandidateProgram>& into) {
        if (c.contains(role)) into = detail::programs_of(c.at(role), id, sig);
      };
      take("forward", s.forward);
      take("enumerators", s.enumerators);
      take("sinvs", s.sinvs);
      take("inverses", s.inverses);
      take("syntactic", s.syntactic);
      take("offByOne", s.offByOne);
      take("postconditions", s.postconditions);
      for (const auto& t : j.value("tests", json::array())) {
        auto tid = t.at("id").get<std::string>();
        s.tests.push_back({CandidateProgram::fixture(tid, id + "/tests", detail::table_of(t.at("table"))),
                           detail::args_of(t.at("args"))});
      }
      e.samples = std::move(s);
    }
    return e;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("manifest entry: ") + ex.what());
  }
}

/// Reads a manifest; blank lines and lines starting with '#' are skipped.
inline std::vector<ProblemEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  std::vector<ProblemEntry> out;
  std::size_t lineNo = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineNo;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(parse_problem(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineNo) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

inline json rational_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  return std::to_string(r->numerator()) + "/" + std::to_string(r->denominator());
}

/// {"problem", "strategy", "selected", "class", "representative", "score",
///  "reason", "scheme", "correct"}; "class"/"representative"/"correct" are
/// null on abstention, "correct" also without a judge.
inline json decision_record(const std::string& problemId, const ConsensusDecision& d, const std::string& scheme,
                            std::optional<bool> correct) {
  json j{{"problem", problemId}, {"strategy", d.strategy}, {"selected", d.selected}};
  j["class"] = d.selected ? json(d.classId) : json(nullptr);
  j["representative"] = d.selected ? json(d.representative) : json(nullptr);
  j["score"] = rational_json(d.score);
  j["reason"] = d.reason;
  j["scheme"] = scheme;
  j["correct"] = correct ? json(*correct) : json(nullptr);
  return j;
}

inline json metrics_record(const std::string& strategy, const AbstentionCounts& c) {
  auto m = metrics(c);
  return {{"strategy", strategy},
          {"n1", c.n1},
          {"n2", c.n2},
          {"n3", c.n3},
          {"n4", c.n4},
          {"n5", c.n5},
          {"reliableAccuracy", rational_json(m.reliableAccuracy)},
          {"overallAccuracy", rational_json(m.overallAccuracy)},
          {"abstentionRate", rational_json(m.abstentionRate)},
          {"precisionAbs", rational_json(m.precisionAbs)},
          {"recallAbs", rational_json(m.recallAbs)},
          {"f1Abs", rational_json(m.f1Abs)}};
}

inline json verdict_record(const VerdictRecord& v) {
  return {{"problem", v.problemId}, {"scheme", v.scheme},   {"program", v.pId},
          {"witness", v.qId},       {"agrees", v.agrees},  {"counterexample", v.counterexample}};
}

inline json cluster_record(const std::string& problemId, const EquivalenceClass& c) {
  return {{"problem", problemId}, {"class", c.id}, {"members", c.members}, {"mass", rational_json(c.mass)}};
}

/// Keys every record of the given kind must carry.
inline const std::vector<std::string>& record_schema(const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> schemas{
      {"decision", {"problem", "strategy", "selected", "class", "representative", "score", "reason", "scheme", "correct"}},
      {"metrics",
       {"strategy", "n1", "n2", "n3", "n4", "n5", "reliableAccuracy", "overallAccuracy", "abstentionRate", "precisionAbs",
        "recallAbs", "f1Abs"}},
      {"verdict", {"problem", "scheme", "program", "witness", "agrees", "counterexample"}},
      {"cluster", {"problem", "class", "members", "mass"}}};
  auto it = schemas.find(kind);
  if (it == schemas.end()) throw ContractViolation("unknown record kind '" + kind + "'");
  return it->second;
}

inline bool conforms_to_schema(const json& record, const std::string& kind) {
  const auto& keys = record_schema(kind);
  if (!record.is_object() || record.size() != keys.size()) return false;
  for (const auto& k : keys) {
    if (!record.contains(k)) return false;
  }
  return true;
}

}  // namespace tri::corpus
