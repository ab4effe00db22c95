#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tri/error.hpp"
#include "tri/value.hpp"

namespace tri {

/// A program hosted by an external worker speaking the wire protocol.
/// The worker is launched as `command... sourcePath entrypoint`.
struct RunnerEndpoint {
  std::vector<std::string> command;
  std::string sourcePath;
  std::string entrypoint;
};

/// Lookup table keyed by args_key(args).
struct FixtureTable {
  std::unordered_map<std::string, Value> entries;

  void set(std::span<const Value> args, Value out) { entries.insert_or_assign(args_key(args), std::move(out)); }
};

class CandidateProgram;

/// Runs another candidate; used by derived candidates.
using Invoke = std::function<Value(const CandidateProgram&, const std::vector<Value>&)>;

/// A candidate computed from other candidates (stream lifting, union
/// composition, output offsets). Exceptions thrown by `fn` become Demonic.
struct DerivedProgram {
  std::string description;
  std::function<Value(const std::vector<Value>& args, const Invoke& invoke)> fn;
};

class CandidateProgram {
 public:
  using Backend = std::variant<RunnerEndpoint, std::shared_ptr<const FixtureTable>, std::shared_ptr<const DerivedProgram>>;

  CandidateProgram(std::string id, std::string problemId, Backend backend)
      : id_(std::move(id)), problemId_(std::move(problemId)), backend_(std::move(backend)) {}

  static CandidateProgram fixture(std::string id, std::string problemId, FixtureTable table) {
    return {std::move(id), std::move(problemId), std::make_shared<const FixtureTable>(std::move(table))};
  }
  static CandidateProgram runner(std::string id, std::string problemId, RunnerEndpoint endpoint) {
    return {std::move(id), std::move(problemId), std::move(endpoint)};
  }
  static CandidateProgram derived(std::string id, std::string problemId, DerivedProgram program) {
    return {std::move(id), std::move(problemId), std::make_shared<const DerivedProgram>(std::move(program))};
  }

  const std::string& id() const { return id_; }
  const std::string& problem_id() const { return problemId_; }
  const Backend& backend() const { return backend_; }

  bool is_fixture() const { return std::holds_alternative<std::shared_ptr<const FixtureTable>>(backend_); }
  bool is_runner() const { return std::holds_alternative<RunnerEndpoint>(backend_); }
  bool is_derived() const { return std::holds_alternative<std::shared_ptr<const DerivedProgram>>(backend_); }

  const FixtureTable& table() const { return *std::get<std::shared_ptr<const FixtureTable>>(backend_); }
  const RunnerEndpoint& endpoint() const { return std::get<RunnerEndpoint>(backend_); }
  const DerivedProgram& derived_program() const { return *std::get<std::shared_ptr<const DerivedProgram>>(backend_); }

 private:
  std::string id_;
  std::string problemId_;
  Backend backend_;
};

/// Candidates addressable by id, as referenced from property terms.
class CandidateTable {
 public:
  CandidateTable() = default;
  explicit CandidateTable(const std::vector<CandidateProgram>& cs) {
    for (const auto& c : cs) add(c);
  }

  void add(const CandidateProgram& c) { table_.insert_or_assign(c.id(), c); }

  const CandidateProgram& get(const std::string& id) const {
    auto it = table_.find(id);
    if (it == table_.end()) throw EvalError("unknown candidate '" + id + "'");
    return it->second;
  }

  bool contains(const std::string& id) const { return table_.count(id) != 0; }

 private:
  std::unordered_map<std::string, CandidateProgram> table_;
};

}  // namespace tri
