#pragma once

// Sampling programs, problem transformations, test inputs and baseline
// artifacts from a language model, behind a record/replay transcript cache.
//
// Every request is identified by (prompt id, model, temperature, sample
// index, rendered prompt text). Its key is the SHA-256 of the compact JSON
// object holding those five fields, in hex; a recorded transcript lives at
// <dir>/<key[0:2]>/<key>.json. Replay mode never touches the transport and a
// missing transcript is a GatewayError.

#include <openssl/evp.h>

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tri/candidate.hpp"
#include "tri/error.hpp"
#include "tri/pipeline.hpp"
#include "tri/problem.hpp"
#include "tri/prompts.hpp"
#include "tri/types.hpp"
#include "tri/value.hpp"
#include "tri/wire.hpp"

namespace tri::llm {

namespace fs = std::filesystem;

struct SamplingParams {
  std::size_t n = 30;
  double temperature = 1.0;
  std::string model = "gpt-4o";

  void validate() const {
    if (n == 0) throw ContractViolation("sample count must be at least 1");
    if (!(temperature >= 0)) throw ContractViolation("temperature must be non-negative");
    if (model.empty()) throw ContractViolation("model name is empty");
  }
};

struct Request {
  std::string promptId;
  std::string text;
  std::string model;
  double temperature = 0;
  std::size_t index = 0;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// Temperatures are keyed at millidegree resolution so that 1.0 and 1.0000001
/// do not split the cache.
inline std::string temperature_key(double t) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << t;
  return s.str();
}

inline std::string cache_key(const Request& r) {
  json j{{"index", r.index}, {"model", r.model}, {"prompt", r.text}, {"promptId", r.promptId},
         {"temperature", temperature_key(r.temperature)}};
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------

class Transport {
 public:
  virtual ~Transport() = default;
  /// The completion text; throws GatewayError on provider failure.
  virtual std::string complete(const Request& r) = 0;
};

/// Wraps a function; handy for scripted providers in tests.
class FunctionTransport : public Transport {
 public:
  explicit FunctionTransport(std::function<std::string(const Request&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const Request& r) override { return fn_(r); }

 private:
  std::function<std::string(const Request&)> fn_;
};

/// Counts calls reaching the provider. With no inner transport every call
/// fails, which makes it a tripwire for replay runs.
class CountingTransport : public Transport {
 public:
  explicit CountingTransport(std::shared_ptr<Transport> inner = nullptr) : inner_(std::move(inner)) {}
  std::string complete(const Request& r) override {
    ++calls_;
    if (!inner_) throw GatewayError("no provider configured");
    return inner_->complete(r);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<Transport> inner_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------

struct Transcript {
  std::string key;
  std::string promptId;
  std::string model;
  double temperature = 0;
  std::size_t index = 0;
  std::string request;
  std::string response;
  std::string timestamp;
};

inline json to_json(const Transcript& t) {
  return {{"key", t.key},           {"promptId", t.promptId}, {"model", t.model},      {"temperature", t.temperature},
          {"index", t.index},       {"request", t.request},   {"response", t.response}, {"timestamp", t.timestamp}};
}

inline Transcript transcript_from_json(const json& j) {
  try {
    return {j.at("key").get<std::string>(),      j.at("promptId").get<std::string>(), j.at("model").get<std::string>(),
            j.at("temperature").get<double>(),    j.at("index").get<std::size_t>(),    j.at("request").get<std::string>(),
            j.at("response").get<std::string>(), j.value("timestamp", std::string())};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed transcript: ") + e.what());
  }
}

class TranscriptStore {
 public:
  explicit TranscriptStore(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }
  fs::path path_for(const std::string& key) const { return dir_ / key.substr(0, 2) / (key + ".json"); }

  std::optional<Transcript> load(const std::string& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError("transcript " + path_for(key).string() + ": " + e.what());
    }
    auto t = transcript_from_json(j);
    if (t.key != key) throw FormatError("transcript " + path_for(key).string() + " is filed under the wrong key");
    return t;
  }

  void save(const Transcript& t) {
    std::lock_guard lock(mu_);
    const auto path = path_for(t.key);
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp);
      out << to_json(t).dump(2) << "\n";
    }
    fs::rename(tmp, path);
  }

 private:
  fs::path dir_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------

/// Bodies of the fenced blocks (```lang ... ```) tagged `lang`, untagged, or
/// any tag when `lang` is empty.
inline std::vector<std::string> fenced_blocks(std::string_view text, std::string_view lang = {}) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    const auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) break;
    auto tag = text.substr(pos + 3, eol - pos - 3);
    while (!tag.empty() && (tag.back() == ' ' || tag.back() == '\r' || tag.back() == '\t')) tag.remove_suffix(1);
    const auto end = text.find("```", eol + 1);
    if (end == std::string_view::npos) break;
    if (lang.empty() || tag == lang || tag.empty() || (lang == "python" && tag == "py")) {
      out.emplace_back(text.substr(eol + 1, end - eol - 1));
    }
    pos = end + 3;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Reads a generated value against the declared type: JSON arrays stand for
/// tuples and sets where the type says so. nullopt when the value does not
/// fit the type.
inline std::optional<Value> coerce(const Value& v, const TypeTag& t) {
  using K = TypeTag::Kind;
  if (t.kind == K::Any) return conforms(v, t) ? std::optional<Value>(v) : std::nullopt;
  if (t.kind == K::Union) {
    for (const auto& alt : t.args) {
      if (auto c = coerce(v, alt)) return c;
    }
    return std::nullopt;
  }
  auto items = [&](const Value& x) -> std::optional<std::vector<Value>> {
    if (x.is_seq()) return std::vector<Value>(x.children().begin(), x.children().end());
    if (x.is_tuple() || x.is_set()) return std::vector<Value>(x.children().begin(), x.children().end());
    return std::nullopt;
  };
  switch (t.kind) {
    case K::List: {
      if (!v.is_seq()) return std::nullopt;
      std::vector<Value> out;
      for (const auto& e : v.children()) {
        auto c = coerce(e, t.args[0]);
        if (!c) return std::nullopt;
        out.push_back(std::move(*c));
      }
      return Value::seq(std::move(out));
    }
    case K::Tuple: {
      auto xs = items(v);
      if (!xs || xs->size() != t.args.size() || v.is_set()) return std::nullopt;
      std::vector<Value> out;
      for (std::size_t i = 0; i < xs->size(); ++i) {
        auto c = coerce((*xs)[i], t.args[i]);
        if (!c) return std::nullopt;
        out.push_back(std::move(*c));
      }
      return Value::tuple(std::move(out));
    }
    case K::Set: {
      if (v.is_set() && v.as_set().kind == SetKind::Subset) return std::nullopt;
      auto xs = items(v);
      if (!xs || v.is_tuple()) return std::nullopt;
      std::vector<Value> out;
      for (const auto& e : *xs) {
        auto c = coerce(e, t.args[0]);
        if (!c) return std::nullopt;
        out.push_back(std::move(*c));
      }
      return Value::full_set(std::move(out));
    }
    default: return conforms(v, t) ? std::optional<Value>(v) : std::nullopt;
  }
}

/// Parses one line holding a JSON array of arguments; nullopt when the line
/// is not a well-typed argument list for `sig`.
inline std::optional<std::vector<Value>> parse_input_line(std::string_view line, const FunctionSignature& sig) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!j.is_array() || j.size() != sig.arity()) return std::nullopt;
  std::vector<Value> args;
  for (std::size_t i = 0; i < sig.arity(); ++i) {
    try {
      auto c = coerce(from_wire(j[i]), sig.params[i].type);
      if (!c) return std::nullopt;
      args.push_back(std::move(*c));
    } catch (const FormatError&) {
      return std::nullopt;
    }
  }
  return args;
}

// ---------------------------------------------------------------------------

struct TransformKind {
  enum class Kind {
    Inverse,
    PartialInverse,
    SetValuedInverse,
    Enumeration,
    Pointwise,
    UnionSplit,
    ChooseInvertArg,
    InputGeneration,
    BaselineTests,
    BaselinePostcondition,
    BaselineTranslate,
    BaselineOffByOne
  };
  Kind kind;
  std::size_t argIndex = 0;  // PartialInverse, SetValuedInverse

  static TransformKind of(Kind k, std::size_t arg = 0) { return {k, arg}; }
};

inline std::string to_string(TransformKind::Kind k) {
  using K = TransformKind::Kind;
  switch (k) {
    case K::Inverse: return "inverse";
    case K::PartialInverse: return "partial-inverse";
    case K::SetValuedInverse: return "sinv";
    case K::Enumeration: return "enumeration";
    case K::Pointwise: return "pointwise";
    case K::UnionSplit: return "union-split";
    case K::ChooseInvertArg: return "choose-invert-arg";
    case K::InputGeneration: return "inputs";
    case K::BaselineTests: return "tests";
    case K::BaselinePostcondition: return "postcondition";
    case K::BaselineTranslate: return "translate";
    case K::BaselineOffByOne: return "off-by-one";
  }
  return "?";
}

struct GeneratedInputs {
  TestInputSet inputs;
  std::size_t dropped = 0;  // lines that did not parse or did not fit the signature
  std::size_t batches = 0;
};

struct InputBudget {
  std::size_t maxInputs = 50;
  std::size_t stagnantBatches = 2;  // stop after this many batches adding nothing new
  std::size_t maxBatches = 20;
};

/// Writes generated sources to disk, one file per distinct text, and turns
/// them into runner-backed candidates.
class SourceStore {
 public:
  SourceStore(fs::path dir, std::vector<std::string> command) : dir_(std::move(dir)), command_(std::move(command)) {}

  RunnerEndpoint materialize(const std::string& source, const std::string& entrypoint) const {
    fs::create_directories(dir_);
    auto path = dir_ / (sha256_hex(source).substr(0, 20) + ".py");
    if (!fs::exists(path)) {
      std::ofstream out(path);
      if (!out) throw Error("cannot write " + path.string());
      out << source;
    }
    return {command_, path.string(), entrypoint};
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> command_;
};

struct BaselineArtifacts {
  std::vector<AssertionTest> tests;
  std::vector<CandidateProgram> postconditions;
};

// ---------------------------------------------------------------------------

class Gateway {
 public:
  enum class Mode { Live, Record, Replay };

  struct Options {
    std::size_t retries = 3;
    std::chrono::milliseconds backoff{500};
    std::size_t resamples = 3;  // extra attempts when a response has no code block
    std::size_t maxConcurrent = 8;
  };

  Gateway(Mode mode, std::shared_ptr<Transport> transport, std::optional<fs::path> dir = std::nullopt)
      : Gateway(mode, std::move(transport), std::move(dir), Options{}) {}

  Gateway(Mode mode, std::shared_ptr<Transport> transport, std::optional<fs::path> dir, Options opt)
      : mode_(mode), transport_(std::move(transport)), opt_(opt) {
    if ((mode == Mode::Replay || mode == Mode::Record) && !dir) {
      throw ContractViolation("replay and record modes need a transcript directory");
    }
    if (mode != Mode::Replay && !transport_) throw ContractViolation("live sampling needs a transport");
    if (dir) store_.emplace(*dir);
  }

  Mode mode() const { return mode_; }

  /// One completion, through the cache.
  std::string complete(const Request& r) {
    const auto key = cache_key(r);
    if (store_ && mode_ != Mode::Live) {
      if (auto t = store_->load(key)) return t->response;
      if (mode_ == Mode::Replay) {
        throw GatewayError("replay cache miss for " + r.promptId + " #" + std::to_string(r.index) + " (key " + key + ")");
      }
    }
    std::string response = call_with_retries(r);
    if (mode_ == Mode::Record) {
      store_->save({key, r.promptId, r.model, r.temperature, r.index, r.text, response, now_iso()});
    }
    return response;
  }

  // -- programs -------------------------------------------------------------

  /// Up to params.n program sources. A response without a python block is
  /// resampled (as a separate request) up to Options::resamples times and
  /// then dropped.
  std::vector<std::string> sample_programs(const ProblemDescription& d, const SamplingParams& params) {
    params.validate();
    if (trim(d.text).empty()) throw ContractViolation("problem '" + d.id + "' has an empty description");
    const std::string text = prompts::render(prompts::kCodegen, {{"PROBLEM", d.text}, {"SIGN", to_string(d.signature)}});
    std::vector<std::optional<std::string>> slots(params.n);
    parallel_for(params.n, [&](std::size_t i) {
      for (std::size_t attempt = 0; attempt <= opt_.resamples; ++attempt) {
        std::string pid = prompts::kCodegen.key() + ":" + d.id + (attempt ? "#resample" + std::to_string(attempt) : "");
        auto blocks = fenced_blocks(complete({pid, text, params.model, params.temperature, i}), "python");
        if (!blocks.empty() && !trim(blocks.front()).empty()) {
          slots[i] = blocks.front();
          return;
        }
      }
    });
    std::vector<std::string> out;
    for (auto& s : slots) {
      if (s) out.push_back(std::move(*s));
    }
    return out;
  }

  // -- transformations ------------------------------------------------------

  /// Transformed problem(s); the signature is derived mechanically and only
  /// the statement comes from the model (at temperature 0). UnionSplit yields
  /// one problem per disjunct, everything else exactly one.
  std::vector<ProblemDescription> transform(const ProblemDescription& d, TransformKind kind,
                                            const SamplingParams& params) {
    using K = TransformKind::Kind;
    d.signature.validate();
    const std::string orig = to_string(d.signature);
    auto ask = [&](const prompts::Template& t, std::map<std::string, std::string> vars, const std::string& suffix) {
      vars["PROBLEM"] = d.text;
      vars.emplace("ORIG_SIGN", orig);
      auto text = prompts::render(t, vars);
      auto response = complete({t.key() + ":" + d.id + suffix, text, params.model, 0.0, 0});
      auto blocks = fenced_blocks(response);
      return trim(blocks.size() == 1 && trim(response).rfind("```", 0) == 0 ? blocks.front() : response);
    };
    const auto& sig = d.signature;
    switch (kind.kind) {
      case K::Inverse: {
        auto s = inverse_signature(sig);
        auto text = ask(prompts::kInverse, {{"INV_SIGN", to_string(s)}, {"NEW_ARG", s.params[0].name}}, "");
        return {{d.id + "/inv", text, s, role::Inverse{}}};
      }
      case K::PartialInverse: {
        auto s = partial_inverse_signature(sig, kind.argIndex);
        auto text = ask(prompts::kPartialInverse,
                        {{"INV_SIGN", to_string(s)}, {"NEW_ARG", s.params[0].name}, {"INV_ARG", sig.params[kind.argIndex].name}},
                        "/" + std::to_string(kind.argIndex));
        return {{d.id + "/pinv" + std::to_string(kind.argIndex), text, s, role::PartialInverse{kind.argIndex}}};
      }
      case K::SetValuedInverse: {
        auto s = set_valued_inverse_signature(sig, kind.argIndex);
        auto text = ask(prompts::kSetValuedInverse,
                        {{"SINV_SIGN", to_string(s)}, {"NEW_ARG", s.params[0].name}, {"INV_ARG", sig.params[kind.argIndex].name}},
                        "/" + std::to_string(kind.argIndex));
        return {{d.id + "/sinv" + std::to_string(kind.argIndex), text, s, role::SetValuedInverse{kind.argIndex}}};
      }
      case K::Enumeration: {
        auto s = enumeration_signature(sig);
        auto text = ask(prompts::kEnumeration, {{"ENUM_SIGN", to_string(s)}}, "");
        return {{d.id + "/enum", text, s, role::Enumeration{}}};
      }
      case K::Pointwise: {
        auto s = pointwise_signature(sig);
        auto text = ask(prompts::kPointwise, {{"POINT_SIGN", to_string(s)}}, "");
        return {{d.id + "/pointwise", text, s, role::Pointwise{}}};
      }
      case K::UnionSplit: {
        std::vector<ProblemDescription> out;
        for (auto& [tag, s] : union_split_signatures(sig)) {
          auto text = ask(prompts::kUnionBranch, {{"BRANCH_SIGN", to_string(s)}, {"TAG", tag}}, "/" + tag);
          out.push_back({d.id + "/" + tag, text, s, role::UnionBranch{tag}});
        }
        return out;
      }
      case K::BaselineTranslate: {
        auto text = ask(prompts::kTranslate, {}, "");
        return {{d.id + "/translated", text, sig, role::Original{}}};
      }
      case K::BaselineOffByOne: {
        if (sig.returns.kind != TypeTag::Kind::Int) throw ContractViolation("off-by-one needs an integer result");
        auto text = ask(prompts::kOffByOne, {{"SIGN", orig}}, "");
        return {{d.id + "/plus-one", text, sig, role::Original{}}};
      }
      default:
        throw ContractViolation("'" + to_string(kind.kind) + "' is not a problem transformation");
    }
  }

  /// Index of the parameter to invert; asks the model only when there is a choice.
  std::size_t choose_invert_arg(const ProblemDescription& d, const SamplingParams& params) {
    d.signature.validate();
    if (d.signature.arity() == 1) return 0;
    auto text = prompts::render(prompts::kChooseInvertArg, {{"ORIG_SIGN", to_string(d.signature)}, {"PROBLEM", d.text}});
    auto response = complete({prompts::kChooseInvertArg.key() + ":" + d.id, text, params.model, 0.0, 0});
    std::string answer;
    for (char c : response) {
      if (c != '`' && c != '"' && c != '\'') answer += c;
    }
    answer = trim(answer);
    const auto& ps = d.signature.params;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (answer == ps[i].name) return i;
    }
    // fall back to the first parameter named anywhere in the answer
    std::optional<std::pair<std::size_t, std::size_t>> first;  // (position, index)
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (auto pos = answer.find(ps[i].name); pos != std::string::npos; pos = answer.find(ps[i].name, pos + 1)) {
        auto boundary = [&](std::size_t p) { return p >= answer.size() || !(std::isalnum(static_cast<unsigned char>(answer[p])) || answer[p] == '_'); };
        if ((pos == 0 || boundary(pos - 1)) && boundary(pos + ps[i].name.size())) {
          if (!first || pos < first->first) first = {pos, i};
          break;
        }
      }
    }
    if (!first) throw GatewayError("could not read a parameter name of '" + d.id + "' from: " + trim(response));
    return first->second;
  }

  // -- inputs ---------------------------------------------------------------

  /// Batches of inputs until the budget is reached or `stagnantBatches`
  /// consecutive batches add nothing new.
  GeneratedInputs gen_test_inputs(const ProblemDescription& d, const SamplingParams& params, InputBudget budget = {}) {
    d.signature.validate();
    std::vector<std::vector<Value>> collected;
    std::set<std::string> seen;
    std::size_t dropped = 0, stagnant = 0, batch = 0;
    for (; batch < budget.maxBatches && collected.size() < budget.maxInputs && stagnant < budget.stagnantBatches; ++batch) {
      std::string avoid;
      if (!collected.empty()) {
        avoid = "These inputs are already covered; propose different ones:\n";
        for (const auto& a : collected) {
          json arr = json::array();
          for (const auto& v : a) arr.push_back(to_wire(v));
          avoid += arr.dump() + "\n";
        }
      }
      auto text = prompts::render(prompts::kInputs, {{"SIGN", to_string(d.signature)}, {"PROBLEM", d.text}, {"AVOID", avoid}});
      auto response = complete({prompts::kInputs.key() + ":" + d.id, text, params.model, params.temperature, batch});
      auto blocks = fenced_blocks(response, "json");
      std::string body = blocks.empty() ? response : blocks.front();
      std::size_t added = 0;
      std::istringstream lines(body);
      for (std::string line; std::getline(lines, line);) {
        line = trim(line);
        if (line.empty()) continue;
        auto args = parse_input_line(line, d.signature);
        if (!args) {
          ++dropped;
          continue;
        }
        if (collected.size() < budget.maxInputs && seen.insert(args_key(*args)).second) {
          collected.push_back(std::move(*args));
          ++added;
        }
      }
      stagnant = added == 0 ? stagnant + 1 : 0;
    }
    if (collected.empty()) throw GatewayError("no valid test inputs for '" + d.id + "'");
    return {TestInputSet(d.id, std::move(collected), InputProvenance::LlmGenerated), dropped, batch};
  }

  // -- baselines ------------------------------------------------------------

  BaselineArtifacts gen_baseline_artifacts(const ProblemDescription& d, TransformKind kind, const SamplingParams& params,
                                           const SourceStore& sources) {
    using K = TransformKind::Kind;
    params.validate();
    d.signature.validate();
    BaselineArtifacts out;
    if (kind.kind == K::BaselineTests) {
      auto text = prompts::render(prompts::kTests, {{"SIGN", to_string(d.signature)}, {"PROBLEM", d.text}});
      std::set<std::string> seen;
      for (std::size_t i = 0; i < params.n; ++i) {
        auto response = complete({prompts::kTests.key() + ":" + d.id, text, params.model, params.temperature, i});
        for (const auto& block : fenced_blocks(response, "python")) {
          auto args = test_input(block, d.signature);
          if (!args || !seen.insert(block).second) continue;
          auto ep = sources.materialize(block, "check");
          std::string id = d.id + "/test" + std::to_string(out.tests.size());
          out.tests.push_back({CandidateProgram::runner(id, d.id + "/tests", ep), std::move(*args)});
        }
      }
      return out;
    }
    if (kind.kind == K::BaselinePostcondition) {
      std::string params_list;
      for (const auto& p : d.signature.params) params_list += (params_list.empty() ? "" : ", ") + p.name;
      auto text = prompts::render(prompts::kPostcondition,
                                  {{"SIGN", to_string(d.signature)}, {"POST_PARAMS", params_list}, {"PROBLEM", d.text}});
      for (std::size_t i = 0; i < params.n; ++i) {
        auto blocks = fenced_blocks(
            complete({prompts::kPostcondition.key() + ":" + d.id, text, params.model, params.temperature, i}), "python");
        if (blocks.empty()) continue;
        auto ep = sources.materialize(blocks.front(), "post");
        out.postconditions.push_back(
            CandidateProgram::runner(d.id + "/post" + std::to_string(i), d.id + "/postconditions", ep));
      }
      return out;
    }
    throw ContractViolation("'" + to_string(kind.kind) + "' is not a baseline artifact kind");
  }

 private:
  static std::optional<std::vector<Value>> test_input(const std::string& block, const FunctionSignature& sig) {
    std::istringstream in(block);
    std::string first;
    std::getline(in, first);
    first = trim(first);
    const std::string marker = "# input:";
    if (first.rfind(marker, 0) != 0) return std::nullopt;
    return parse_input_line(trim(first.substr(marker.size())), sig);
  }

  std::string call_with_retries(const Request& r) {
    std::string last;
    for (std::size_t attempt = 0; attempt <= opt_.retries; ++attempt) {
      if (attempt) std::this_thread::sleep_for(opt_.backoff * (1 << (attempt - 1)));
      try {
        return transport_->complete(r);
      } catch (const GatewayError& e) {
        last = e.what();
      }
    }
    throw GatewayError("provider failed after " + std::to_string(opt_.retries + 1) + " attempts: " + last);
  }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t threads = mode_ == Mode::Replay ? 1 : std::min(opt_.maxConcurrent, n);
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
  }

  static std::string now_iso() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  Mode mode_;
  std::shared_ptr<Transport> transport_;
  Options opt_;
  std::optional<TranscriptStore> store_;
};

}  // namespace tri::llm
