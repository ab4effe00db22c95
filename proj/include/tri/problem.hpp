#pragma once

#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tri/error.hpp"
#include "tri/types.hpp"
#include "tri/value.hpp"

namespace tri {

struct Param {
  std::string name;
  TypeTag type;

  friend bool operator==(const Param&, const Param&) = default;
};

struct FunctionSignature {
  std::string name;
  std::vector<Param> params;
  TypeTag returns;

  std::size_t arity() const { return params.size(); }

  /// Throws ContractViolation unless params is non-empty with unique names.
  void validate() const {
    if (params.empty()) throw ContractViolation("signature '" + name + "' has no parameters");
    std::set<std::string> seen;
    for (const auto& p : params) {
      if (!seen.insert(p.name).second) throw ContractViolation("duplicate parameter name '" + p.name + "'");
    }
  }

  /// Parameter and return types only; names ignored.
  bool same_shape(const FunctionSignature& other) const {
    if (params.size() != other.params.size() || !(returns == other.returns)) return false;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!(params[i].type == other.params[i].type)) return false;
    }
    return true;
  }

  friend bool operator==(const FunctionSignature&, const FunctionSignature&) = default;
};

inline std::string to_string(const FunctionSignature& s) {
  std::string out = "def " + s.name + "(";
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    if (i) out += ", ";
    out += s.params[i].name + ": " + to_string(s.params[i].type);
  }
  return out + ") -> " + to_string(s.returns);
}

namespace role {
struct Original {};
struct Inverse {};
struct PartialInverse {
  std::size_t argIndex;
};
struct SetValuedInverse {
  std::size_t argIndex;
};
struct Enumeration {};
struct Pointwise {};
struct UnionBranch {
  std::string constructorTag;
};
}  // namespace role

using ProblemRole = std::variant<role::Original, role::Inverse, role::PartialInverse, role::SetValuedInverse,
                                 role::Enumeration, role::Pointwise, role::UnionBranch>;

inline std::string role_name(const ProblemRole& r) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, role::Original>) return "original";
        else if constexpr (std::is_same_v<T, role::Inverse>) return "inverse";
        else if constexpr (std::is_same_v<T, role::PartialInverse>) return "partial-inverse(" + std::to_string(x.argIndex) + ")";
        else if constexpr (std::is_same_v<T, role::SetValuedInverse>) return "set-valued-inverse(" + std::to_string(x.argIndex) + ")";
        else if constexpr (std::is_same_v<T, role::Enumeration>) return "enumeration";
        else if constexpr (std::is_same_v<T, role::Pointwise>) return "pointwise";
        else return "union-branch(" + x.constructorTag + ")";
      },
      r);
}

struct ProblemDescription {
  std::string id;
  std::string text;
  FunctionSignature signature;
  ProblemRole role = role::Original{};
};

// ---------------------------------------------------------------------------
// Mechanical signature transformations. The inverted output always becomes
// the first parameter of the transformed function, named "result".

namespace detail {
inline std::string fresh_name(const std::vector<Param>& params, std::string base) {
  auto taken = [&](const std::string& n) {
    return std::any_of(params.begin(), params.end(), [&](const Param& p) { return p.name == n; });
  };
  while (taken(base)) base += "_";
  return base;
}

inline void check_arg(const FunctionSignature& s, std::size_t argIndex) {
  if (argIndex >= s.arity()) {
    throw ContractViolation("argument index " + std::to_string(argIndex) + " out of range for '" + s.name + "'");
  }
}

inline TypeTag params_type(const FunctionSignature& s) {
  if (s.arity() == 1) return s.params[0].type;
  std::vector<TypeTag> ts;
  for (const auto& p : s.params) ts.push_back(p.type);
  return TypeTag::tuple(std::move(ts));
}
}  // namespace detail

/// (x1..xn) -> o   becomes   (result: o) -> x  (a tuple when n > 1).
inline FunctionSignature inverse_signature(const FunctionSignature& s) {
  s.validate();
  return {s.name + "_inv", {{"result", s.returns}}, detail::params_type(s)};
}

/// Inverse w.r.t. parameter j: (result: o, other params...) -> x_j.
inline FunctionSignature partial_inverse_signature(const FunctionSignature& s, std::size_t j) {
  s.validate();
  detail::check_arg(s, j);
  if (s.arity() < 2) throw ContractViolation("partial inverse needs at least two parameters");
  std::vector<Param> rest;
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (i != j) rest.push_back(s.params[i]);
  }
  std::vector<Param> params{{detail::fresh_name(rest, "result"), s.returns}};
  params.insert(params.end(), rest.begin(), rest.end());
  return {s.name + "_pinv", std::move(params), s.params[j].type};
}

/// Set-valued inverse; partial (w.r.t. j) when the signature has several parameters.
inline FunctionSignature set_valued_inverse_signature(const FunctionSignature& s, std::size_t j) {
  s.validate();
  detail::check_arg(s, j);
  if (s.arity() == 1) return {s.name + "_sinv", {{"result", s.returns}}, TypeTag::set(s.params[0].type)};
  auto inv = partial_inverse_signature(s, j);
  inv.name = s.name + "_sinv";
  inv.returns = TypeTag::set(inv.returns);
  return inv;
}

inline FunctionSignature enumeration_signature(const FunctionSignature& s) {
  s.validate();
  return {s.name + "_enum", s.params, TypeTag::set(s.returns)};
}

/// list[X] -> list[Y]   becomes   X -> Y. Tuple elements are unpacked into
/// separate parameters, matching how stream inputs are flattened.
inline FunctionSignature pointwise_signature(const FunctionSignature& s) {
  s.validate();
  if (s.arity() != 1 || s.params[0].type.kind != TypeTag::Kind::List || s.returns.kind != TypeTag::Kind::List) {
    throw ContractViolation("pointwise transformation needs a list[X] -> list[Y] signature");
  }
  const TypeTag& item = s.params[0].type.args[0];
  std::vector<Param> params;
  if (item.kind == TypeTag::Kind::Tuple) {
    for (std::size_t i = 0; i < item.args.size(); ++i) {
      params.push_back({s.params[0].name + "_" + std::to_string(i), item.args[i]});
    }
  } else {
    params.push_back({s.params[0].name + "_item", item});
  }
  return {s.name + "_pointwise", std::move(params), s.returns.args[0]};
}

/// One forward signature per disjunct of a union return type.
inline std::vector<std::pair<std::string, FunctionSignature>> union_split_signatures(const FunctionSignature& s) {
  s.validate();
  if (!s.returns.is_union()) throw ContractViolation("union split needs a union return type");
  auto tags = union_tags(s.returns);
  std::vector<std::pair<std::string, FunctionSignature>> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    out.emplace_back(tags[i], FunctionSignature{s.name + "_" + tags[i], s.params, s.returns.args[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------

enum class InputProvenance { LlmGenerated, Fixture };

/// Shared argument tuples for one problem; non-empty and deduplicated
/// under canonical encoding (first occurrence wins).
class TestInputSet {
 public:
  TestInputSet(std::string problemId, std::vector<std::vector<Value>> inputs,
               InputProvenance provenance = InputProvenance::Fixture)
      : problemId_(std::move(problemId)), provenance_(provenance) {
    std::unordered_set<std::string> seen;
    for (auto& args : inputs) {
      for (const auto& a : args) {
        if (a.contains_special_or_subset()) throw ContractViolation("test input contains a special value");
      }
      if (seen.insert(args_key(args)).second) inputs_.push_back(std::move(args));
    }
    if (inputs_.empty()) throw ContractViolation("test input set for '" + problemId_ + "' is empty");
  }

  const std::string& problem_id() const { return problemId_; }
  const std::vector<std::vector<Value>>& inputs() const { return inputs_; }
  InputProvenance provenance() const { return provenance_; }
  std::size_t size() const { return inputs_.size(); }
  /// Common argument count, or throws if the tuples disagree.
  std::size_t arity() const {
    std::size_t k = inputs_.front().size();
    for (const auto& a : inputs_) {
      if (a.size() != k) throw ContractViolation("test inputs have inconsistent arity");
    }
    return k;
  }

 private:
  std::string problemId_;
  std::vector<std::vector<Value>> inputs_;
  InputProvenance provenance_;
};

}  // namespace tri
