#pragma once

// Prompt templates. Each template carries a version; bumping the version
// changes every cache key derived from it, so recorded transcripts for an
// older wording are never replayed against a newer one.
//
// Placeholders are written {NAME} and filled by render().

#include <map>
#include <string>
#include <string_view>

#include "tri/error.hpp"

namespace tri::prompts {

struct Template {
  std::string_view id;
  int version;
  std::string_view text;

  std::string key() const { return std::string(id) + "@v" + std::to_string(version); }
};

inline constexpr Template kCodegen{"codegen", 1, R"(Implement the following Python function.

{PROBLEM}

Signature: {SIGN}

Conventions:
- Validate the inputs. If an input is invalid for this problem, raise ValueError.
- If the function returns a set and the complete set is infinite or too large to compute, return subset(values)
  with a tractable part of it; otherwise return full_set(values). Both helpers are predefined.
- Do not read input or print output. Define only the function and any helpers it needs.

Answer with a single ```python code block.)"};

inline constexpr Template kInverse{"inverse", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}.
Rewrite this problem so that it instead requires implementing the inverse function {INV_SIGN}. Given the value
{NEW_ARG} returned by the original function, the new function should return the arguments the original function
was called with. Keep every constraint of the original problem. Answer with the rewritten problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kPartialInverse{"partial-inverse", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}.
Rewrite this problem so that it instead requires implementing the inverse function {INV_SIGN}. Given the desired output
value {NEW_ARG} (corresponding to the original function's return value) and the other parameters unchanged, the new
function should return the value of the parameter {INV_ARG} the original function was called with. Answer with the
rewritten problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kSetValuedInverse{"sinv", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}. Rewrite this problem
so that it instead requires implementing the set-valued inverse function {SINV_SIGN}. Given the desired output
value {NEW_ARG} (corresponding to the original function's return value), the new function should return an
exhaustive list of values for the parameter {INV_ARG} such that if the original function were called with
any of these values (and the other parameters unchanged), it would produce {NEW_ARG} as the result.
Answer with the rewritten problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kEnumeration{"enumeration", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}.
The problem may accept several correct answers for the same input. Rewrite it so that it instead requires implementing
{ENUM_SIGN}, which returns the set of all answers that are correct for the given input. Answer with the rewritten
problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kPointwise{"pointwise", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}, which processes a
sequence of independent items and returns one result per item. Rewrite it so that it requires implementing
{POINT_SIGN}, which processes a single item. Answer with the rewritten problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kUnionBranch{"union-branch", 1, R"(You are given a programming problem that requires implementing the function {ORIG_SIGN}, whose result is one of
several alternatives. Rewrite it so that it requires implementing {BRANCH_SIGN}, which handles only the inputs for which
the original answer is of the "{TAG}" alternative and returns that answer; for every other input it must raise
ValueError. Answer with the rewritten problem statement only.

Problem:
{PROBLEM})"};

inline constexpr Template kChooseInvertArg{"choose-invert-arg", 1, R"(The following problem requires implementing {ORIG_SIGN}.
Which single parameter would be the most natural one to recover from the result and the remaining parameters?
Answer with the parameter name only.

Problem:
{PROBLEM})"};

inline constexpr Template kInputs{"inputs", 1, R"(Write test inputs for the function {SIGN} described below. Cover typical, boundary and invalid cases.
Output one test per line as a JSON array holding the arguments in order, inside a single ```json block.
Integers, strings and booleans are plain JSON; lists are JSON arrays; write a tuple as {"tuple": [...]},
None as {"none": true} and a set as {"set": {"kind": "full", "values": [...]}}.
{AVOID}
Problem:
{PROBLEM})"};

inline constexpr Template kTests{"tests", 1, R"(Write unit tests for the function {SIGN} described below. Write each test as a separate ```python block
whose first line is a comment "# input: " followed by the arguments as a JSON array, and which defines
check(out) returning True exactly when out is a correct result for that input. Use assertions over out instead of
hard-coding a single expected value when several answers are acceptable.

Problem:
{PROBLEM})"};

inline constexpr Template kPostcondition{"postcondition", 1, R"(Write a Hoare-style postcondition for the function {SIGN} described below: a Python function
post({POST_PARAMS}, out) returning True exactly when out is a correct result for those arguments.
Answer with a single ```python code block.

Problem:
{PROBLEM})"};

inline constexpr Template kTranslate{"translate", 1, R"(Translate the following programming problem into Chinese. Keep identifiers, the function signature and all
numbers unchanged. Answer with the translation only.

{PROBLEM})"};

inline constexpr Template kOffByOne{"off-by-one", 1, R"(Rewrite the following programming problem, which requires implementing {SIGN}, so that the required result is
the original result plus one. Keep the signature unchanged. Answer with the rewritten problem statement only.

Problem:
{PROBLEM})"};

/// Substitutes every {NAME}; a placeholder without a binding is an error.
inline std::string render(const Template& t, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::string_view s = t.text;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '{') {
      auto close = s.find('}', i);
      std::string_view name = close == std::string_view::npos ? std::string_view{} : s.substr(i + 1, close - i - 1);
      bool placeholder = !name.empty() && name.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ_") == std::string_view::npos;
      if (placeholder) {
        auto it = vars.find(std::string(name));
        if (it == vars.end()) throw ContractViolation("prompt '" + t.key() + "' needs {" + std::string(name) + "}");
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

}  // namespace tri::prompts
