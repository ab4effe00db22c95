#pragma once

// Shared helpers for building fixture-backed candidates and random values.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tri/candidate.hpp"
#include "tri/problem.hpp"
#include "tri/value.hpp"

namespace tri::testing {

using Args = std::vector<Value>;
using Fn = std::function<Value(const Args&)>;

inline Value I(long long i) { return Value::integer(i); }
inline Value S(std::string s) { return Value::str(std::move(s)); }
inline Value B(bool b) { return Value::boolean(b); }

inline Value full(std::initializer_list<long long> xs) {
  std::vector<Value> out;
  for (auto x : xs) out.push_back(I(x));
  return Value::full_set(std::move(out));
}

inline Value sub(std::initializer_list<long long> xs) {
  std::vector<Value> out;
  for (auto x : xs) out.push_back(I(x));
  return Value::subset(std::move(out));
}

/// Tabulates `fn` on every argument tuple in `domain`.
inline CandidateProgram tabulate(std::string id, std::string problemId, const std::vector<Args>& domain, const Fn& fn) {
  FixtureTable t;
  for (const auto& a : domain) t.set(a, fn(a));
  return CandidateProgram::fixture(std::move(id), std::move(problemId), std::move(t));
}

inline std::vector<Args> int_range(long long lo, long long hi) {
  std::vector<Args> out;
  for (long long i = lo; i <= hi; ++i) out.push_back({I(i)});
  return out;
}

/// Random normal values (including full sets) up to a nesting depth.
class ValueGen {
 public:
  explicit ValueGen(std::uint64_t seed) : rng_(seed) {}

  Value scalar() {
    switch (pick(4)) {
      case 0: return Value::none();
      case 1: return B(pick(2) == 1);
      case 2: {
        if (pick(10) == 0) return Value::integer(BigInt("123456789012345678901234567890") * (pick(2) ? 1 : -1) + pick(100));
        return I(static_cast<long long>(pick(41)) - 20);
      }
      default: {
        std::string s;
        for (std::size_t n = pick(4); n > 0; --n) s += static_cast<char>('a' + pick(3));
        return S(s);
      }
    }
  }

  Value value(int depth = 3) {
    if (depth == 0 || pick(3) == 0) return scalar();
    auto items = [&] {
      std::vector<Value> xs;
      for (std::size_t n = pick(4); n > 0; --n) xs.push_back(value(depth - 1));
      return xs;
    };
    switch (pick(4)) {
      case 0: return Value::seq(items());
      case 1: return Value::tuple(items());
      case 2: return Value::full_set(items());
      default: {
        std::vector<std::pair<std::string, Value>> es;
        for (char k : {'k', 'l', 'm'}) {
          if (pick(2)) es.emplace_back(std::string(1, k), value(depth - 1));
        }
        return Value::map(std::move(es));
      }
    }
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace tri::testing
