#pragma once

// The bundled toy problems, written as manifest entries. Every sample is a
// behaviour table computed here from a small reference function, so the
// corpus file, the unit tests and the acceptance checks all share one
// source of truth.
//
//   pick   (s, t) -> Optional[str]   fill '?' so that t is a subsequence
//   near   i -> int                   any of i+1, i+2 (inexact)
//   inc    x -> int                   x+1, with every baseline's witnesses
//   lost   x -> int                   nothing sampled is correct
//   twice  list[int] -> list[int]     stream problem, doubles every element

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "tri/corpus.hpp"
#include "tri/wire.hpp"

namespace tri::testing::toy {

using json = nlohmann::json;

inline json args_json(const Args& a) {
  json arr = json::array();
  for (const auto& v : a) arr.push_back(to_wire(v));
  return arr;
}

inline json table_json(const std::vector<Args>& domain, const Fn& fn) {
  json rows = json::array();
  for (const auto& a : domain) rows.push_back(json::array({args_json(a), to_wire(fn(a))}));
  return rows;
}

inline json program(const std::string& id, std::size_t count, const std::vector<Args>& domain, const Fn& fn) {
  return {{"id", id}, {"count", count}, {"table", table_json(domain, fn)}};
}

inline json judge_json(const std::vector<Args>& domain, const std::function<std::vector<Value>(const Args&)>& ok) {
  json rows = json::array();
  for (const auto& a : domain) {
    json outs = json::array();
    for (const auto& v : ok(a)) outs.push_back(to_wire(v));
    rows.push_back(json::array({args_json(a), outs}));
  }
  return rows;
}

inline json inputs_json(const std::vector<Args>& domain) {
  json arr = json::array();
  for (const auto& a : domain) arr.push_back(args_json(a));
  return arr;
}

inline std::vector<Args> ints(long long lo, long long hi) { return int_range(lo, hi); }

inline Value ints_set(std::initializer_list<long long> xs) { return full(xs); }

// ---------------------------------------------------------------------------
// pick

namespace pick {

inline std::vector<std::string> words(const std::string& alphabet, std::size_t maxLen) {
  std::vector<std::string> out{""};
  std::vector<std::string> all;
  for (std::size_t len = 1; len <= maxLen; ++len) {
    std::vector<std::string> next;
    for (const auto& w : out) {
      for (char c : alphabet) next.push_back(w + c);
    }
    all.insert(all.end(), next.begin(), next.end());
    out = std::move(next);
  }
  return all;
}

inline const std::vector<std::string>& patterns() {
  static const auto w = words("ab?", 3);
  return w;
}
inline const std::vector<std::string>& targets() {
  static const auto w = words("ab", 3);
  return w;
}

inline bool is_subsequence(const std::string& t, const std::string& o) {
  std::size_t j = 0;
  for (char c : o) {
    if (j < t.size() && c == t[j]) ++j;
  }
  return j == t.size();
}

inline std::vector<std::string> completions(const std::string& s) {
  std::vector<std::string> out{""};
  for (char c : s) {
    std::vector<std::string> next;
    for (const auto& w : out) {
      if (c == '?') {
        next.push_back(w + 'a');
        next.push_back(w + 'b');
      } else {
        next.push_back(w + c);
      }
    }
    out = std::move(next);
  }
  return out;
}

inline std::vector<std::string> valid(const std::string& s, const std::string& t) {
  std::vector<std::string> out;
  for (const auto& o : completions(s)) {
    if (is_subsequence(t, o)) out.push_back(o);
  }
  return out;
}

/// Greedy filling; `fill` replaces '?' left over once t is matched (0 keeps it).
inline std::optional<std::string> greedy(const std::string& s, const std::string& t, char fill, bool literalsMatch = true,
                                         bool checkDone = true) {
  std::string o = s;
  std::size_t j = 0;
  for (auto& c : o) {
    if (c == '?') {
      if (j < t.size()) c = t[j++];
      else if (fill) c = fill;
    } else if (literalsMatch && j < t.size() && c == t[j]) {
      ++j;
    }
  }
  if (checkDone && j < t.size()) return std::nullopt;
  return o;
}

inline Value opt(const std::optional<std::string>& o) { return o ? S(*o) : Value::none(); }

inline std::vector<Args> inputs() {
  std::vector<Args> out;
  for (const auto& s : patterns()) {
    for (const auto& t : targets()) out.push_back({S(s), S(t)});
  }
  return out;
}

inline Value enumerate(const std::vector<std::string>& os) {
  if (os.empty()) return Value::full_set({Value::none()});
  std::vector<Value> vs;
  for (const auto& o : os) vs.push_back(S(o));
  return Value::full_set(std::move(vs));
}

inline std::vector<std::string> subsequences(const std::string& o) {
  std::set<std::string> out;
  for (unsigned mask = 1; mask < (1u << o.size()); ++mask) {
    std::string w;
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (mask >> k & 1) w += o[k];
    }
    out.insert(w);
  }
  return {out.begin(), out.end()};
}

inline Value str_set(const std::vector<std::string>& xs, SetKind kind = SetKind::Full) {
  std::vector<Value> vs;
  for (const auto& x : xs) vs.push_back(S(x));
  return Value::make_set(kind, std::move(vs));
}

inline json entry() {
  const auto in = inputs();
  auto fwd = [&](const std::string& id, std::size_t n, auto f) {
    return program(id, n, in, [f](const Args& a) { return opt(f(a[0].as_str(), a[1].as_str())); });
  };
  json forward = json::array({
      // correct, leftover '?' become 'a' / 'b'
      fwd("p2", 7, [](const std::string& s, const std::string& t) { return greedy(s, t, 'a'); }),
      fwd("p2b", 7, [](const std::string& s, const std::string& t) { return greedy(s, t, 'b'); }),
      // only '?' consume t, then a subsequence check
      fwd("p1", 23,
          [](const std::string& s, const std::string& t) -> std::optional<std::string> {
            auto o = greedy(s, t, 'a', false, false);
            if (!is_subsequence(t, *o)) return std::nullopt;
            return o;
          }),
      fwd("p3", 22,
          [](const std::string& s, const std::string&) -> std::optional<std::string> {
            std::string o = s;
            std::replace(o.begin(), o.end(), '?', 'a');
            return o;
          }),
      fwd("p4", 20, [](const std::string& s, const std::string& t) { return greedy(s, t, 'a', true, false); }),
      fwd("p5", 18, [](const std::string& s, const std::string& t) { return greedy(s, t, 0); }),
      fwd("p6", 3, [](const std::string&, const std::string&) { return std::optional<std::string>(); }),
  });

  auto enumr = [&](const std::string& id, std::size_t n, auto f) {
    return program(id, n, in, [f](const Args& a) { return f(a[0].as_str(), a[1].as_str()); });
  };
  json enumerators = json::array({
      enumr("e1", 6, [](const std::string& s, const std::string& t) { return enumerate(valid(s, t)); }),
      // every completion whenever one is valid
      enumr("e2", 2,
            [](const std::string& s, const std::string& t) {
              return valid(s, t).empty() ? enumerate({}) : enumerate(completions(s));
            }),
      // only the greedy answer
      enumr("e3", 2,
            [](const std::string& s, const std::string& t) {
              auto o = greedy(s, t, 'a');
              return o ? enumerate({*o}) : enumerate({});
            }),
  });

  // set-valued inverse w.r.t. t, split on the Optional constructor
  std::vector<Args> someDomain;
  for (const auto& o : patterns()) {
    for (const auto& s : patterns()) someDomain.push_back({S(o), S(s)});
  }
  std::vector<Args> noneDomain;
  for (const auto& s : patterns()) noneDomain.push_back({S(s)});
  auto completes = [](const std::string& o, const std::string& s) {
    auto cs = completions(s);
    return std::find(cs.begin(), cs.end(), o) != cs.end();
  };
  // t of any length could be impossible, so only a sub-enumeration is returned
  Fn none = [](const Args& a) {
    std::vector<std::string> ts;
    for (const auto& t : targets()) {
      if (valid(a[0].as_str(), t).empty()) ts.push_back(t);
    }
    return str_set(ts, SetKind::Subset);
  };
  auto sinv = [&](const std::string& id, std::size_t n, Fn some) {
    return json{{"id", id},
                {"count", n},
                {"branches", {{"some", table_json(someDomain, some)}, {"none", table_json(noneDomain, none)}}}};
  };
  json sinvs = json::array({
      sinv("q1", 5,
           [&](const Args& a) {
             const auto& o = a[0].as_str();
             return completes(o, a[1].as_str()) ? str_set(subsequences(o)) : str_set({});
           }),
      sinv("q2", 3,
           [&](const Args& a) {
             const auto& o = a[0].as_str();
             return completes(o, a[1].as_str()) ? str_set({o}) : str_set({});
           }),
  });

  json j{{"id", "pick"},
         {"text",
          "Given a pattern s over the letters a, b and '?' and a word t over a and b, replace every '?' in s "
          "with a or b so that t becomes a subsequence of s. Return the resulting string, or None if it is "
          "impossible."},
         {"signature", {{"name", "pick"}, {"params", json::array({json::array({"s", "str"}), json::array({"t", "str"})})}, {"returns", "Optional[str]"}}},
         {"invertArg", 1},
         {"inputs", inputs_json(in)},
         {"judge", judge_json(in,
                              [](const Args& a) {
                                std::vector<Value> ok;
                                for (const auto& o : valid(a[0].as_str(), a[1].as_str())) ok.push_back(S(o));
                                if (ok.empty()) ok.push_back(Value::none());
                                return ok;
                              })},
         {"candidates", {{"forward", forward}, {"enumerators", enumerators}, {"sinvs", sinvs}}}};
  return j;
}

}  // namespace pick

// ---------------------------------------------------------------------------

inline json near_entry() {
  const auto in = ints(-10, 10);
  const auto wide = ints(-12, 14);
  auto lin = [](long long d) { return [d](const Args& a) { return Value::integer(a[0].as_int() + d); }; };
  auto set_of = [](std::vector<long long> ds) {
    return [ds](const Args& a) {
      std::vector<Value> vs;
      for (auto d : ds) vs.push_back(Value::integer(a[0].as_int() + d));
      return Value::full_set(std::move(vs));
    };
  };
  return {{"id", "near"},
          {"text", "Return any integer that exceeds i by one or by two."},
          {"signature", {{"name", "near"}, {"params", json::array({json::array({"i", "int"})})}, {"returns", "int"}}},
          {"inputs", inputs_json(in)},
          {"judge", judge_json(in,
                               [](const Args& a) {
                                 return std::vector<Value>{Value::integer(a[0].as_int() + 1),
                                                           Value::integer(a[0].as_int() + 2)};
                               })},
          {"candidates",
           {{"forward", {program("a", 10, wide, lin(1)), program("b", 8, wide, lin(2)), program("c", 12, wide, lin(0))}},
            {"enumerators", {program("e1", 6, wide, set_of({1, 2})), program("e2", 4, wide, set_of({1}))}},
            {"sinvs", {program("q1", 5, wide, set_of({-1, -2})), program("q2", 2, wide, set_of({-1}))}}}}};
}

inline json inc_entry() {
  const auto in = ints(-10, 10);
  auto lin = [](long long d) { return [d](const Args& a) { return Value::integer(a[0].as_int() + d); }; };
  std::vector<Args> outs;
  for (long long o = -25; o <= 25; ++o) outs.push_back({I(o)});
  std::vector<Args> pairs;
  for (long long x = -10; x <= 10; ++x) {
    for (long long o = -25; o <= 25; ++o) pairs.push_back({I(x), I(o)});
  }
  auto check = [&](const std::string& id, long long arg, long long expect) {
    return json{{"id", id},
                {"args", json::array({arg})},
                {"table", table_json(outs, [expect](const Args& a) { return B(a[0].as_int() == expect); })}};
  };
  return {{"id", "inc"},
          {"text", "Return x plus one."},
          {"signature", {{"name", "inc"}, {"params", json::array({json::array({"x", "int"})})}, {"returns", "int"}}},
          {"inputs", inputs_json(in)},
          {"judge", judge_json(in, [](const Args& a) { return std::vector<Value>{Value::integer(a[0].as_int() + 1)}; })},
          {"candidates",
           {{"forward", {program("a", 12, in, lin(1)), program("c", 18, in, lin(2))}},
            {"inverses", {program("r1", 10, ints(-12, 14), lin(-1)), program("r2", 5, ints(-12, 14), lin(-2))}},
            {"syntactic", {program("s1", 7, in, lin(1)), program("s2", 3, in, lin(2))}},
            {"offByOne", {program("o1", 7, in, lin(2)), program("o2", 3, in, lin(3))}},
            {"postconditions",
             {program("post1", 3, pairs, [](const Args& a) { return B(a[1].as_int() == a[0].as_int() + 1); }),
              program("post2", 1, pairs, [](const Args& a) { return B(a[1].as_int() > a[0].as_int()); })}}}},
          {"tests", {check("t1", 3, 4), check("t2", 0, 1), check("t3", 5, 7)}}};
}

inline json lost_entry() {
  const auto in = ints(-5, 5);
  return {{"id", "lost"},
          {"text", "Return the seventh predecessor of x."},
          {"signature", {{"name", "lost"}, {"params", json::array({json::array({"x", "int"})})}, {"returns", "int"}}},
          {"inputs", inputs_json(in)},
          {"judge", judge_json(in, [](const Args& a) { return std::vector<Value>{Value::integer(a[0].as_int() - 7)}; })},
          {"candidates",
           {{"forward",
             {program("u1", 10, in, [](const Args& a) { return Value::integer(a[0].as_int() * 3); }),
              program("u2", 10, in, [](const Args& a) { return Value::integer(a[0].as_int() * a[0].as_int()); }),
              program("u3", 10, in, [](const Args& a) { return Value::integer(-a[0].as_int()); })}},
            {"inverses",
             {program("r1", 5, ints(-15, 25), [](const Args& a) { return Value::integer(a[0].as_int() + 5); })}}}}};
}

inline json twice_entry() {
  const std::vector<std::vector<long long>> lists{{1}, {-2, 3}, {0, 1, 2}, {3, -3}, {2, 2, -1}, {-1}};
  std::vector<Args> in;
  for (const auto& l : lists) {
    std::vector<Value> xs;
    for (auto x : l) xs.push_back(I(x));
    in.push_back({Value::seq(xs)});
  }
  std::vector<Args> domain = in;
  for (long long x = -3; x <= 3; ++x) domain.push_back({Value::seq({I(x)})});
  auto doubled = [](const Args& a) {
    std::vector<Value> out;
    for (const auto& x : a[0].as_seq()) out.push_back(Value::integer(x.as_int() * 2));
    return Value::seq(std::move(out));
  };
  auto prefix = [](const Args& a) {
    std::vector<Value> out;
    BigInt acc = 0;
    for (const auto& x : a[0].as_seq()) out.push_back(Value::integer(acc += x.as_int()));
    return Value::seq(std::move(out));
  };
  auto halve = [](const Args& a) {
    const BigInt& o = a[0].as_int();
    return o % 2 == 0 ? Value::integer(o / 2) : Value::undefined();
  };
  return {{"id", "twice"},
          {"text", "Double every element of the list."},
          {"signature", {{"name", "twice"}, {"params", json::array({json::array({"xs", "list[int]"})})}, {"returns", "list[int]"}}},
          {"stream", true},
          {"inputs", inputs_json(in)},
          {"judge", judge_json(in, [&](const Args& a) { return std::vector<Value>{doubled(a)}; })},
          {"candidates",
           {{"forward", {program("d1", 8, domain, doubled), program("d2", 12, domain, prefix)}},
            {"inverses", {program("h1", 5, ints(-6, 6), halve)}}}}};
}

inline std::vector<json> corpus() {
  return {pick::entry(), near_entry(), inc_entry(), lost_entry(), twice_entry()};
}

inline corpus::ProblemEntry load(const json& j) { return corpus::parse_problem(j); }

/// Pipeline samples of a fixture problem.
inline PipelineSamples samples_of(const corpus::ProblemEntry& e) {
  const auto& s = *e.samples;
  return {s.forward, s.enumerators, s.sinvs, s.inverses, e.invertArg, e.stream};
}

}  // namespace tri::testing::toy
