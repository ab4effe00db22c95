#pragma once

// Universal runtime value exchanged with candidate programs.
//
// A Value is either a normal datum (none, bool, big integer, string,
// sequence, tuple, string-keyed map), a marked set (Full or Subset) or one
// of three special outcomes produced by execution (Undefined for rejected
// inputs, Demonic for crashes, Angelic for tolerated gaps).

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tri/error.hpp"

namespace tri {

using BigInt = boost::multiprecision::cpp_int;

enum class SpecialKind : std::uint8_t { Undefined, Angelic, Demonic };
enum class SetKind : std::uint8_t { Full, Subset };

inline std::string_view to_string(SpecialKind k) {
  switch (k) {
    case SpecialKind::Undefined: return "undefined";
    case SpecialKind::Angelic: return "angelic";
    case SpecialKind::Demonic: return "demonic";
  }
  return "?";
}

inline std::string_view to_string(SetKind k) { return k == SetKind::Full ? "full" : "subset"; }

class Value;

struct NoneVal {
  friend bool operator==(NoneVal, NoneVal) { return true; }
};
struct SeqVal {
  std::vector<Value> items;
};
struct TupleVal {
  std::vector<Value> items;
};
/// Entries sorted by key, keys unique.
struct MapVal {
  std::vector<std::pair<std::string, Value>> entries;
};
struct SetVal {
  SetKind kind = SetKind::Full;
  std::vector<Value> elements;
};
struct SpecialVal {
  SpecialKind kind = SpecialKind::Undefined;
};

class Value {
 public:
  using Storage =
      std::variant<NoneVal, bool, BigInt, std::string, SeqVal, TupleVal, MapVal, SetVal, SpecialVal>;

  Value() : data_(NoneVal{}) {}

  static Value none() { return Value(NoneVal{}); }
  static Value boolean(bool b) { return Value(b); }
  static Value integer(BigInt i) { return Value(std::move(i)); }
  static Value integer(long long i) { return Value(BigInt(i)); }
  static Value str(std::string s) { return Value(std::move(s)); }
  static Value seq(std::vector<Value> items) { return Value(SeqVal{std::move(items)}); }
  static Value tuple(std::vector<Value> items) { return Value(TupleVal{std::move(items)}); }
  static Value map(std::vector<std::pair<std::string, Value>> entries);
  static Value full_set(std::vector<Value> elements) { return make_set(SetKind::Full, std::move(elements)); }
  static Value subset(std::vector<Value> elements) { return make_set(SetKind::Subset, std::move(elements)); }
  static Value make_set(SetKind kind, std::vector<Value> elements);
  static Value special(SpecialKind k) { return Value(SpecialVal{k}); }
  static Value undefined() { return special(SpecialKind::Undefined); }
  static Value angelic() { return special(SpecialKind::Angelic); }
  static Value demonic() { return special(SpecialKind::Demonic); }

  const Storage& data() const { return data_; }

  bool is_none() const { return std::holds_alternative<NoneVal>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_int() const { return std::holds_alternative<BigInt>(data_); }
  bool is_str() const { return std::holds_alternative<std::string>(data_); }
  bool is_seq() const { return std::holds_alternative<SeqVal>(data_); }
  bool is_tuple() const { return std::holds_alternative<TupleVal>(data_); }
  bool is_map() const { return std::holds_alternative<MapVal>(data_); }
  bool is_set() const { return std::holds_alternative<SetVal>(data_); }
  bool is_special() const { return std::holds_alternative<SpecialVal>(data_); }
  bool is_special(SpecialKind k) const { return is_special() && special_kind() == k; }
  bool is_full_set() const { return is_set() && as_set().kind == SetKind::Full; }
  bool is_subset() const { return is_set() && as_set().kind == SetKind::Subset; }

  bool as_bool() const { return get<bool>("bool"); }
  const BigInt& as_int() const { return get<BigInt>("int"); }
  const std::string& as_str() const { return get<std::string>("str"); }
  const std::vector<Value>& as_seq() const { return get<SeqVal>("sequence").items; }
  const std::vector<Value>& as_tuple() const { return get<TupleVal>("tuple").items; }
  const MapVal& as_map() const { return get<MapVal>("map"); }
  const SetVal& as_set() const { return get<SetVal>("set"); }
  SpecialKind special_kind() const { return get<SpecialVal>("special").kind; }

  /// Elements of a sequence, tuple or set; empty span otherwise.
  std::span<const Value> children() const;

  /// True if a Special or Subset occurs anywhere inside this value.
  bool contains_special_or_subset() const;

 private:
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Value>)
  explicit Value(T v) : data_(std::move(v)) {}

  template <typename T>
  const T& get(const char* what) const {
    if (const T* p = std::get_if<T>(&data_)) return *p;
    throw ContractViolation(std::string("value is not a ") + what);
  }

  Storage data_;
};

// ---------------------------------------------------------------------------

inline Value Value::map(std::vector<std::pair<std::string, Value>> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i - 1].first == entries[i].first) throw ContractViolation("duplicate map key: " + entries[i].first);
  }
  return Value(MapVal{std::move(entries)});
}

inline Value Value::make_set(SetKind kind, std::vector<Value> elements) {
  for (const Value& e : elements) {
    if (e.is_special()) throw ContractViolation("special value inside a set");
  }
  return Value(SetVal{kind, std::move(elements)});
}

inline std::span<const Value> Value::children() const {
  if (auto* s = std::get_if<SeqVal>(&data_)) return s->items;
  if (auto* t = std::get_if<TupleVal>(&data_)) return t->items;
  if (auto* s = std::get_if<SetVal>(&data_)) return s->elements;
  return {};
}

inline bool Value::contains_special_or_subset() const {
  if (is_special() || is_subset()) return true;
  if (auto* m = std::get_if<MapVal>(&data_)) {
    return std::any_of(m->entries.begin(), m->entries.end(),
                       [](const auto& kv) { return kv.second.contains_special_or_subset(); });
  }
  auto kids = children();
  return std::any_of(kids.begin(), kids.end(), [](const Value& v) { return v.contains_special_or_subset(); });
}

// ---------------------------------------------------------------------------
// Canonical encoding.
//
// Grammar (every production is self-delimiting, so concatenation is
// unambiguous and the encoding is injective):
//
//   none        N
//   bool        T | F
//   integer     i <decimal, optional leading '-'> ;
//   string      s <byte length> : <raw bytes>
//   sequence    l <count> : <elem>*
//   tuple       t <count> : <elem>*
//   map         m <count> : (<string encoding of key> <elem>)*   keys ascending
//   full set    S <count> : <elem>*   elements sorted by encoding, deduplicated
//
// The behaviour key used for clustering extends the grammar with
//   subset set  P <count> : <elem>*   (same normalisation as S)
//   special     !U | !A | !D

namespace detail {

inline void encode_into(const Value& v, std::string& out, bool allow_marked);

inline void encode_list(char tag, std::span<const Value> items, std::string& out, bool allow_marked) {
  out += tag;
  out += std::to_string(items.size());
  out += ':';
  for (const Value& e : items) encode_into(e, out, allow_marked);
}

inline void encode_set(char tag, const SetVal& s, std::string& out, bool allow_marked) {
  std::vector<std::string> parts;
  parts.reserve(s.elements.size());
  for (const Value& e : s.elements) {
    std::string enc;
    encode_into(e, enc, allow_marked);
    parts.push_back(std::move(enc));
  }
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  out += tag;
  out += std::to_string(parts.size());
  out += ':';
  for (const auto& p : parts) out += p;
}

inline void encode_into(const Value& v, std::string& out, bool allow_marked) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NoneVal>) {
          out += 'N';
        } else if constexpr (std::is_same_v<T, bool>) {
          out += x ? 'T' : 'F';
        } else if constexpr (std::is_same_v<T, BigInt>) {
          out += 'i';
          out += x.str();
          out += ';';
        } else if constexpr (std::is_same_v<T, std::string>) {
          out += 's';
          out += std::to_string(x.size());
          out += ':';
          out += x;
        } else if constexpr (std::is_same_v<T, SeqVal>) {
          encode_list('l', x.items, out, allow_marked);
        } else if constexpr (std::is_same_v<T, TupleVal>) {
          encode_list('t', x.items, out, allow_marked);
        } else if constexpr (std::is_same_v<T, MapVal>) {
          out += 'm';
          out += std::to_string(x.entries.size());
          out += ':';
          for (const auto& [k, val] : x.entries) {
            out += 's';
            out += std::to_string(k.size());
            out += ':';
            out += k;
            encode_into(val, out, allow_marked);
          }
        } else if constexpr (std::is_same_v<T, SetVal>) {
          if (x.kind == SetKind::Subset && !allow_marked) {
            throw ContractViolation("canonical_encode: subset-marked set has no canonical encoding");
          }
          encode_set(x.kind == SetKind::Full ? 'S' : 'P', x, out, allow_marked);
        } else if constexpr (std::is_same_v<T, SpecialVal>) {
          if (!allow_marked) throw ContractViolation("canonical_encode: special value has no canonical encoding");
          out += '!';
          out += x.kind == SpecialKind::Undefined ? 'U' : x.kind == SpecialKind::Angelic ? 'A' : 'D';
        }
      },
      v.data());
}

}  // namespace detail

/// Stable, injective byte encoding of a normal value; Full sets are
/// order-insensitive. Throws ContractViolation on Special or Subset content.
inline std::string canonical_encode(const Value& v) {
  std::string out;
  detail::encode_into(v, out, false);
  return out;
}

/// Like canonical_encode but total: specials and subset markers get their
/// own tokens. Two outcomes share a key iff they are the same observation.
inline std::string behavior_key(const Value& v) {
  std::string out;
  detail::encode_into(v, out, true);
  return out;
}

/// Key used by fixture tables for an argument tuple.
inline std::string args_key(std::span<const Value> args) {
  return canonical_encode(Value::tuple(std::vector<Value>(args.begin(), args.end())));
}

// ---------------------------------------------------------------------------

namespace detail {

inline bool equal_rec(const Value& a, const Value& b);

inline bool seq_equal(std::span<const Value> a, std::span<const Value> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_rec(a[i], b[i])) return false;
  }
  return true;
}

inline bool set_includes(const std::vector<Value>& outer, const std::vector<Value>& inner) {
  return std::all_of(inner.begin(), inner.end(), [&](const Value& x) {
    return std::any_of(outer.begin(), outer.end(), [&](const Value& y) { return equal_rec(x, y); });
  });
}

inline bool equal_rec(const Value& a, const Value& b) {
  if (a.data().index() != b.data().index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.data());
        if constexpr (std::is_same_v<T, SeqVal> || std::is_same_v<T, TupleVal>) {
          return seq_equal(x.items, y.items);
        } else if constexpr (std::is_same_v<T, MapVal>) {
          if (x.entries.size() != y.entries.size()) return false;
          for (std::size_t i = 0; i < x.entries.size(); ++i) {
            if (x.entries[i].first != y.entries[i].first) return false;
            if (!equal_rec(x.entries[i].second, y.entries[i].second)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, SetVal>) {
          return set_includes(x.elements, y.elements) && set_includes(y.elements, x.elements);
        } else if constexpr (std::is_same_v<T, SpecialVal>) {
          return false;  // unreachable, guarded by the caller
        } else {
          return x == y;
        }
      },
      a.data());
}

}  // namespace detail

/// Deep structural equality over normal values and Full sets.
/// Comparing a Special or a Subset-marked value is a contract violation.
inline bool values_equal(const Value& a, const Value& b) {
  if (a.contains_special_or_subset() || b.contains_special_or_subset()) {
    throw ContractViolation("values_equal: special or subset-marked operand");
  }
  return detail::equal_rec(a, b);
}

/// Membership by structural equality in a list of values.
inline bool contains_value(std::span<const Value> haystack, const Value& needle) {
  return std::any_of(haystack.begin(), haystack.end(), [&](const Value& v) { return values_equal(v, needle); });
}

/// Demonic beats Angelic beats Undefined.
inline SpecialKind strongest(std::span<const SpecialKind> kinds) {
  if (kinds.empty()) throw ContractViolation("strongest: empty list");
  auto rank = [](SpecialKind k) { return k == SpecialKind::Demonic ? 2 : k == SpecialKind::Angelic ? 1 : 0; };
  return *std::max_element(kinds.begin(), kinds.end(), [&](SpecialKind a, SpecialKind b) { return rank(a) < rank(b); });
}

inline SpecialKind strongest(std::initializer_list<SpecialKind> kinds) {
  return strongest(std::span<const SpecialKind>(kinds.begin(), kinds.size()));
}

// ---------------------------------------------------------------------------

/// Python-flavoured rendering for diagnostics. Not an encoding.
inline std::string to_display(const Value& v) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        auto join = [](std::span<const Value> items, std::string_view open, std::string_view close) {
          std::string s(open);
          for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) s += ", ";
            s += to_display(items[i]);
          }
          if (items.size() == 1 && open == "(") s += ",";
          s += close;
          return s;
        };
        if constexpr (std::is_same_v<T, NoneVal>) {
          return "None";
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "True" : "False";
        } else if constexpr (std::is_same_v<T, BigInt>) {
          return x.str();
        } else if constexpr (std::is_same_v<T, std::string>) {
          std::string s = "\"";
          for (char c : x) {
            if (c == '"' || c == '\\') s += '\\';
            s += c;
          }
          return s + "\"";
        } else if constexpr (std::is_same_v<T, SeqVal>) {
          return join(x.items, "[", "]");
        } else if constexpr (std::is_same_v<T, TupleVal>) {
          return join(x.items, "(", ")");
        } else if constexpr (std::is_same_v<T, MapVal>) {
          std::string s = "{";
          for (std::size_t i = 0; i < x.entries.size(); ++i) {
            if (i) s += ", ";
            s += "\"" + x.entries[i].first + "\": " + to_display(x.entries[i].second);
          }
          return s + "}";
        } else if constexpr (std::is_same_v<T, SetVal>) {
          return join(x.elements, "{", x.kind == SetKind::Subset ? "}*" : "}");
        } else {
          switch (x.kind) {
            case SpecialKind::Undefined: return "U";
            case SpecialKind::Angelic: return "A";
            case SpecialKind::Demonic: return "D";
          }
          return "?";
        }
      },
      v.data());
}

}  // namespace tri
