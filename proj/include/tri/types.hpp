#pragma once

// Semantic type tags for signatures: a small Python-style type language
// (int, str, bool, None, Any, list[T], tuple[...], set[T], dict[str, T],
// Optional[T], Union[...]).

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "tri/error.hpp"
#include "tri/value.hpp"

namespace tri {

struct TypeTag {
  enum class Kind { Any, Int, Str, Bool, None, List, Tuple, Set, Dict, Union };

  Kind kind = Kind::Any;
  std::vector<TypeTag> args;

  static TypeTag any() { return {Kind::Any, {}}; }
  static TypeTag int_() { return {Kind::Int, {}}; }
  static TypeTag str() { return {Kind::Str, {}}; }
  static TypeTag boolean() { return {Kind::Bool, {}}; }
  static TypeTag none() { return {Kind::None, {}}; }
  static TypeTag list(TypeTag t) { return {Kind::List, {std::move(t)}}; }
  static TypeTag set(TypeTag t) { return {Kind::Set, {std::move(t)}}; }
  static TypeTag dict(TypeTag v) { return {Kind::Dict, {std::move(v)}}; }
  static TypeTag tuple(std::vector<TypeTag> ts) { return {Kind::Tuple, std::move(ts)}; }
  static TypeTag union_(std::vector<TypeTag> ts);
  static TypeTag optional(TypeTag t) { return union_({std::move(t), none()}); }

  bool is_union() const { return kind == Kind::Union; }
  /// Union of exactly one non-None disjunct and None.
  bool is_optional() const;

  friend bool operator==(const TypeTag&, const TypeTag&) = default;
};

inline TypeTag TypeTag::union_(std::vector<TypeTag> ts) {
  std::vector<TypeTag> flat;
  for (auto& t : ts) {
    if (t.kind == Kind::Union) {
      for (auto& u : t.args) flat.push_back(u);
    } else {
      flat.push_back(std::move(t));
    }
  }
  std::vector<TypeTag> uniq;
  for (auto& t : flat) {
    if (std::find(uniq.begin(), uniq.end(), t) == uniq.end()) uniq.push_back(std::move(t));
  }
  if (uniq.size() == 1) return uniq.front();
  return {Kind::Union, std::move(uniq)};
}

inline bool TypeTag::is_optional() const {
  if (kind != Kind::Union || args.size() != 2) return false;
  return (args[0].kind == Kind::None) != (args[1].kind == Kind::None);
}

inline std::string to_string(const TypeTag& t) {
  auto join = [](const std::vector<TypeTag>& ts) {
    std::string s;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i) s += ", ";
      s += to_string(ts[i]);
    }
    return s;
  };
  using K = TypeTag::Kind;
  switch (t.kind) {
    case K::Any: return "Any";
    case K::Int: return "int";
    case K::Str: return "str";
    case K::Bool: return "bool";
    case K::None: return "None";
    case K::List: return "list[" + to_string(t.args[0]) + "]";
    case K::Set: return "set[" + to_string(t.args[0]) + "]";
    case K::Dict: return "dict[str, " + to_string(t.args[0]) + "]";
    case K::Tuple: return "tuple[" + join(t.args) + "]";
    case K::Union:
      if (t.is_optional()) {
        return "Optional[" + to_string(t.args[0].kind == K::None ? t.args[1] : t.args[0]) + "]";
      }
      return "Union[" + join(t.args) + "]";
  }
  return "?";
}

namespace detail {

class TypeParser {
 public:
  explicit TypeParser(std::string_view src) : src_(src) {}

  TypeTag parse_all() {
    TypeTag t = parse();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("type '" + std::string(src_) + "': " + why);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                  src_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a type name");
    std::string name(src_.substr(start, pos_ - start));
    if (auto dot = name.rfind('.'); dot != std::string::npos) name = name.substr(dot + 1);  // typing.List
    return name;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<TypeTag> params() {
    std::vector<TypeTag> out;
    if (!eat('[')) fail("expected '['");
    if (eat(']')) return out;
    do {
      out.push_back(parse());
    } while (eat(','));
    if (!eat(']')) fail("expected ']'");
    return out;
  }

  TypeTag parse() {
    std::string name = ident();
    auto lower = name;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "int") return TypeTag::int_();
    if (lower == "str") return TypeTag::str();
    if (lower == "bool") return TypeTag::boolean();
    if (lower == "none" || lower == "nonetype") return TypeTag::none();
    if (lower == "any") return TypeTag::any();
    auto one = [&](const std::vector<TypeTag>& ps) {
      if (ps.size() != 1) fail(name + " takes one parameter");
      return ps[0];
    };
    if (lower == "list" || lower == "sequence") return TypeTag::list(one(params()));
    if (lower == "set" || lower == "frozenset") return TypeTag::set(one(params()));
    if (lower == "tuple") {
      auto ps = params();
      if (ps.empty()) fail("tuple needs parameters");
      return TypeTag::tuple(std::move(ps));
    }
    if (lower == "dict") {
      auto ps = params();
      if (ps.size() != 2 || ps[0].kind != TypeTag::Kind::Str) fail("dict must be dict[str, T]");
      return TypeTag::dict(ps[1]);
    }
    if (lower == "optional") return TypeTag::optional(one(params()));
    if (lower == "union") {
      auto ps = params();
      if (ps.empty()) fail("Union needs parameters");
      return TypeTag::union_(std::move(ps));
    }
    fail("unknown type '" + name + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline TypeTag parse_type(std::string_view src) { return detail::TypeParser(src).parse_all(); }

/// Whether a normal value inhabits the type. Specials never conform.
inline bool conforms(const Value& v, const TypeTag& t) {
  using K = TypeTag::Kind;
  if (v.is_special()) return false;
  switch (t.kind) {
    case K::Any: return true;
    case K::Int: return v.is_int();
    case K::Str: return v.is_str();
    case K::Bool: return v.is_bool();
    case K::None: return v.is_none();
    case K::List: {
      if (!v.is_seq()) return false;
      for (const auto& e : v.as_seq()) {
        if (!conforms(e, t.args[0])) return false;
      }
      return true;
    }
    case K::Set: {
      if (!v.is_set() && !v.is_seq()) return false;
      for (const auto& e : v.children()) {
        if (!conforms(e, t.args[0])) return false;
      }
      return true;
    }
    case K::Tuple: {
      if (!v.is_tuple() || v.as_tuple().size() != t.args.size()) return false;
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (!conforms(v.as_tuple()[i], t.args[i])) return false;
      }
      return true;
    }
    case K::Dict: {
      if (!v.is_map()) return false;
      for (const auto& [k, e] : v.as_map().entries) {
        if (!conforms(e, t.args[0])) return false;
      }
      return true;
    }
    case K::Union:
      return std::any_of(t.args.begin(), t.args.end(), [&](const TypeTag& d) { return conforms(v, d); });
  }
  return false;
}

/// Constructor tags of a union's disjuncts: "some"/"none" for Optional,
/// otherwise the rendered disjunct type. A non-union has the single tag "value".
inline std::vector<std::string> union_tags(const TypeTag& t) {
  if (!t.is_union()) return {"value"};
  std::vector<std::string> tags;
  for (const auto& d : t.args) {
    if (t.is_optional()) {
      tags.push_back(d.kind == TypeTag::Kind::None ? "none" : "some");
    } else {
      tags.push_back(to_string(d));
    }
  }
  return tags;
}

/// The disjunct of `t` that `v` inhabits, paired with its tag.
inline std::optional<std::pair<std::string, TypeTag>> constructor_of(const Value& v, const TypeTag& t) {
  if (!t.is_union()) {
    if (conforms(v, t)) return std::make_pair(std::string("value"), t);
    return std::nullopt;
  }
  auto tags = union_tags(t);
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (conforms(v, t.args[i])) return std::make_pair(tags[i], t.args[i]);
  }
  return std::nullopt;
}

}  // namespace tri
