#pragma once

// Hyperproperty terms and their textual s-expression form.
//
//   term    := literal | symbol
//            | (call ID term*)        execute candidate ID
//            | (map ID term)          apply ID to every element of a sequence
//            | (tolerate term)
//            | (= term term) | (in term term)
//            | (or term term) | (and term term+) | (not term) | (=> term term)
//            | (nth term INDEX)       tuple projection
//            | (forall SYMBOL domain term option*)
//   domain  := (domain literal*) | term
//   option  := :partial               subset-marked domains may pass
//            | :label SYMBOL
//   literal := INTEGER | "string" | true | false | none
//            | :undefined | :angelic | :demonic
//            | (tuple literal*) | (list literal*) | (set literal*)
//            | (subset literal*) | (dict "key" literal ...)
//
// Bare symbols other than true/false/none are variables. Candidate ids that
// are not plain symbols are written as quoted strings.

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tri/error.hpp"
#include "tri/value.hpp"

namespace tri {

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

namespace term {
struct Const {
  Value value;
};
struct Var {
  std::string name;
};
struct Call {
  std::string candidate;
  std::vector<Term> args;
};
struct MapCall {
  std::string candidate;
  Term sequence;
};
struct Tolerate {
  Term inner;
};
struct Eq {
  Term lhs, rhs;
};
struct In {
  Term element, set;
};
struct Or {
  Term lhs, rhs;
};
struct And {
  Term lhs, rhs;
};
struct Not {
  Term inner;
};
struct Implies {
  Term lhs, rhs;
};
struct Nth {
  Term tuple;
  std::size_t index;
};
struct ForAll {
  std::string binder;
  Term domain;                                    // null when explicitDomain is set
  std::optional<std::vector<Value>> explicitDomain;
  Term body;
  bool partialDomainOk = false;                   // subset-marked domains may pass
  std::string label;
};
}  // namespace term

struct TermNode {
  std::variant<term::Const, term::Var, term::Call, term::MapCall, term::Tolerate, term::Eq, term::In, term::Or,
               term::And, term::Not, term::Implies, term::Nth, term::ForAll>
      node;
};

// Builders ------------------------------------------------------------------

namespace term {
template <typename T>
Term make(T n) {
  return std::make_shared<const TermNode>(TermNode{std::move(n)});
}
}  // namespace term

inline Term lit(Value v) { return term::make(term::Const{std::move(v)}); }
inline Term var(std::string name) { return term::make(term::Var{std::move(name)}); }
inline Term call(std::string candidate, std::vector<Term> args) {
  return term::make(term::Call{std::move(candidate), std::move(args)});
}
inline Term map_call(std::string candidate, Term seq) {
  return term::make(term::MapCall{std::move(candidate), std::move(seq)});
}
inline Term tolerate(Term t) { return term::make(term::Tolerate{std::move(t)}); }
inline Term eq(Term a, Term b) { return term::make(term::Eq{std::move(a), std::move(b)}); }
inline Term in(Term e, Term s) { return term::make(term::In{std::move(e), std::move(s)}); }
inline Term or_(Term a, Term b) { return term::make(term::Or{std::move(a), std::move(b)}); }
inline Term and_(Term a, Term b) { return term::make(term::And{std::move(a), std::move(b)}); }
inline Term not_(Term a) { return term::make(term::Not{std::move(a)}); }
inline Term implies(Term a, Term b) { return term::make(term::Implies{std::move(a), std::move(b)}); }
inline Term nth(Term t, std::size_t i) { return term::make(term::Nth{std::move(t), i}); }

inline Term forall(std::string binder, Term domain, Term body, std::string label = {}, bool partialDomainOk = false) {
  return term::make(term::ForAll{std::move(binder), std::move(domain), std::nullopt, std::move(body),
                                 partialDomainOk, std::move(label)});
}

inline Term forall_in(std::string binder, std::vector<Value> domain, Term body, std::string label = {}) {
  return term::make(
      term::ForAll{std::move(binder), nullptr, std::move(domain), std::move(body), false, std::move(label)});
}

/// Right-nested conjunction; requires at least one conjunct.
inline Term all_of(const std::vector<Term>& ts) {
  if (ts.empty()) throw ContractViolation("all_of: no conjuncts");
  Term acc = ts.back();
  for (std::size_t i = ts.size() - 1; i-- > 0;) acc = and_(ts[i], acc);
  return acc;
}

// Printing ------------------------------------------------------------------

namespace detail {

inline bool plain_symbol(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == ':') return false;
  if (s == "true" || s == "false" || s == "none") return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'' || c == '-' ||
           c == '#' || c == '/';
  });
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string ident(std::string_view s) { return plain_symbol(s) ? std::string(s) : quote(s); }

inline std::string literal_sexpr(const Value& v) {
  auto items = [](std::string head, std::span<const Value> xs) {
    for (const auto& x : xs) head += " " + literal_sexpr(x);
    return "(" + head + ")";
  };
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NoneVal>) return "none";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, BigInt>) return x.str();
        else if constexpr (std::is_same_v<T, std::string>) return quote(x);
        else if constexpr (std::is_same_v<T, SeqVal>) return items("list", x.items);
        else if constexpr (std::is_same_v<T, TupleVal>) return items("tuple", x.items);
        else if constexpr (std::is_same_v<T, SetVal>) return items(x.kind == SetKind::Full ? "set" : "subset", x.elements);
        else if constexpr (std::is_same_v<T, MapVal>) {
          std::string s = "(dict";
          for (const auto& [k, e] : x.entries) s += " " + quote(k) + " " + literal_sexpr(e);
          return s + ")";
        } else {
          return ":" + std::string(to_string(x.kind));
        }
      },
      v.data());
}

}  // namespace detail

inline std::string to_sexpr(const Term& t) {
  using namespace term;
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Const>) {
          return detail::literal_sexpr(n.value);
        } else if constexpr (std::is_same_v<T, Var>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, Call>) {
          std::string s = "(call " + detail::ident(n.candidate);
          for (const auto& a : n.args) s += " " + to_sexpr(a);
          return s + ")";
        } else if constexpr (std::is_same_v<T, MapCall>) {
          return "(map " + detail::ident(n.candidate) + " " + to_sexpr(n.sequence) + ")";
        } else if constexpr (std::is_same_v<T, Tolerate>) {
          return "(tolerate " + to_sexpr(n.inner) + ")";
        } else if constexpr (std::is_same_v<T, Eq>) {
          return "(= " + to_sexpr(n.lhs) + " " + to_sexpr(n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, In>) {
          return "(in " + to_sexpr(n.element) + " " + to_sexpr(n.set) + ")";
        } else if constexpr (std::is_same_v<T, Or>) {
          return "(or " + to_sexpr(n.lhs) + " " + to_sexpr(n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, And>) {
          return "(and " + to_sexpr(n.lhs) + " " + to_sexpr(n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, Not>) {
          return "(not " + to_sexpr(n.inner) + ")";
        } else if constexpr (std::is_same_v<T, Implies>) {
          return "(=> " + to_sexpr(n.lhs) + " " + to_sexpr(n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, Nth>) {
          return "(nth " + to_sexpr(n.tuple) + " " + std::to_string(n.index) + ")";
        } else {
          std::string dom;
          if (n.explicitDomain) {
            dom = "(domain";
            for (const auto& v : *n.explicitDomain) dom += " " + detail::literal_sexpr(v);
            dom += ")";
          } else {
            dom = to_sexpr(n.domain);
          }
          std::string s = "(forall " + n.binder + " " + dom + " " + to_sexpr(n.body);
          if (n.partialDomainOk) s += " :partial";
          if (!n.label.empty()) s += " :label " + detail::ident(n.label);
          return s + ")";
        }
      },
      t->node);
}

// Parsing -------------------------------------------------------------------

namespace detail {

class SexprParser {
 public:
  explicit SexprParser(std::string_view src) : src_(src) {}

  Term parse_all() {
    Term t = term();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("term parse error at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  char peek() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    return src_[pos_];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool at_close() { return peek() == ')'; }

  std::string atom() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
           src_[pos_] != ')' && src_[pos_] != '"') {
      ++pos_;
    }
    if (start == pos_) fail("expected an atom");
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string string_lit() {
    expect('"');
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      char c = src_[pos_++];
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("dangling escape");
        char e = src_[pos_++];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += c;
      }
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string identifier() { return peek() == '"' ? string_lit() : atom(); }

  static bool is_integer(const std::string& a) {
    std::size_t i = (a[0] == '-' || a[0] == '+') ? 1 : 0;
    return i < a.size() && std::all_of(a.begin() + static_cast<long>(i), a.end(),
                                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  }

  std::optional<Value> atom_literal(const std::string& a) {
    if (is_integer(a)) return Value::integer(BigInt(a[0] == '+' ? a.substr(1) : a));
    if (a == "true") return Value::boolean(true);
    if (a == "false") return Value::boolean(false);
    if (a == "none") return Value::none();
    if (a == ":undefined") return Value::undefined();
    if (a == ":angelic") return Value::angelic();
    if (a == ":demonic") return Value::demonic();
    return std::nullopt;
  }

  static bool is_literal_head(const std::string& h) {
    return h == "tuple" || h == "list" || h == "set" || h == "subset" || h == "dict";
  }

  Value literal() {
    char c = peek();
    if (c == '"') return Value::str(string_lit());
    if (c == '(') {
      ++pos_;
      std::string head = atom();
      if (!is_literal_head(head)) fail("'" + head + "' is not a literal constructor");
      return literal_body(head);
    }
    auto a = atom();
    if (auto v = atom_literal(a)) return *v;
    fail("expected a literal, got '" + a + "'");
  }

  // after "(head"
  Value literal_body(const std::string& head) {
    if (head == "dict") {
      std::vector<std::pair<std::string, Value>> entries;
      while (!at_close()) {
        std::string k = string_lit();
        entries.emplace_back(std::move(k), literal());
      }
      expect(')');
      return Value::map(std::move(entries));
    }
    std::vector<Value> items;
    while (!at_close()) items.push_back(literal());
    expect(')');
    if (head == "tuple") return Value::tuple(std::move(items));
    if (head == "list") return Value::seq(std::move(items));
    if (head == "set") return Value::full_set(std::move(items));
    return Value::subset(std::move(items));
  }

  Term term() {
    char c = peek();
    if (c == '"') return lit(Value::str(string_lit()));
    if (c != '(') {
      auto a = atom();
      if (auto v = atom_literal(a)) return lit(*v);
      if (a[0] == ':') fail("unexpected keyword '" + a + "'");
      return var(a);
    }
    ++pos_;
    std::string head = atom();
    if (is_literal_head(head)) return lit(literal_body(head));
    Term out;
    if (head == "call") {
      std::string id = identifier();
      std::vector<Term> args;
      while (!at_close()) args.push_back(term());
      out = call(std::move(id), std::move(args));
    } else if (head == "map") {
      std::string id = identifier();
      out = map_call(std::move(id), term());
    } else if (head == "tolerate") {
      out = tolerate(term());
    } else if (head == "not") {
      out = not_(term());
    } else if (head == "=" || head == "in" || head == "or" || head == "=>") {
      Term a = term();
      Term b = term();
      out = head == "=" ? eq(a, b) : head == "in" ? in(a, b) : head == "or" ? or_(a, b) : implies(a, b);
    } else if (head == "and") {
      std::vector<Term> parts;
      while (!at_close()) parts.push_back(term());
      if (parts.size() < 2) fail("'and' needs at least two operands");
      out = all_of(parts);
    } else if (head == "nth") {
      Term t = term();
      auto idx = atom();
      if (!is_integer(idx) || idx[0] == '-') fail("nth index must be a non-negative integer");
      out = nth(t, std::stoul(idx));
    } else if (head == "forall") {
      out = forall_body();
    } else {
      fail("unknown form '" + head + "'");
    }
    expect(')');
    return out;
  }

  Term forall_body() {
    term::ForAll f;
    f.binder = atom();
    if (peek() == '(') {
      std::size_t save = pos_;
      ++pos_;
      if (atom() == "domain") {
        std::vector<Value> dom;
        while (!at_close()) dom.push_back(literal());
        expect(')');
        f.explicitDomain = std::move(dom);
      } else {
        pos_ = save;
      }
    }
    if (!f.explicitDomain) f.domain = term();
    f.body = term();
    while (!at_close()) {
      auto opt = atom();
      if (opt == ":partial") f.partialDomainOk = true;
      else if (opt == ":label") f.label = identifier();
      else fail("unknown forall option '" + opt + "'");
    }
    return term::make(std::move(f));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Term parse_term(std::string_view src) { return detail::SexprParser(src).parse_all(); }

}  // namespace tri
