#pragma once

// Wire protocol between the harness and candidate workers: newline-delimited
// JSON frames.
//
//   request   {"id": "<id>", "op": "call", "args": [<wire value>...]}
//   response  {"id": "<id>", "status": "ok" | "invalid-input" | "error",
//              "value": <wire value>, "message": "<text>"}
//
// Wire values: JSON scalars as-is (integers, strings, booleans), JSON arrays
// for sequences, {"tuple": [...]}, {"none": true}, {"set": {"kind":
// "full"|"subset", "values": [...]}}. Two extensions cover the rest of the
// value model: {"map": {...}} for string-keyed maps and {"int": "<decimal>"}
// for integers outside the signed 64-bit range. Fixture documents may also
// carry {"special": "undefined"|"angelic"|"demonic"}.

#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tri/error.hpp"
#include "tri/value.hpp"

namespace tri {

using json = nlohmann::json;

inline json to_wire(const Value& v) {
  return std::visit(
      [&](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, NoneVal>) {
          return json{{"none", true}};
        } else if constexpr (std::is_same_v<T, bool>) {
          return json(x);
        } else if constexpr (std::is_same_v<T, BigInt>) {
          if (x >= std::numeric_limits<std::int64_t>::min() && x <= std::numeric_limits<std::int64_t>::max()) {
            return json(x.template convert_to<std::int64_t>());
          }
          return json{{"int", x.str()}};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return json(x);
        } else if constexpr (std::is_same_v<T, SeqVal>) {
          json arr = json::array();
          for (const auto& e : x.items) arr.push_back(to_wire(e));
          return arr;
        } else if constexpr (std::is_same_v<T, TupleVal>) {
          json arr = json::array();
          for (const auto& e : x.items) arr.push_back(to_wire(e));
          return json{{"tuple", arr}};
        } else if constexpr (std::is_same_v<T, MapVal>) {
          json obj = json::object();
          for (const auto& [k, e] : x.entries) obj[k] = to_wire(e);
          return json{{"map", obj}};
        } else if constexpr (std::is_same_v<T, SetVal>) {
          json arr = json::array();
          for (const auto& e : x.elements) arr.push_back(to_wire(e));
          return json{{"set", {{"kind", std::string(to_string(x.kind))}, {"values", arr}}}};
        } else {
          return json{{"special", std::string(to_string(x.kind))}};
        }
      },
      v.data());
}

inline Value from_wire(const json& j, bool allowSpecial = false) {
  auto fail = [&](const std::string& why) -> Value { throw FormatError("wire value " + j.dump() + ": " + why); };
  auto list = [&](const json& arr) {
    if (!arr.is_array()) fail("expected an array");
    std::vector<Value> out;
    out.reserve(arr.size());
    for (const auto& e : arr) out.push_back(from_wire(e, allowSpecial));
    return out;
  };
  switch (j.type()) {
    case json::value_t::null: return Value::none();
    case json::value_t::boolean: return Value::boolean(j.get<bool>());
    case json::value_t::number_integer: return Value::integer(BigInt(j.get<std::int64_t>()));
    case json::value_t::number_unsigned: return Value::integer(BigInt(j.get<std::uint64_t>()));
    case json::value_t::number_float: return fail("floating-point values are not supported");
    case json::value_t::string: return Value::str(j.get<std::string>());
    case json::value_t::array: return Value::seq(list(j));
    case json::value_t::object: {
      if (j.size() != 1) return fail("tagged object must have exactly one key");
      const auto& [tag, body] = *j.items().begin();
      if (tag == "none") return Value::none();
      if (tag == "tuple") return Value::tuple(list(body));
      if (tag == "int") {
        if (!body.is_string()) return fail("int payload must be a decimal string");
        try {
          return Value::integer(BigInt(body.get<std::string>()));
        } catch (const std::exception&) {
          return fail("bad decimal");
        }
      }
      if (tag == "map") {
        if (!body.is_object()) return fail("map payload must be an object");
        std::vector<std::pair<std::string, Value>> entries;
        for (const auto& [k, e] : body.items()) entries.emplace_back(k, from_wire(e, allowSpecial));
        return Value::map(std::move(entries));
      }
      if (tag == "set") {
        if (!body.is_object() || !body.contains("kind") || !body.contains("values")) return fail("malformed set");
        const auto kind = body.at("kind");
        SetKind k;
        if (kind == "full") k = SetKind::Full;
        else if (kind == "subset") k = SetKind::Subset;
        else return fail("unknown set kind");
        auto elems = list(body.at("values"));
        for (const auto& e : elems) {
          if (e.is_special()) return fail("special value inside a set");
        }
        return Value::make_set(k, std::move(elems));
      }
      if (tag == "special" && allowSpecial) {
        if (body == "undefined") return Value::undefined();
        if (body == "angelic") return Value::angelic();
        if (body == "demonic") return Value::demonic();
        return fail("unknown special kind");
      }
      return fail("unknown tag '" + tag + "'");
    }
    default: return fail("unsupported JSON type");
  }
}

/// One request line (without the trailing newline).
inline std::string encode_call_frame(const std::string& id, std::span<const Value> args) {
  json arr = json::array();
  for (const auto& a : args) arr.push_back(to_wire(a));
  return json{{"id", id}, {"op", "call"}, {"args", arr}}.dump();
}

struct ResponseFrame {
  std::string id;
  Value value;
  std::optional<std::string> message;
};

/// Parses a response frame. "ok" yields its value, "invalid-input" yields
/// Undefined, "error" yields Demonic. Malformed frames throw FormatError.
inline ResponseFrame decode_response_frame(std::string_view message) {
  json j;
  try {
    j = json::parse(message);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("response frame is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j.at("id").is_string() || !j.contains("status") ||
      !j.at("status").is_string()) {
    throw FormatError("response frame lacks id/status");
  }
  ResponseFrame out{j.at("id").get<std::string>(), Value::demonic(), std::nullopt};
  if (j.contains("message") && j.at("message").is_string()) out.message = j.at("message").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status == "ok") {
    if (!j.contains("value")) throw FormatError("ok response without a value");
    out.value = from_wire(j.at("value"));
  } else if (status == "invalid-input") {
    out.value = Value::undefined();
  } else if (status == "error") {
    out.value = Value::demonic();
  } else {
    throw FormatError("unknown status '" + status + "'");
  }
  return out;
}

inline Value decode_wire_value(std::string_view message) { return decode_response_frame(message).value; }

}  // namespace tri
