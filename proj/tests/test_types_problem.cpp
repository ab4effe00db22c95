#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "tri/problem.hpp"
#include "tri/types.hpp"

using namespace tri;
using namespace tri::testing;

namespace {
FunctionSignature sig(std::vector<std::pair<std::string, std::string>> params, const std::string& ret) {
  FunctionSignature s{"f", {}, parse_type(ret)};
  for (auto& [n, t] : params) s.params.push_back({n, parse_type(t)});
  return s;
}
}  // namespace

TEST(Types, ParseAndPrintRoundTrip) {
  for (const char* t : {"int", "str", "bool", "None", "Any", "list[int]", "tuple[int, str]", "set[str]",
                        "dict[str, list[int]]", "Optional[str]", "Union[int, str, None]"}) {
    EXPECT_EQ(to_string(parse_type(t)), t);
  }
  EXPECT_EQ(to_string(parse_type("typing.List[ int ]")), "list[int]");
  EXPECT_EQ(to_string(parse_type("Union[int, Union[str, int]]")), "Union[int, str]");
  EXPECT_EQ(parse_type("Optional[int]"), parse_type("Union[int, None]"));
}

TEST(Types, ParseErrors) {
  for (const char* t : {"", "list", "list[int", "dict[int, str]", "tuple[]", "frob", "int]"}) {
    EXPECT_THROW(parse_type(t), FormatError) << t;
  }
}

TEST(Types, Conformance) {
  EXPECT_TRUE(conforms(I(1), parse_type("int")));
  EXPECT_FALSE(conforms(S("1"), parse_type("int")));
  EXPECT_TRUE(conforms(Value::seq({I(1), I(2)}), parse_type("list[int]")));
  EXPECT_FALSE(conforms(Value::seq({I(1), S("x")}), parse_type("list[int]")));
  EXPECT_TRUE(conforms(Value::none(), parse_type("Optional[str]")));
  EXPECT_TRUE(conforms(Value::tuple({I(1), S("a")}), parse_type("tuple[int, str]")));
  EXPECT_FALSE(conforms(Value::tuple({I(1)}), parse_type("tuple[int, str]")));
  EXPECT_FALSE(conforms(Value::undefined(), parse_type("Any")));
}

TEST(Types, UnionTagsAndConstructors) {
  auto opt = parse_type("Optional[str]");
  EXPECT_EQ(union_tags(opt), (std::vector<std::string>{"some", "none"}));
  EXPECT_EQ(constructor_of(S("x"), opt)->first, "some");
  EXPECT_EQ(constructor_of(Value::none(), opt)->first, "none");
  EXPECT_FALSE(constructor_of(I(1), opt).has_value());
  EXPECT_EQ(union_tags(parse_type("int")), std::vector<std::string>{"value"});
  EXPECT_EQ(union_tags(parse_type("Union[int, str]")), (std::vector<std::string>{"int", "str"}));
}

TEST(Signature, Validation) {
  EXPECT_THROW(sig({}, "int").validate(), ContractViolation);
  EXPECT_THROW(sig({{"x", "int"}, {"x", "str"}}, "int").validate(), ContractViolation);
  EXPECT_EQ(to_string(sig({{"s", "str"}, {"t", "str"}}, "Optional[str]")), "def f(s: str, t: str) -> Optional[str]");
}

TEST(Signature, InverseOfUnary) {
  auto inv = inverse_signature(sig({{"x", "int"}}, "str"));
  EXPECT_EQ(to_string(inv), "def f_inv(result: str) -> int");
}

TEST(Signature, InverseOfBinaryReturnsTuple) {
  auto inv = inverse_signature(sig({{"a", "int"}, {"b", "str"}}, "bool"));
  EXPECT_EQ(to_string(inv), "def f_inv(result: bool) -> tuple[int, str]");
}

TEST(Signature, PartialInverse) {
  auto s = sig({{"s", "str"}, {"t", "str"}}, "Optional[str]");
  EXPECT_EQ(to_string(partial_inverse_signature(s, 1)), "def f_pinv(result: Optional[str], s: str) -> str");
  EXPECT_THROW(partial_inverse_signature(s, 2), ContractViolation);
  EXPECT_THROW(partial_inverse_signature(sig({{"x", "int"}}, "int"), 0), ContractViolation);
  // a parameter already named result gets a fresh name
  auto r = partial_inverse_signature(sig({{"result", "int"}, {"y", "int"}}, "int"), 1);
  EXPECT_EQ(r.params[0].name, "result_");
}

TEST(Signature, SetValuedInverseAndEnumeration) {
  auto s = sig({{"s", "str"}, {"t", "str"}}, "Optional[str]");
  EXPECT_EQ(to_string(set_valued_inverse_signature(s, 1)), "def f_sinv(result: Optional[str], s: str) -> set[str]");
  EXPECT_EQ(to_string(set_valued_inverse_signature(sig({{"i", "int"}}, "int"), 0)), "def f_sinv(result: int) -> set[int]");
  EXPECT_EQ(to_string(enumeration_signature(s)), "def f_enum(s: str, t: str) -> set[Optional[str]]");
}

TEST(Signature, Pointwise) {
  EXPECT_EQ(to_string(pointwise_signature(sig({{"xs", "list[int]"}}, "list[str]"))),
            "def f_pointwise(xs_item: int) -> str");
  EXPECT_EQ(to_string(pointwise_signature(sig({{"ps", "list[tuple[int, str]]"}}, "list[bool]"))),
            "def f_pointwise(ps_0: int, ps_1: str) -> bool");
  EXPECT_THROW(pointwise_signature(sig({{"x", "int"}}, "list[int]")), ContractViolation);
}

TEST(Signature, UnionSplit) {
  auto parts = union_split_signatures(sig({{"s", "str"}}, "Optional[int]"));
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].first, "some");
  EXPECT_EQ(to_string(parts[0].second.returns), "int");
  EXPECT_EQ(parts[1].first, "none");
  EXPECT_THROW(union_split_signatures(sig({{"s", "str"}}, "int")), ContractViolation);
}

// Transformations compose: the inverse of an inverse has the original shape
// up to the tuple packing of unary results.
TEST(Signature, DoubleInverseRestoresShapeForUnary) {
  for (const char* t : {"int", "str", "list[int]", "Optional[str]"}) {
    auto s = sig({{"x", "tuple[int, str]"}}, t);
    auto back = inverse_signature(inverse_signature(s));
    EXPECT_TRUE(back.same_shape(s)) << t;
  }
}

TEST(Signature, RoleNames) {
  EXPECT_EQ(role_name(role::Original{}), "original");
  EXPECT_EQ(role_name(role::PartialInverse{1}), "partial-inverse(1)");
  EXPECT_EQ(role_name(role::UnionBranch{"some"}), "union-branch(some)");
}

TEST(TestInputs, DeduplicatesByEncoding) {
  TestInputSet s("p", {{I(1)}, {I(2)}, {I(1)}, {full({1, 2})}, {full({2, 1})}});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.arity(), 1u);
  EXPECT_THROW(TestInputSet("p", {}), ContractViolation);
  EXPECT_THROW(TestInputSet("p", {{Value::undefined()}}), ContractViolation);
  TestInputSet mixed("p", {{I(1)}, {I(1), I(2)}});
  EXPECT_THROW(mixed.arity(), ContractViolation);
}
