#include <string>
#include <vector>

#include "doctest.h"
#include "roc/exprlang.hpp"

using namespace roc;

namespace {

double eval1(const std::string& src, const std::vector<std::string>& names,
             const std::vector<double>& values) {
  return Expr::parse(src).eval(names, values);
}

}  // namespace

TEST_CASE("basic parsing and evaluation") {
  CHECK(eval1("l1/l2", {"l1", "l2"}, {2, 1}) == doctest::Approx(2.0));
  CHECK(eval1("log(l1) - log(l2)", {"l1", "l2"}, {1, 1}) == doctest::Approx(0.0));
  CHECK(eval1("l1*l2", {"l1", "l2"}, {3, 0.5}) == doctest::Approx(1.5));
}

TEST_CASE("precedence") {
  CHECK(eval1("2+3*4", {}, {}) == doctest::Approx(14.0));
  CHECK(eval1("2^3^2", {}, {}) == doctest::Approx(512.0));
  CHECK(eval1("-2^2", {}, {}) == doctest::Approx(-4.0));
  CHECK(eval1("(-2)^2", {}, {}) == doctest::Approx(4.0));
  CHECK(eval1("2^-1", {}, {}) == doctest::Approx(0.5));
  CHECK(eval1("6/3/2", {}, {}) == doctest::Approx(1.0));
  CHECK(eval1("1-2-3", {}, {}) == doctest::Approx(-4.0));
  CHECK(eval1("min(3, max(1, 2))", {}, {}) == doctest::Approx(2.0));
  CHECK(eval1("pow(2, 10)", {}, {}) == doctest::Approx(1024.0));
  CHECK(eval1("sqrt(abs(-9))", {}, {}) == doctest::Approx(3.0));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    Expr::parse("l1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset == 5);
    CHECK(std::string(e.what()).find("offset 5") != std::string::npos);
    CHECK_FALSE(e.expected.empty());
  }
  CHECK_THROWS_AS(Expr::parse("(1+2"), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 2"), ParseError);
  CHECK_THROWS_AS(Expr::parse(""), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(1)"), ParseError);     // unknown function
  CHECK_THROWS_AS(Expr::parse("min(1)"), ParseError);     // arity
  CHECK_THROWS_AS(Expr::parse("log(1, 2)"), ParseError);  // arity
  CHECK_THROWS_AS(Expr::parse("a $ b"), ParseError);
}

TEST_CASE("evaluation errors") {
  const std::vector<std::string> names = {"l1"};
  CHECK_THROWS_AS(Expr::parse("l1 + l2").bind(names), EvalError);  // unbound variable
  CHECK_THROWS_AS(eval1("log(l1)", {"l1"}, {0.0}), DomainError);
  CHECK_THROWS_AS(eval1("log(l1)", {"l1"}, {-1.0}), DomainError);
  CHECK_THROWS_AS(eval1("sqrt(l1)", {"l1"}, {-4.0}), DomainError);
  CHECK_THROWS_AS(eval1("(-2)^0.5", {}, {}), DomainError);
  // The offending sub-expression is named.
  try {
    eval1("1 + log(l1 - 3)", {"l1"}, {1.0});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("log(l1 - 3)") != std::string::npos);
  }
}

TEST_CASE("pretty-print round trip reparses to an identical tree") {
  const std::vector<std::string> corpus = {
      "l1/l2",
      "log(l1) - log(l2)",
      "2+3*4",
      "2^3^2",
      "-2^2",
      "(-2)^2",
      "2^-3",
      "-(l1+l2)",
      "-l1*l2",
      "(l1+l2)*(l1-l2)",
      "l1 - (l2 - l3)",
      "l1 - l2 - l3",
      "l1/(l2*l3)",
      "l1/l2*l3",
      "min(l1, max(l2, 0.5))",
      "pow(l1, 2) + pow(l2, -2)",
      "sqrt(l1^2 + l2^2)",
      "abs(-l1)",
      "exp(log(l1))",
      "1e-3*l1 + 2.5E2",
      "0.5*(l1 + 1/l1)",
      "l1^(l2+1)",
      "(l1^l2)^l3",
      "l1^l2^l3",
      "-(-l1)",
      "3 - -2",
      "l1*(l2+l3)^2",
      "1/(1+exp(-l1))",
      "max(l1 - l2, 0)",
      "log(l1/l2) + (l1*l2 - 1)^2",
      "2",
      "-0.25",
      "l1",
      "min(min(l1, l2), l3)",
      "l1 + l2 + l3 + 1",
      "l1*l2*l3",
      "((l1))",
      "sqrt(sqrt(l1))",
      "pow(2, pow(2, 2))",
      "abs(l1 - l2)/abs(l1 + l2)",
      "1.5^2.5",
      "exp(-(l1 - 1)^2)",
      "(1 + l1)^-2",
      "l1/2 - l2/3 + l3/4",
      "0.1*0.2*0.3",
      "l1 - -l2",
      "log(exp(1))",
      "2*-3",
      "min(l1, l2) * max(l1, l2)",
      "(l1 - l2)^3 / (l1 + l2)^3",
      "sqrt(2)*l1",
  };
  for (const auto& src : corpus) {
    CAPTURE(src);
    const Expr a = Expr::parse(src);
    const Expr b = Expr::parse(a.pretty());
    CHECK(a.same_structure(b));
  }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
  const Expr e = Expr::parse("log(l1/l2) + (l1*l2 - 1)^2 + sqrt(l1)");
  const std::vector<std::string> names = {"l1", "l2"};
  const BoundExpr b = e.bind(names);
  const std::vector<double> v = {1.7, 0.3};
  const double first = b.eval(v);
  for (int i = 0; i < 100; ++i) CHECK(b.eval(v) == first);
  CHECK(Expr::parse(e.pretty()).eval(names, v) == first);
}

TEST_CASE("variables are reported in first-appearance order") {
  const auto vars = Expr::parse("l2 + l1*l2 + t").variables();
  REQUIRE(vars.size() == 3);
  CHECK(vars[0] == "l2");
  CHECK(vars[1] == "l1");
  CHECK(vars[2] == "t");
}
