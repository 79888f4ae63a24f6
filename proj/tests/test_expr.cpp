#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mcalc/errors.hpp"
#include "mcalc/expr.hpp"

using namespace mcalc;

namespace {
SpacePtr line() { return Space::interval(Rat(0), Rat(1)); }
}  // namespace

TEST_CASE("numeric grammar") {
  auto ra = magma("real_add");
  CHECK(num(FunctionExpr::parse("x^2", ra).eval(Point::at(0.5))) == doctest::Approx(0.25));
  CHECK(num(FunctionExpr::parse("1/x", ra).eval(Point::at(2.0))) == doctest::Approx(0.5));
  CHECK(num(FunctionExpr::parse("1/x", ra).eval(Point::at(-0.5))) == doctest::Approx(-2.0));
  CHECK(num(FunctionExpr::parse("exp(x)", ra).eval(Point::at(1.0))) == doctest::Approx(std::exp(1.0)));
  CHECK(num(FunctionExpr::parse("x*y", ra).eval(Point::at(3.0, 4.0))) == doctest::Approx(12.0));
  CHECK(num(FunctionExpr::parse("abs(x-0.5)", ra).eval(Point::at(0.2))) == doctest::Approx(0.3));
  CHECK(num(FunctionExpr::parse("2*x+1", ra).eval(Point::at(3.0))) == doctest::Approx(7.0));
  CHECK(num(FunctionExpr::parse("x^3", ra).eval(Point::at(-2.0))) == doctest::Approx(-8.0));
  CHECK(num(FunctionExpr::parse(" ( x + 1 ) * ( x - 1 ) ", ra).eval(Point::at(3.0))) ==
        doctest::Approx(8.0));
  CHECK(num(FunctionExpr::parse("sin(x)^2 + cos(x)^2", ra).eval(Point::at(0.7))) ==
        doctest::Approx(1.0));
  CHECK(num(FunctionExpr::parse("sqrt(x)", ra).eval(Point::at(9.0))) == doctest::Approx(3.0));
  CHECK(num(FunctionExpr::parse("log(x)", ra).eval(Point::at(std::exp(2.0)))) ==
        doctest::Approx(2.0));
}

TEST_CASE("precedence and unary minus") {
  auto ra = magma("real_add");
  // '^' binds tighter than unary minus and is right-associative
  CHECK(num(FunctionExpr::parse("-x^2", ra).eval(Point::at(2.0))) == doctest::Approx(-4.0));
  CHECK(num(FunctionExpr::parse("x^2^3", ra).eval(Point::at(2.0))) == doctest::Approx(256.0));
  CHECK(num(FunctionExpr::parse("2+3*4", ra).eval(Point::at(0.0))) == doctest::Approx(14.0));
  CHECK(num(FunctionExpr::parse("2-3-4", ra).eval(Point::at(0.0))) == doctest::Approx(-5.0));
  CHECK(num(FunctionExpr::parse("-x", ra).eval(Point::at(1.5))) == doctest::Approx(-1.5));
}

TEST_CASE("parse errors carry Schema") {
  auto ra = magma("real_add");
  CHECK_THROWS_AS(FunctionExpr::parse("x +", ra), Error);
  CHECK_THROWS_AS(FunctionExpr::parse("foo(x)", ra), Error);
  CHECK_THROWS_AS(FunctionExpr::parse("x 1", ra), Error);
  CHECK_THROWS_AS(FunctionExpr::parse("", ra), Error);
  CHECK_THROWS_AS(FunctionExpr::parse("(x", ra), Error);
  try {
    FunctionExpr::parse("@", ra);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == Err::Schema);
  }
}

TEST_CASE("formal expressions over a free codomain") {
  auto fm = magma("free:ab");
  Value v = FunctionExpr::parse("a+b", fm).eval(Point::at(0.0));
  CHECK(term(v).str() == "(a b)");
  Value w = FunctionExpr::parse("(a+b)+a", fm).eval(Point::at(0.5));
  CHECK(term(w).str() == "((a b) a)");
  Value u = FunctionExpr::parse("a+(b+a)", fm).eval(Point::at(0.5));
  CHECK(term(u).str() == "(a (b a))");
  CHECK_THROWS_AS(FunctionExpr::parse("a+c", fm), Error);  // atom outside the alphabet
}

TEST_CASE("piecewise splice") {
  auto ra = magma("real_add");
  auto sp = line();
  Region left(sp, {Cell(IntervalCell{iv(Rat(0), Rat(1, 2))})});
  Region right(sp, {Cell(IntervalCell{iv(Rat(1, 2), Rat(1))})});
  auto f = FunctionExpr::piecewise(
      {{left, FunctionExpr::constant(3.0, ra)}, {right, FunctionExpr::constant(1.0, ra)}}, ra);
  CHECK(num(f.eval(Point::at(0.25))) == doctest::Approx(3.0));
  CHECK(num(f.eval(Point::at(0.75))) == doctest::Approx(1.0));
  // the shared seam point belongs to the first listed piece
  CHECK(num(f.eval(Point::at(0.5))) == doctest::Approx(3.0));
  // outside every piece the value is the codomain identity
  CHECK(num(f.eval(Point::at(2.0))) == doctest::Approx(0.0));

  // overlap of positive content is rejected
  Region wide(sp, {Cell(IntervalCell{iv(Rat(1, 4), Rat(1))})});
  CHECK_THROWS_AS(FunctionExpr::piecewise({{left, FunctionExpr::constant(3.0, ra)},
                                           {wide, FunctionExpr::constant(1.0, ra)}},
                                          ra),
                  Error);
}

TEST_CASE("named functions and constants") {
  auto ra = magma("real_add");
  auto f = FunctionExpr::named("halfstep", [](const Point& p) -> Value {
    return p.x < 0.5 ? 0.0 : 1.0;
  }, ra);
  CHECK(num(f.eval(Point::at(0.2))) == doctest::Approx(0.0));
  CHECK(num(f.eval(Point::at(0.9))) == doctest::Approx(1.0));
  CHECK(f.str() == "halfstep");

  auto c = FunctionExpr::constant(2.5, ra);
  CHECK(num(c.eval(Point::at(77.0))) == doctest::Approx(2.5));
}
