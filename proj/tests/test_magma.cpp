#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mcalc/magma.hpp"

using namespace mcalc;

namespace {
const double kInf = HUGE_VAL;

Value at(const char* name) { return FreeTerm::atom(name); }
}  // namespace

TEST_CASE("registered magma ops on carrier elements") {
  auto add = magma("real_add");
  CHECK(num(add->op(2.0, 3.0)) == doctest::Approx(5.0));
  CHECK(value_equal(add->identity(), 0.0));

  auto mul = magma("pos_mul");
  CHECK(num(mul->op(4.0, 0.25)) == doctest::Approx(1.0));
  CHECK(!mul->contains(Value(0.0)));
  CHECK(!mul->contains(Value(-2.0)));
}

TEST_CASE("extension points absorb and partial pairs are refused") {
  auto ext = magma("ext_real_add");
  CHECK(num(ext->op(kInf, 5.0)) == kInf);
  CHECK(num(ext->op(-3.0, -kInf)) == -kInf);
  CHECK(ext->is_extension_point(Value(kInf)));
  CHECK(!ext->contains(Value(kInf)));
  CHECK_THROWS_WITH_AS(ext->op(kInf, -kInf), doctest::Contains("undefined-pair"),
                       Error);

  auto nn = magma("ext_nonneg_mul");
  CHECK(num(nn->op(kInf, 2.0)) == kInf);
  CHECK_THROWS_AS(nn->op(kInf, 0.0), Error);
  CHECK(nn->op_defined(kInf, kInf));  // same-signed infinities combine
}

TEST_CASE("free magma keeps order and association") {
  auto fm = magma("free:abc");
  Value ab = fm->op(at("a"), at("b"));
  Value ba = fm->op(at("b"), at("a"));
  CHECK(!value_equal(ab, ba));
  CHECK(term(ab).str() == "(a b)");

  // identity absorption is the only rewrite
  CHECK(value_equal(fm->op(fm->identity(), at("a")), at("a")));
  CHECK(value_equal(fm->op(at("a"), fm->identity()), at("a")));
  Value l = fm->op(ab, at("c"));
  Value r = fm->op(at("a"), fm->op(at("b"), at("c")));
  CHECK(!value_equal(l, r));
  CHECK(term(l).str() == "((a b) c)");

  CHECK(fm->contains(ab));
  CHECK(!fm->contains(Value(FreeTerm::atom("z"))));
}

TEST_CASE("fold_ordered is a left fold from the identity") {
  auto add = magma("real_add");
  CHECK(num(fold_ordered(*add, {})) == 0.0);
  CHECK(num(fold_ordered(*add, {1.0, 2.0, 3.0})) == doctest::Approx(6.0));

  auto fm = magma("free:abc");
  Value t = fold_ordered(*fm, {at("a"), at("b"), at("c")});
  CHECK(term(t).str() == "((a b) c)");
  CHECK(value_equal(fold_ordered(*fm, {at("a")}), at("a")));
}

TEST_CASE("fold over associative instances splits across concatenation") {
  std::mt19937_64 rng(7);
  auto uni = [&rng] { return (double)(rng() >> 11) * 0x1p-53 * 8.0 - 4.0; };
  auto add = magma("real_add");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Value> xs, ys, all;
    int nx = 1 + (int)(rng() % 5), ny = 1 + (int)(rng() % 5);
    for (int i = 0; i < nx; ++i) xs.push_back(uni());
    for (int i = 0; i < ny; ++i) ys.push_back(uni());
    all = xs;
    all.insert(all.end(), ys.begin(), ys.end());
    Value split = add->op(fold_ordered(*add, xs), fold_ordered(*add, ys));
    CHECK(value_equal(fold_ordered(*add, all), split, 1e-9));
  }
}

TEST_CASE("identity laws hold across sampled elements") {
  std::mt19937_64 rng(11);
  auto uni = [&rng] { return (double)(rng() >> 11) * 0x1p-53 * 200.0 - 100.0; };
  for (const char* key : {"real_add", "ext_real_add", "ext_nonneg_add"}) {
    auto m = magma(key);
    for (int i = 0; i < 1000; ++i) {
      double x = uni();
      if (!m->contains(Value(x))) x = std::fabs(x);
      CHECK(value_equal(m->op(m->identity(), x), Value(x), 1e-12));
      CHECK(value_equal(m->op(x, m->identity()), Value(x), 1e-12));
    }
  }
}

TEST_CASE("limit detects finite limits") {
  auto m = magma("real_add");
  auto out = limit(*m, [](int k) -> Value { return 1.0 / k; }, 1e-8, 4, 200000);
  CHECK(out.kind == LimitOutcome::Kind::Converged);
  CHECK(std::fabs(num(out.value)) < 1e-3);
}

TEST_CASE("limit reads an escaping sequence as the compactification point") {
  auto m = magma("ext_real_add");
  auto out = limit(*m, [](int k) -> Value { return (double)k; }, 1e-3, 4, 5000);
  CHECK(out.kind == LimitOutcome::Kind::ConvergedToInfinity);
  CHECK(num(out.value) == kInf);

  auto down = limit(*m, [](int k) -> Value { return -(double)k; }, 1e-3, 4, 5000);
  CHECK(down.kind == LimitOutcome::Kind::ConvergedToInfinity);
  CHECK(num(down.value) == -kInf);
}

TEST_CASE("limit refuses oscillation at the cap") {
  auto m = magma("ext_real_add");
  auto out = limit(*m, [](int k) -> Value { return k % 2 ? 1.0 : -1.0; }, 1e-6, 4, 500);
  CHECK(out.kind == LimitOutcome::Kind::NoLimitAtCap);
  CHECK(!out.drift_target.has_value());
}

TEST_CASE("slow monotone escape is flagged as drift at the cap") {
  auto m = magma("ext_real_add");
  // The shape of a divergent refinement sequence: one more ln-2-sized
  // increment per step. Never near +inf by the cap, but clearly headed there.
  auto out = limit(*m, [](int k) -> Value { return 0.7 * k; }, 1e-9, 4, 2000);
  CHECK(out.kind == LimitOutcome::Kind::NoLimitAtCap);
  REQUIRE(out.drift_target.has_value());
  CHECK(num(*out.drift_target) == kInf);
}

TEST_CASE("limit outcome survives dropping a finite prefix") {
  auto m = magma("ext_real_add");
  for (int shift : {1, 3, 10}) {
    auto base = limit(*m, [](int k) -> Value { return 2.0 + 1.0 / (k * k); },
                      1e-7, 4, 100000);
    auto moved = limit(*m, [shift](int k) -> Value { return 2.0 + 1.0 / ((k + shift) * (k + shift)); },
                       1e-7, 4, 100000);
    REQUIRE(base.kind == LimitOutcome::Kind::Converged);
    REQUIRE(moved.kind == LimitOutcome::Kind::Converged);
    CHECK(m->chart_distance(base.value, moved.value) <= 4e-7);
  }
}

TEST_CASE("orientations: e fixes, neg inverts, neg.neg composes to e") {
  auto m = magma("ext_real_add");
  auto e = orientation(*m, "e");
  auto neg = orientation(*m, "neg");
  CHECK(value_equal(e.apply(7.5), 7.5));
  CHECK(value_equal(neg.apply(7.5), -7.5));
  CHECK(num(neg.apply(kInf)) == -kInf);
  CHECK(value_equal(neg.apply(neg.apply(3.0)), 3.0));
  CHECK(compose_orientations("neg", "neg") == "e");
  CHECK(compose_orientations("e", "neg") == "neg");

  auto mul = magma("pos_mul");
  auto inv = orientation(*mul, "neg");
  CHECK(num(inv.apply(4.0)) == doctest::Approx(0.25));

  auto nn = magma("ext_nonneg_add");
  CHECK_THROWS_AS(orientation(*nn, "neg"), Error);  // not a group
}

TEST_CASE("unknown registry keys are reported") {
  CHECK_THROWS_AS(magma("tropical"), Error);
}
