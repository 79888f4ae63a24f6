#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mcalc/calculus.hpp"
#include "mcalc/errors.hpp"
#include "mcalc/integrate.hpp"
#include "support/oracles.hpp"

using namespace mcalc;

namespace {

SpacePtr line01() { return Space::interval(Rat(0), Rat(1)); }
SpacePtr line(long long a, long long b) { return Space::interval(Rat(a), Rat(b)); }

Region seg(const SpacePtr& sp, const Rat& a, const Rat& b) {
  return Region(sp, {Cell(IntervalCell{iv(a, b)})});
}

double uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1p-53; }

}  // namespace

TEST_CASE("reference quadrature is trustworthy") {
  // The quadrature oracle is validated against closed forms before anything
  // else leans on it.
  CHECK(oracle::quad([](double x) { return x * x; }, 0, 1) ==
        doctest::Approx(oracle::monomial(2, 0, 1)).epsilon(1e-12));
  CHECK(oracle::monomial(2, 0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(oracle::quad([](double x) { return std::exp(x); }, 0, 1) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(oracle::product_integral([](double x) { return std::exp(x); }, 0, 1) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-10));
  CHECK(std::abs(std::exp(0.5) - 1.6487212707001282) < 1e-15);
}

TEST_CASE("calculus registration runs the element laws") {
  CHECK(calculus("riemann")->id == "riemann");
  CHECK(calculus("product")->id == "product");
  CHECK(calculus("free:abmn")->id == "free:abmn");
  CHECK(calculus("free:abmn:mfirst")->elem.order == ExpansionOrder::MFirst);
  CHECK_THROWS_AS(calculus("nope"), Error);

  // A pairing that fails distributivity is rejected with a named law.
  IntegrationElement broken{"broken",
                            magma("real_add"),
                            magma("ext_real_add"),
                            magma("ext_real_add"),
                            ExpansionOrder::YFirst,
                            [](const Value& a, const Value& m) -> Value {
                              return num(a) * num(m) + 1.0;
                            }};
  CHECK_THROWS_WITH_AS(check_element(broken), doctest::Contains("distributivity"), Error);
}

TEST_CASE("expansion order fixes the cross-term tree") {
  auto sp = line01();
  Region S = seg(sp, Rat(0), Rat(1));
  auto yfirst = calculus("free:abmn");
  auto mfirst = calculus("free:abmn:mfirst");

  Value fh = yfirst->y->op(Value(FreeTerm::atom("a")), Value(FreeTerm::atom("b")));
  auto mu = Measure::table(sp, yfirst->m, {{S.str(), Value(FreeTerm::atom("m"))}});
  auto nu = Measure::table(sp, yfirst->m, {{S.str(), Value(FreeTerm::atom("n"))}});
  auto both = measure_add(mu, nu);

  SimpleFunction s(yfirst->y, {{S, fh}});
  Value ty = simple_integral(s, *both, S, yfirst->elem);
  Value tm = simple_integral(s, *both, S, mfirst->elem);
  // Hand expansion of g(a+b, m+n): function argument first, then measure.
  CHECK(term(ty).str() == "(((a m) (a n)) ((b m) (b n)))");
  // Measure argument first, then function.
  CHECK(term(tm).str() == "(((a m) (b m)) ((a n) (b n)))");
  CHECK(term(ty).str() != term(tm).str());
}

TEST_CASE("simple integral worked examples") {
  auto sp = line01();
  auto riem = calculus("riemann");
  auto leb = Measure::lebesgue(sp);
  Region U = seg(sp, Rat(0), Rat(1));

  SUBCASE("step function against direct arithmetic") {
    SimpleFunction s(riem->y, {{seg(sp, Rat(0), Rat(1, 2)), 3.0},
                               {seg(sp, Rat(1, 2), Rat(1)), 1.0}});
    const double expected = 3.0 * 0.5 + 1.0 * 0.5;
    CHECK(expected == 2.0);
    CHECK(num(simple_integral(s, *leb, U, riem->elem)) == doctest::Approx(expected).epsilon(1e-15));
  }

  SUBCASE("geometric element takes measure-powers") {
    auto prod = calculus("product");
    SimpleFunction s(prod->y, {{seg(sp, Rat(0), Rat(1, 2)), 4.0}});
    const double expected = std::pow(4.0, 0.5);
    CHECK(expected == 2.0);
    CHECK(num(simple_integral(s, *leb, U, prod->elem)) == doctest::Approx(expected).epsilon(1e-15));
  }

  SUBCASE("identity coefficients are dropped, order is kept") {
    SimpleFunction s(riem->y, {{seg(sp, Rat(0), Rat(1, 4)), 3.0},
                               {seg(sp, Rat(1, 4), Rat(1, 2)), 0.0},
                               {seg(sp, Rat(1, 2), Rat(1)), 1.0}});
    REQUIRE(s.terms().size() == 2);
    CHECK(num(s.terms()[0].coeff) == 3.0);
    CHECK(num(s.terms()[1].coeff) == 1.0);
  }

  SUBCASE("pointwise value folds the containing terms") {
    SimpleFunction s(riem->y, {{seg(sp, Rat(0), Rat(3, 4)), 2.0},
                               {seg(sp, Rat(1, 2), Rat(1)), 5.0}});
    CHECK(num(s.eval(Point::at(0.25))) == 2.0);
    CHECK(num(s.eval(Point::at(0.9))) == 5.0);
    CHECK(num(s.eval(Point::at(0.6))) == 7.0);
  }

  SUBCASE("infinite-measure intersection is NotIntegrable with the term index") {
    auto whole = Space::interval(std::nullopt, std::nullopt);
    Region full = full_region(whole);
    SimpleFunction s(riem->y, {{full, 1.0}});
    CHECK_THROWS_WITH_AS(
        simple_integral(s, *Measure::lebesgue(whole), full, riem->elem),
        doctest::Contains("term 0"), Error);
  }

  SUBCASE("integral additivity across measures and concatenation") {
    auto dir = Measure::dirac(sp, Rat(1, 3));
    auto sum = measure_add(leb, dir);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      auto rand_sf = [&] {
        std::vector<SimpleTerm> ts;
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
          long long a = static_cast<long long>(rng() % 16);
          long long b = a + 1 + static_cast<long long>(rng() % (16 - a));
          ts.push_back({seg(sp, Rat(a, 16), Rat(b, 16)), uniform(rng) * 10.0 - 5.0});
        }
        return SimpleFunction(calculus("riemann")->y, std::move(ts));
      };
      SimpleFunction f = rand_sf(), h = rand_sf();
      double lhs = num(simple_integral(f, *sum, U, riem->elem));
      double rhs = num(simple_integral(f, *leb, U, riem->elem)) +
                   num(simple_integral(f, *dir, U, riem->elem));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
      double cat = num(simple_integral(sf_concat(f, h), *leb, U, riem->elem));
      double split = num(simple_integral(f, *leb, U, riem->elem)) +
                     num(simple_integral(h, *leb, U, riem->elem));
      CHECK(cat == doctest::Approx(split).epsilon(1e-9));
    }
  }
}

TEST_CASE("tagged partitions") {
  auto sp = line01();
  auto ra = magma("real_add");
  auto leb = Measure::lebesgue(sp);
  Region U = seg(sp, Rat(0), Rat(1));
  auto fx = FunctionExpr::parse("x", ra);

  SUBCASE("depth-1 left tags on f=x") {
    SimpleFunction s = riemann_policy("uniform", "left").generate(fx, U, *leb, 1);
    // f(0) = 0 is the identity coefficient, so only the right half survives
    REQUIRE(s.terms().size() == 1);
    CHECK(s.str() == "0.5*[1/2,1]");
    CHECK(num(simple_integral(s, *leb, U, calculus("riemann")->elem)) == 0.25);
  }

  SUBCASE("dyadic cuts sit on the absolute grid, uniform cuts do not") {
    Region V = seg(sp, Rat(1, 4), Rat(1));
    SimpleFunction d = riemann_policy("dyadic", "midpoint").generate(fx, V, *leb, 1);
    REQUIRE(d.terms().size() == 2);
    CHECK(d.terms()[0].region.str() == "[1/4,1/2]");
    CHECK(d.terms()[1].region.str() == "[1/2,1]");
    SimpleFunction u = riemann_policy("uniform", "midpoint").generate(fx, V, *leb, 1);
    REQUIRE(u.terms().size() == 2);
    CHECK(u.terms()[0].region.str() == "[1/4,5/8]");
    CHECK(u.terms()[1].region.str() == "[5/8,1]");
  }

  SUBCASE("randomized splits are seed-stable, nested, and balanced") {
    auto gen = [&](std::uint64_t seed, int depth) {
      return riemann_policy("randomized", "midpoint", seed).generate(fx, U, *leb, depth);
    };
    CHECK(gen(1, 3).str() == gen(1, 3).str());
    CHECK(gen(1, 3).str() != gen(2, 3).str());
    SimpleFunction coarse = gen(1, 2), fine = gen(1, 3);
    for (const SimpleTerm& t : fine.terms()) {
      int parents = 0;
      for (const SimpleTerm& c : coarse.terms())
        if (region_subset(t.region, c.region)) ++parents;
      CHECK(parents == 1);
    }
    for (const SimpleTerm& c : coarse.terms()) {
      const Iv& ivc = std::get<IntervalCell>(c.region.cells()[0]).iv;
      double w = rat_num(ivc.hi.r - ivc.lo.r);
      CHECK(w >= std::pow(0.39, 2));
      CHECK(w <= std::pow(0.61, 2));
    }
  }

  SUBCASE("space and codomain guards") {
    auto faces = Space::grid_faces(Rat(0), Rat(0), Rat(1), Rat(1));
    Region R(faces, {Cell(RectCell{iv(Rat(0), Rat(1)), iv(Rat(0), Rat(1))})});
    CHECK_THROWS_AS(riemann_policy("uniform", "midpoint").generate(fx, R, *leb, 1), Error);
    try {
      riemann_policy("uniform", "midpoint").generate(fx, R, *leb, 1);
    } catch (const Error& e) {
      CHECK(e.kind() == Err::WrongSpaceKind);
    }
    auto fpos = FunctionExpr::parse("exp(x)", magma("real_add"));
    try {
      geometric_policy("uniform", "midpoint").generate(fpos, U, *leb, 1);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == Err::WrongCodomain);
    }
  }
}

TEST_CASE("ia integration of x^2 is Defined at the oracle value") {
  auto sp = line01();
  Region U = seg(sp, Rat(0), Rat(1));
  auto leb = Measure::lebesgue(sp);
  auto riem = calculus("riemann");
  auto f = FunctionExpr::parse("x^2", riem->y);

  const double want = oracle::monomial(2, 0, 1);
  std::vector<IAPolicy> pols = {
      riemann_policy("uniform", "left"), riemann_policy("uniform", "right"),
      riemann_policy("uniform", "midpoint"), riemann_policy("randomized", "midpoint", 7)};
  IAReport rep = ia_integrate(f, leb, U, riem->elem, pols, 1e-4, kDefaultCap);
  CHECK(rep.verdict == Verdict::Defined);
  CHECK(std::abs(num(rep.value) - want) < 2e-4);
  REQUIRE(rep.traces.size() == 4);
  for (const PolicyTrace& t : rep.traces) {
    CHECK(t.outcome.converged());
    CHECK(static_cast<int>(t.values.size()) == t.outcome.steps);
    CHECK(std::abs(num(t.outcome.value) - want) < 5e-4);
  }
  // determinism: a second run reproduces every depth value bit for bit
  IAReport rep2 = ia_integrate(f, leb, U, riem->elem, pols, 1e-4, kDefaultCap);
  REQUIRE(rep2.traces.size() == rep.traces.size());
  for (size_t i = 0; i < rep.traces.size(); ++i) {
    REQUIRE(rep2.traces[i].values.size() == rep.traces[i].values.size());
    for (size_t k = 0; k < rep.traces[i].values.size(); ++k)
      CHECK(value_str(rep2.traces[i].values[k]) == value_str(rep.traces[i].values[k]));
  }
}

TEST_CASE("geometric product integral of e^x") {
  auto sp = line01();
  Region U = seg(sp, Rat(0), Rat(1));
  auto leb = Measure::lebesgue(sp);
  auto prod = calculus("product");
  auto f = FunctionExpr::parse("exp(x)", prod->y);

  const double want = oracle::product_integral([](double x) { return std::exp(x); }, 0, 1);
  std::vector<IAPolicy> pols = {geometric_policy("uniform", "midpoint"),
                                geometric_policy("dyadic", "midpoint"),
                                geometric_policy("randomized", "midpoint", 11)};
  IAReport rep = ia_integrate(f, leb, U, prod->elem, pols, kDefaultTol, kDefaultCap);
  CHECK(rep.verdict == Verdict::Defined);
  CHECK(std::abs(num(rep.value) - want) < 1e-4);
}

TEST_CASE("lebesgue policy") {
  auto sp = line01();
  Region U = seg(sp, Rat(0), Rat(1));
  auto leb = Measure::lebesgue(sp);
  auto riem = calculus("riemann");
  auto ra = riem->y;

  SUBCASE("step function integrates exactly from depth 1") {
    Region left = seg(sp, Rat(0), Rat(1, 2)), right = seg(sp, Rat(1, 2), Rat(1));
    auto f = FunctionExpr::piecewise({{left, FunctionExpr::constant(3.0, ra)},
                                      {right, FunctionExpr::constant(1.0, ra)}},
                                     ra);
    IAReport rep = ia_integrate(f, leb, U, riem->elem, {lebesgue_policy()}, 1e-6, 8);
    CHECK(rep.verdict == Verdict::Defined);
    CHECK(num(rep.value) == 2.0);                 // exact, not approximate
    CHECK(num(rep.traces[0].values[0]) == 2.0);   // already exact at depth 1
  }

  SUBCASE("dominance holds pointwise on samples") {
    auto f = FunctionExpr::parse("x^2", ra);
    SimpleFunction s4 = lebesgue_policy().generate(f, U, *leb, 4);
    SimpleFunction s5 = lebesgue_policy().generate(f, U, *leb, 5);
    auto g = FunctionExpr::parse("-x", ra);
    SimpleFunction t4 = lebesgue_policy().generate(g, U, *leb, 4);
    SimpleFunction t5 = lebesgue_policy().generate(g, U, *leb, 5);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      double x = uniform(rng);
      Point p = Point::at(x);
      double fs4 = num(s4.eval(p)), fs5 = num(s5.eval(p));
      CHECK(std::abs(fs4) <= std::abs(num(f.eval(p))) + 1e-12);
      CHECK(std::abs(fs4) <= std::abs(fs5) + 1e-12);
      double gt4 = num(t4.eval(p)), gt5 = num(t5.eval(p));
      CHECK(std::abs(gt4) <= std::abs(num(g.eval(p))) + 1e-12);
      CHECK(std::abs(gt4) <= std::abs(gt5) + 1e-12);
      CHECK(gt4 <= 0.0);  // the approximation keeps the sign of f
    }
  }

  SUBCASE("agrees with the riemann value within 2 tol") {
    auto f = FunctionExpr::parse("x^2", ra);
    const double tol = 1e-5;
    IAReport rep = ia_integrate(f, leb, U, riem->elem,
                                {riemann_policy("uniform", "midpoint"), lebesgue_policy()}, tol,
                                kDefaultCap);
    CHECK(rep.verdict == Verdict::Defined);
    double vriem = 0, vleb = 0;
    for (const PolicyTrace& t : rep.traces) {
      if (t.policy == "lebesgue") vleb = num(t.outcome.value);
      else vriem = num(t.outcome.value);
    }
    CHECK(std::abs(vleb - vriem) < 2 * tol);
    CHECK(std::abs(num(rep.value) - oracle::monomial(2, 0, 1)) < 1e-4);
  }
}

TEST_CASE("principal value policies on 1/x") {
  auto sp = line(-1, 1);
  Region U = seg(sp, Rat(-1), Rat(1));
  auto leb = Measure::lebesgue(sp);
  auto riem = calculus("riemann");
  auto f = FunctionExpr::parse("1/x", riem->y);

  // Oracles: the symmetric exclusion cancels an odd integrand to 0; the
  // shifted window [-e, 4e] leaves integral log(e) - log(4e) = -log 4.
  const double gap_oracle = std::log(4.0);
  CHECK(gap_oracle > 0.1);

  IAPolicy sym = policy_by_key("pv:sym:riemann:uniform:midpoint");
  IAPolicy shift = policy_by_key("pv:shift:riemann:uniform:midpoint");
  CHECK(symmetric_exclusion(sym));
  CHECK_FALSE(symmetric_exclusion(shift));

  IAReport rep = ia_integrate(f, leb, U, riem->elem, {sym, shift}, 1e-4, 16);
  CHECK(rep.verdict == Verdict::Undefined);
  CHECK(rep.witness.find("pv:sym") != std::string::npos);
  CHECK(rep.witness.find("pv:shift") != std::string::npos);

  double vsym = 0, vshift = 0;
  for (const PolicyTrace& t : rep.traces) {
    if (t.policy == sym.id) vsym = num(t.outcome.value);
    else vshift = num(t.outcome.value);
  }
  CHECK(std::abs(vsym) < 1e-9);
  CHECK(std::abs(vshift - (-gap_oracle)) < 0.08);  // midpoint bias near the window edge
  CHECK(std::abs(vsym - vshift) > 0.1);

  // verdict and witness are invariant under reordering and duplication
  IAReport r2 = ia_integrate(f, leb, U, riem->elem, {shift, sym}, 1e-4, 16);
  IAReport r3 = ia_integrate(f, leb, U, riem->elem, {shift, sym, sym}, 1e-4, 16);
  CHECK(r2.verdict == Verdict::Undefined);
  CHECK(r3.verdict == Verdict::Undefined);
  CHECK(r2.witness == rep.witness);
  CHECK(r3.witness == rep.witness);

  // the principal-value restriction keeps only symmetric exclusions
  auto restricted = restrict_policies({sym, shift}, symmetric_exclusion);
  REQUIRE(restricted.size() == 1);
  IAReport pv = ia_integrate(f, leb, U, riem->elem, restricted, 1e-4, 16);
  CHECK(pv.verdict == Verdict::Defined);
  CHECK(std::abs(num(pv.value)) < 1e-9);
}

TEST_CASE("divergence to infinity is flagged at the cap") {
  auto sp = line01();
  // (0,1] in the closed-cell algebra; midpoint tags never touch 0
  Region U = seg(sp, Rat(0), Rat(1));
  auto leb = Measure::lebesgue(sp);
  auto riem = calculus("riemann");
  auto f = FunctionExpr::parse("1/x", riem->y);

  std::vector<IAPolicy> pols = {riemann_policy("uniform", "midpoint"),
                                riemann_policy("dyadic", "midpoint"),
                                riemann_policy("randomized", "midpoint", 3)};
  IAReport rep = ia_integrate(f, leb, U, riem->elem, pols, 1e-6, 14);
  CHECK(rep.verdict == Verdict::FundamentallyUndefinedAtCap);
  REQUIRE(rep.divergence.has_value());
  CHECK(is_num(*rep.divergence));
  CHECK(std::isinf(num(*rep.divergence)));
  CHECK(num(*rep.divergence) > 0);
  CHECK(rep.witness.find("drift") != std::string::npos);

  // a policy that does settle flips the verdict to the mixed case
  std::vector<IAPolicy> mixed = {riemann_policy("uniform", "midpoint"), atomic_policy()};
  IAReport mix = ia_integrate(f, leb, U, riem->elem, mixed, 1e-6, 14);
  CHECK(mix.verdict == Verdict::NoNumericLimitAtCap);
  CHECK(mix.witness.find("atomic") != std::string::npos);
}

TEST_CASE("free calculus keeps order and converges atomically") {
  auto sp = line01();
  auto calc = calculus("free:abmn");
  Region S1 = seg(sp, Rat(0), Rat(1, 2)), S2 = seg(sp, Rat(1, 2), Rat(1));

  auto mu = Measure::table(sp, calc->m,
                           {{S1.str(), Value(FreeTerm::atom("m"))},
                            {S2.str(), Value(FreeTerm::atom("n"))}});

  SUBCASE("term order changes the output tree") {
    SimpleFunction fwd(calc->y, {{S1, Value(FreeTerm::atom("a"))}, {S2, Value(FreeTerm::atom("b"))}});
    SimpleFunction rev(calc->y, {{S2, Value(FreeTerm::atom("b"))}, {S1, Value(FreeTerm::atom("a"))}});
    Region U = region_union(S1, S2);
    Value vf = simple_integral(fwd, *mu, U, calc->elem);
    Value vr = simple_integral(rev, *mu, U, calc->elem);
    CHECK(term(vf).str() == "((a m) (b n))");
    CHECK(term(vr).str() == "((b n) (a m))");
    CHECK(term(vf) != term(vr));
  }

  SUBCASE("atomic ia run is Defined at the formal tree") {
    auto f = FunctionExpr::parse("a", calc->y);
    IAReport rep = ia_integrate(f, mu, S1, calc->elem, {atomic_policy()}, 1e-6, 8);
    CHECK(rep.verdict == Verdict::Defined);
    CHECK(term(rep.value).str() == "(a m)");
    CHECK(rep.traces[0].outcome.steps == kLimitWindow);  // constant sequence
  }
}

TEST_CASE("policy registry") {
  CHECK(policy_by_key("riemann:uniform:midpoint").id == "riemann:uniform:midpoint");
  CHECK(policy_by_key("geometric:dyadic:left").id == "geometric:dyadic:left");
  CHECK(policy_by_key("lebesgue").id == "lebesgue");
  CHECK(policy_by_key("grid2d:center").id == "grid2d:center");
  CHECK(policy_by_key("edge:midpoint").id == "edge:midpoint");
  CHECK(policy_by_key("atomic").id == "atomic");
  CHECK(policy_by_key("pv:sym:riemann:dyadic:left").id == "pv:sym:riemann:dyadic:left");
  CHECK_THROWS_AS(policy_by_key("riemann:spiral:midpoint"), Error);
  CHECK_THROWS_AS(policy_by_key("nope"), Error);
  try {
    policy_by_key("nope");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::UnknownKey);
  }
}
