#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mcalc/disintegrate.hpp"

using namespace mcalc;

namespace {

Region seg(const SpacePtr& sp, const Rat& a, const Rat& b) {
  return Region(sp, {Cell(IntervalCell{iv(a, b)})});
}

Region pt(const SpacePtr& sp, const Rat& p) {
  return Region(sp, {Cell(IntervalCell{iv_point(p)})});
}

double at(const MeasurePtr& mu, const Region& r) { return num(measure_eval(*mu, r).v); }

// exact structural check: the measure's space is the subspace algebra of
// exactly this carrier region
void check_carrier(const MeasurePtr& mu, const SpacePtr& parent, const Region& carrier) {
  REQUIRE(mu->space()->restricted());
  CHECK(Region(parent, mu->space()->restriction()).str() == carrier.str());
}

}  // namespace

TEST_CASE("interval endpoints") {
  auto cx = chain_complex("interval1d");
  auto d = disintegration(cx, 1);
  const SpacePtr& segs = cx->level(1).coll.space;
  const SpacePtr& pts = cx->level(0).coll.space;
  Chain c(1, {{"e", seg(segs, Rat(0), Rat(1))}});

  SUBCASE("lebesgue maps to unit counting on the endpoints") {
    MeasurePtr nu = disintegrate(*d, c, Measure::lebesgue(segs));
    CHECK(at(nu, pt(pts, Rat(0))) == 1.0);
    CHECK(at(nu, pt(pts, Rat(1))) == 1.0);
    CHECK(at(nu, region_union(pt(pts, Rat(0)), pt(pts, Rat(1)))) == 2.0);
    Chain b = chain_reduce(cx->boundary(c));
    check_carrier(nu, pts, b.base_set());
    CHECK_THROWS_AS(measure_eval(*nu, pt(pts, Rat(1, 2))), Error);
  }

  SUBCASE("scaling commutes with the map") {
    MeasurePtr nu1 = disintegrate(*d, c, Measure::lebesgue(segs));
    MeasurePtr nu7 = disintegrate(*d, c, Measure::lebesgue(segs, 3.5));
    CHECK(at(nu7, pt(pts, Rat(1))) == doctest::Approx(3.5 * at(nu1, pt(pts, Rat(1)))));
  }

  SUBCASE("interior seams carry no mass") {
    Chain split(1, {{"e", seg(segs, Rat(0), Rat(1, 2))}, {"e", seg(segs, Rat(1, 2), Rat(1))}});
    MeasurePtr nu = disintegrate(*d, split, Measure::lebesgue(segs));
    Region ends = region_union(pt(pts, Rat(0)), pt(pts, Rat(1)));
    check_carrier(nu, pts, ends);
    CHECK(at(nu, ends) == 2.0);
    CHECK_THROWS_AS(measure_eval(*nu, pt(pts, Rat(1, 2))), Error);
  }

  SUBCASE("fundamental theorem pairing") {
    auto calc = calculus("riemann");
    auto f = FunctionExpr::parse("x^2", calc->y);
    MeasurePtr nu = disintegrate(*d, c, Measure::lebesgue(segs));
    IAReport rep = integrate_chain(chain_reduce(cx->boundary(c)), f, nu, calc);
    REQUIRE(rep.verdict == Verdict::Defined);
    CHECK(num(rep.value) == doctest::Approx(1.0));  // f(1) - f(0)
  }

  SUBCASE("dirac has no boundary image") {
    auto ok = decomposable_check(*d, Measure::lebesgue(segs));
    CHECK(ok.decomposable);
    CHECK(ok.reason.find("length-class") != std::string::npos);
    auto bad = decomposable_check(*d, Measure::dirac(segs, Rat(1, 2)));
    CHECK_FALSE(bad.decomposable);
    CHECK(bad.reason.find("dirac:1/2") != std::string::npos);
    try {
      disintegrate(*d, c, Measure::dirac(segs, Rat(1, 2)));
      FAIL("expected NotDecomposable");
    } catch (const Error& e) {
      CHECK(e.kind() == Err::NotDecomposable);
    }
  }

  SUBCASE("zero maps to zero") {
    MeasurePtr z = Measure::zero(segs, magma("ext_real_add"));
    auto rep = decomposable_check(*d, z);
    CHECK(rep.decomposable);
    MeasurePtr nu = disintegrate(*d, c, z);
    CHECK(nu->id() == "zero");
    CHECK(measure_eval(*nu, pt(pts, Rat(0))).cls == MeasureClass::Zero);
  }
}

TEST_CASE("square boundary arclength") {
  auto cx = chain_complex("rect2d:2x2");
  const SpacePtr& faces = cx->level(2).coll.space;
  const SpacePtr& edges = cx->level(1).coll.space;
  const SpacePtr& verts = cx->level(0).coll.space;
  Region sq(faces, {Cell(RectCell{iv(Rat(0), Rat(1)), iv(Rat(0), Rat(1))})});
  Chain c(2, {{"e", sq}});
  auto d2 = disintegration(cx, 2);

  SUBCASE("area maps to unit length on each boundary edge") {
    MeasurePtr nu = disintegrate(*d2, c, Measure::lebesgue(faces));
    Region bottom(edges, {Cell(EdgeCell{false, Rat(0), iv(Rat(0), Rat(1))})});
    Region right(edges, {Cell(EdgeCell{true, Rat(1), iv(Rat(0), Rat(1))})});
    CHECK(at(nu, bottom) == doctest::Approx(1.0));
    CHECK(at(nu, right) == doctest::Approx(1.0));
    Chain b = chain_reduce(cx->boundary(c));
    CHECK(at(nu, b.base_set()) == doctest::Approx(4.0));
    check_carrier(nu, edges, b.base_set());
  }

  SUBCASE("shared interior edges are cut out") {
    Region sq2(faces, {Cell(RectCell{iv(Rat(1), Rat(2)), iv(Rat(0), Rat(1))})});
    Chain two(2, {{"e", sq}, {"e", sq2}});
    MeasurePtr nu = disintegrate(*d2, two, Measure::lebesgue(faces));
    Chain b = chain_reduce(cx->boundary(two));
    CHECK(b.terms().size() == 6);
    CHECK(at(nu, b.base_set()) == doctest::Approx(6.0));
    Region shared(edges, {Cell(EdgeCell{true, Rat(1), iv(Rat(0), Rat(1))})});
    CHECK_THROWS_AS(measure_eval(*nu, shared), Error);
  }

  SUBCASE("edge chains map to counting on the open ends") {
    auto d1 = disintegration(cx, 1);
    Region bottom(edges, {Cell(EdgeCell{false, Rat(0), iv(Rat(0), Rat(1))})});
    Region right(edges, {Cell(EdgeCell{true, Rat(1), iv(Rat(0), Rat(1))})});
    Chain path(1, {{"e", bottom}, {"e", right}});
    MeasurePtr mu = Measure::lebesgue(edges);
    REQUIRE(decomposable_check(*d1, mu).decomposable);
    MeasurePtr nu = disintegrate(*d1, path, mu);
    Region c00(verts, {Cell(VertexCell{Rat(0), Rat(0)})});
    Region c11(verts, {Cell(VertexCell{Rat(1), Rat(1)})});
    CHECK(at(nu, c00) == 1.0);
    CHECK(at(nu, c11) == 1.0);
    Region c10(verts, {Cell(VertexCell{Rat(1), Rat(0)})});
    CHECK_THROWS_AS(measure_eval(*nu, c10), Error);
  }
}

TEST_CASE("graph incident weights") {
  const char* path = "test_graph_disint.txt";
  {
    std::ofstream out(path);
    out << "v 1\nv 2\nv 3\ne 1 2\ne 2 3\n";
  }
  auto cx = chain_complex(std::string("graph:") + path);
  auto d = disintegration(cx, 1);
  const SpacePtr& edges = cx->level(1).coll.space;
  const SpacePtr& verts = cx->level(0).coll.space;
  Region e12(edges, {Cell(GEdgeCell{1, 2})});
  Region e23(edges, {Cell(GEdgeCell{2, 3})});
  Region v1(verts, {Cell(GVertexCell{1})});
  Region v2(verts, {Cell(GVertexCell{2})});
  Region v3(verts, {Cell(GVertexCell{3})});

  SUBCASE("weights sum over all incident edges") {
    Chain c(1, {{"e", e12}});
    MeasurePtr nu = disintegrate(*d, c, Measure::counting(edges, 2.0));
    CHECK(at(nu, v1) == 2.0);
    CHECK(at(nu, v2) == 4.0);  // e1-2 and e2-3 both touch vertex 2
  }

  SUBCASE("table weights; interior vertices cancel out of the carrier") {
    MeasurePtr mu = Measure::table(edges, magma("ext_real_add"),
                                   {{e12.str(), Value{3.0}}, {e23.str(), Value{5.0}}}, true);
    REQUIRE(decomposable_check(*d, mu).decomposable);
    Chain c(1, {{"e", e12}, {"e", e23}});
    MeasurePtr nu = disintegrate(*d, c, mu);
    Chain b = chain_reduce(cx->boundary(c));
    CHECK(b.base_set().str() == region_union(v1, v3).str());
    CHECK(at(nu, v1) == 3.0);
    CHECK(at(nu, v3) == 5.0);
    check_carrier(nu, verts, b.base_set());
  }

  SUBCASE("non-additive weights are refused") {
    MeasurePtr mu =
        Measure::table(edges, magma("ext_real_add"), {{e12.str(), Value{3.0}}}, false);
    auto rep = decomposable_check(*d, mu);
    CHECK_FALSE(rep.decomposable);
    CHECK(rep.reason.find("additive") != std::string::npos);
  }

  std::remove(path);
}

TEST_CASE("composition annihilates") {
  SUBCASE("rect2d: corners after edges after faces") {
    auto cx = chain_complex("rect2d:2x2");
    const SpacePtr& faces = cx->level(2).coll.space;
    Region sq(faces, {Cell(RectCell{iv(Rat(0), Rat(1)), iv(Rat(0), Rat(1))})});
    Chain c(2, {{"e", sq}});
    for (double scale : {1.0, 1.5}) {
      MeasurePtr nu1 = disintegrate(*disintegration(cx, 2), c, Measure::lebesgue(faces, scale));
      Chain b1 = chain_reduce(cx->boundary(c));
      auto d1 = disintegration(cx, 1);
      CHECK(decomposable_check(*d1, nu1).decomposable);
      MeasurePtr nu0 = disintegrate(*d1, b1, nu1);
      CHECK(nu0->id() == "zero");
      CHECK(chain_reduce(cx->boundary(b1)).is_empty());
      Region corner(cx->level(0).coll.space, {Cell(VertexCell{Rat(0), Rat(0)})});
      CHECK(measure_eval(*nu0, corner).cls == MeasureClass::Zero);
    }
  }

  SUBCASE("interval1d: level 0 after level 1") {
    auto cx = chain_complex("interval1d");
    const SpacePtr& segs = cx->level(1).coll.space;
    Chain c(1, {{"e", seg(segs, Rat(0), Rat(1))}});
    MeasurePtr nu1 = disintegrate(*disintegration(cx, 1), c, Measure::lebesgue(segs));
    Chain b1 = chain_reduce(cx->boundary(c));
    auto d0 = disintegration(cx, 0);
    CHECK(decomposable_check(*d0, nu1).decomposable);
    MeasurePtr nu0 = disintegrate(*d0, b1, nu1);
    CHECK(nu0->id() == "zero");
    CHECK(chain_reduce(cx->boundary(b1)).is_empty());
  }

  SUBCASE("graph: level 0 after level 1") {
    const char* path = "test_graph_disint2.txt";
    {
      std::ofstream out(path);
      out << "v 1\nv 2\ne 1 2\n";
    }
    auto cx = chain_complex(std::string("graph:") + path);
    const SpacePtr& edges = cx->level(1).coll.space;
    Chain c(1, {{"e", Region(edges, {Cell(GEdgeCell{1, 2})})}});
    MeasurePtr nu1 = disintegrate(*disintegration(cx, 1), c, Measure::counting(edges));
    Chain b1 = chain_reduce(cx->boundary(c));
    MeasurePtr nu0 = disintegrate(*disintegration(cx, 0), b1, nu1);
    CHECK(nu0->id() == "zero");
    std::remove(path);
  }
}

TEST_CASE("registry and argument errors") {
  auto cx = chain_complex("interval1d");
  const SpacePtr& segs = cx->level(1).coll.space;
  const SpacePtr& pts = cx->level(0).coll.space;

  try {
    disintegration(cx, 5);
    FAIL("expected LevelMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::LevelMismatch);
  }

  auto d1 = disintegration(cx, 1);
  Chain p(0, {{"e", pt(pts, Rat(0))}});
  try {
    disintegrate(*d1, p, Measure::lebesgue(segs));
    FAIL("expected LevelMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::LevelMismatch);
  }

  auto cx2 = chain_complex("rect2d:2x2");
  Chain c(1, {{"e", seg(segs, Rat(0), Rat(1))}});
  try {
    disintegrate(*d1, c, Measure::lebesgue(cx2->level(2).coll.space));
    FAIL("expected MixedSpaces");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::MixedSpaces);
  }

  MeasurePtr nu = disintegrate(*d1, Chain::empty(1), Measure::lebesgue(segs));
  CHECK(nu->id() == "zero");
}
