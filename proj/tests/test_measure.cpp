#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mcalc/measure.hpp"

using namespace mcalc;

namespace {

double uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1p-53; }

SpacePtr line() {
  static SpacePtr sp = Space::interval(Rat(0), Rat(4));
  return sp;
}

Region ivr(std::initializer_list<std::pair<Rat, Rat>> ivs) {
  std::vector<Cell> cs;
  for (const auto& [a, b] : ivs) cs.push_back(IntervalCell{iv(a, b)});
  return Region(line(), std::move(cs));
}

Region random_region(std::mt19937_64& rng) {
  std::vector<Cell> cs;
  int n = 1 + (int)(uniform(rng) * 3);
  for (int i = 0; i < n; ++i) {
    long long a = (long long)(uniform(rng) * 32);
    long long b = (long long)(uniform(rng) * 32);
    if (b < a) std::swap(a, b);
    cs.push_back(IntervalCell{iv(Rat(a, 8), Rat(b, 8))});
  }
  return Region(line(), std::move(cs));
}

}  // namespace

TEST_CASE("lebesgue length with classification") {
  MeasurePtr leb = Measure::lebesgue(line());
  auto r = measure_eval(*leb, ivr({{Rat(0), Rat(1, 2)}, {Rat(3, 4), Rat(1)}}));
  CHECK(num(r.v) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(r.cls == MeasureClass::Finite);

  auto z = measure_eval(*leb, Region());
  CHECK(num(z.v) == 0.0);
  CHECK(z.cls == MeasureClass::Zero);

  SpacePtr whole_line = Space::interval(std::nullopt, std::nullopt);
  MeasurePtr leb_full = Measure::lebesgue(whole_line);
  auto inf = measure_eval(*leb_full, full_region(whole_line));
  CHECK(num(inf.v) == HUGE_VAL);
  CHECK(inf.cls == MeasureClass::Infinite);

  // every measure sends the empty region to the identity
  for (const MeasurePtr& mu :
       {leb, Measure::counting(line()), Measure::dirac(line(), Rat(1, 3)),
        Measure::zero(line(), magma("ext_real_add"))}) {
    auto e = measure_eval(*mu, Region());
    CHECK(e.cls == MeasureClass::Zero);
  }
}

TEST_CASE("lebesgue measures area on faces and length on edge segments") {
  SpacePtr faces = Space::grid_faces(Rat(0), Rat(0), Rat(2), Rat(2));
  MeasurePtr area = Measure::lebesgue(faces);
  Region l = region_difference(full_region(faces),
                               Region(faces, {RectCell{iv(Rat(1), Rat(2)), iv(Rat(1), Rat(2))}}));
  CHECK(num(measure_eval(*area, l).v) == doctest::Approx(3.0).epsilon(1e-14));

  SpacePtr edges = Space::grid_edges(Rat(0), Rat(0), Rat(2), Rat(2));
  MeasurePtr len = Measure::lebesgue(edges);
  Region border(edges, {EdgeCell{false, Rat(0), iv(Rat(0), Rat(2))},
                        EdgeCell{true, Rat(2), iv(Rat(0), Rat(2))}});
  CHECK(num(measure_eval(*len, border).v) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("counting weighs discrete cells and blows up on continuum cells") {
  MeasurePtr cnt = Measure::counting(line());
  Region pts = ivr({{Rat(1), Rat(1)}, {Rat(2), Rat(2)}, {Rat(3), Rat(3)}});
  auto r = measure_eval(*cnt, pts);
  CHECK(num(r.v) == 3.0);
  CHECK(r.cls == MeasureClass::Finite);
  CHECK(measure_eval(*cnt, ivr({{Rat(0), Rat(1)}})).cls == MeasureClass::Infinite);

  auto g = std::make_shared<GraphData>();
  g->vertices = {0, 1, 2};
  g->edges = {{0, 1}, {1, 2}};
  SpacePtr gv = Space::graph_vertices(g);
  CHECK(num(measure_eval(*Measure::counting(gv), full_region(gv)).v) == 3.0);
  CHECK(num(measure_eval(*Measure::counting(gv, 0.5), full_region(gv)).v) == 1.5);
}

TEST_CASE("dirac point mass uses exact membership") {
  MeasurePtr d = Measure::dirac(line(), Rat(1, 3));
  CHECK(num(measure_eval(*d, ivr({{Rat(0), Rat(1)}})).v) == 1.0);
  CHECK(num(measure_eval(*d, ivr({{Rat(1, 2), Rat(1)}})).v) == 0.0);
  CHECK(num(measure_eval(*d, ivr({{Rat(1, 3), Rat(1, 3)}})).v) == 1.0);  // boundary hit

  SpacePtr faces = Space::grid_faces(Rat(0), Rat(0), Rat(2), Rat(2));
  MeasurePtr d2 = Measure::dirac(faces, Rat(1, 2), Rat(3, 2));
  CHECK(num(measure_eval(*d2, full_region(faces)).v) == 1.0);
  CHECK(num(measure_eval(*d2, Region(faces, {RectCell{iv(Rat(1), Rat(2)), iv(Rat(0), Rat(1))}})).v) ==
        0.0);
}

TEST_CASE("measure addition is pointwise") {
  MeasurePtr leb = Measure::lebesgue(line());
  MeasurePtr two = measure_add(leb, leb);
  CHECK(num(measure_eval(*two, ivr({{Rat(0), Rat(1)}})).v) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(two->lebesgue_scale() == 2.0);
  CHECK(two->additive());

  // identity of the measure magma: mu + zero == mu on sampled regions
  MeasurePtr z = Measure::zero(line(), magma("ext_real_add"));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    Region A = random_region(rng);
    auto lhs = measure_eval(*measure_add(leb, z), A);
    auto rhs = measure_eval(*leb, A);
    CHECK(value_equal(lhs.v, rhs.v));
    CHECK(lhs.cls == rhs.cls);
  }

  // commutativity/associativity follow the codomain flags
  MeasurePtr d = Measure::dirac(line(), Rat(1, 3));
  for (int i = 0; i < 100; ++i) {
    Region A = random_region(rng);
    CHECK(value_equal(measure_eval(*measure_add(leb, d), A).v,
                      measure_eval(*measure_add(d, leb), A).v));
    CHECK(value_equal(
        measure_eval(*measure_add(measure_add(leb, d), z), A).v,
        measure_eval(*measure_add(leb, measure_add(d, z)), A).v));
  }
}

TEST_CASE("sum of two infinite measures is rejected lazily") {
  SpacePtr whole_line = Space::interval(std::nullopt, std::nullopt);
  MeasurePtr leb = Measure::lebesgue(whole_line);
  MeasurePtr sum = measure_add(leb, leb);
  Region finite(whole_line, {IntervalCell{iv(Rat(0), Rat(1))}});
  CHECK(num(measure_eval(*sum, finite).v) == doctest::Approx(2.0));  // fine while finite
  CHECK_THROWS_WITH_AS(measure_eval(*sum, full_region(whole_line)),
                       doctest::Contains("undefined-pair"), Error);
}

TEST_CASE("orientation composes with measures") {
  MeasurePtr leb = Measure::lebesgue(line());
  OrientationMap neg = orientation(*leb->codomain(), "neg");
  OrientationMap e = orientation(*leb->codomain(), "e");

  CHECK(num(measure_eval(*oriented_measure(neg, leb), ivr({{Rat(0), Rat(1)}})).v) ==
        doctest::Approx(-1.0).epsilon(1e-14));

  std::mt19937_64 rng(22);
  MeasurePtr z = Measure::zero(line(), magma("ext_real_add"));
  for (int i = 0; i < 100; ++i) {
    Region A = random_region(rng);
    CHECK(value_equal(measure_eval(*oriented_measure(e, leb), A).v, measure_eval(*leb, A).v));
    CHECK(value_equal(measure_eval(*oriented_measure(neg, z), A).v, measure_eval(*z, A).v));
  }

  // infinite values pass through unoriented but flagged
  SpacePtr whole_line = Space::interval(std::nullopt, std::nullopt);
  MeasurePtr leb_full = Measure::lebesgue(whole_line);
  OrientationMap neg_f = orientation(*leb_full->codomain(), "neg");
  auto r = measure_eval(*oriented_measure(neg_f, leb_full), full_region(whole_line));
  CHECK(r.cls == MeasureClass::Infinite);
  CHECK(r.oriented_deferred);
  CHECK(!measure_eval(*oriented_measure(neg_f, leb_full),
                      Region(whole_line, {IntervalCell{iv(Rat(0), Rat(1))}}))
             .oriented_deferred);
}

TEST_CASE("additive measures respect random disjoint decompositions") {
  MeasurePtr leb = Measure::lebesgue(line());
  MeasurePtr d = Measure::dirac(line(), Rat(1, 3));  // off the dyadic cut grid
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    // random dyadic cuts of [0,4] into <= 8 consecutive parts
    std::vector<Rat> cuts{Rat(0)};
    int parts = 2 + (int)(uniform(rng) * 6);
    for (int i = 0; i < parts - 1; ++i) cuts.push_back(Rat(1 + (long long)(uniform(rng) * 63), 16));
    cuts.push_back(Rat(4));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double leb_sum = 0.0, dirac_sum = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      Region part = ivr({{cuts[i], cuts[i + 1]}});
      leb_sum += num(measure_eval(*leb, part).v);
      dirac_sum += num(measure_eval(*d, part).v);
    }
    CHECK(leb_sum == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(dirac_sum == 1.0);
  }
}

TEST_CASE("registration rejects additive claims on noncommutative codomains") {
  MagmaPtr fm = magma("free:ab");
  auto assign = [fm](const Region&) { return Measure::Raw{fm->identity()}; };
  CHECK_THROWS_AS(Measure::custom("bad", line(), fm, true, assign), Error);
  MeasurePtr ok = Measure::custom("formal", line(), fm, false, assign);
  CHECK(measure_eval(*ok, ivr({{Rat(0), Rat(1)}})).cls == MeasureClass::Zero);
}

TEST_CASE("table measures key on canonical region form") {
  std::map<std::string, Value> entries;
  entries[ivr({{Rat(0), Rat(1)}}).str()] = Value{5.0};
  MeasurePtr t = Measure::table(line(), magma("ext_real_add"), entries);
  // non-canonical input normalizes to the same key
  Region split = ivr({{Rat(0), Rat(1, 2)}, {Rat(1, 2), Rat(1)}});
  CHECK(num(measure_eval(*t, split).v) == 5.0);
  CHECK(measure_eval(*t, ivr({{Rat(2), Rat(3)}})).cls == MeasureClass::Zero);
  CHECK(!t->additive());
}

TEST_CASE("restriction to a subspace") {
  Region s = ivr({{Rat(0), Rat(1)}});
  SpacePtr sub = subspace_algebra(line(), s);
  MeasurePtr leb = restrict_measure(Measure::lebesgue(line()), sub);
  CHECK(num(measure_eval(*leb, full_region(sub)).v) == doctest::Approx(1.0).epsilon(1e-14));
  // regions outside the carrier are rejected
  CHECK_THROWS_WITH_AS(measure_eval(*leb, ivr({{Rat(2), Rat(3)}})),
                       doctest::Contains("mixed-spaces"), Error);
}

TEST_CASE("measure registry keys") {
  CHECK(measure_by_key("lebesgue", line())->id() == "lebesgue");
  CHECK(measure_by_key("counting", line())->id() == "counting");
  CHECK(num(measure_eval(*measure_by_key("dirac:1/3", line()), ivr({{Rat(0), Rat(1)}})).v) == 1.0);
  SpacePtr faces = Space::grid_faces(Rat(0), Rat(0), Rat(2), Rat(2));
  CHECK(num(measure_eval(*measure_by_key("dirac:(1/2,1/2)", faces), full_region(faces)).v) == 1.0);
  auto g = std::make_shared<GraphData>();
  g->vertices = {0, 1};
  g->edges = {{0, 1}};
  SpacePtr gv = Space::graph_vertices(g);
  CHECK(num(measure_eval(*measure_by_key("dirac:v1", gv), full_region(gv)).v) == 1.0);
  CHECK_THROWS_WITH_AS(measure_by_key("gauss", line()), doctest::Contains("unknown-key"), Error);
  CHECK_THROWS_AS(measure_by_key("dirac:", line()), Error);
}
