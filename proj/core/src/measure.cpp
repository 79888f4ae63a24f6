#include "mcalc/measure.hpp"

#include <algorithm>
#include <cmath>

namespace mcalc {

const char* measure_class_name(MeasureClass c) {
  switch (c) {
    case MeasureClass::Zero: return "zero";
    case MeasureClass::Finite: return "finite";
    case MeasureClass::Infinite: return "infinite";
  }
  return "?";
}

namespace {

MeasureClass classify(const Magma& m, const Value& v) {
  if (m.is_extension_point(v)) return MeasureClass::Infinite;
  if (value_equal(v, m.identity())) return MeasureClass::Zero;
  return MeasureClass::Finite;
}

bool iv_has(const Iv& i, const Rat& p) {
  REnd e = REnd::at(p);
  return i.lo <= e && e <= i.hi;
}

}  // namespace

MeasurePtr Measure::custom(std::string id, SpacePtr space, MagmaPtr codomain, bool additive,
                           AssignFn assign, double lebesgue_scale) {
  if (!space || !codomain || !assign) fail(Err::Schema, "measure needs space/codomain/assign");
  if (additive && !codomain->commutative())
    fail(Err::Schema, "additive measure needs a commutative codomain: " + codomain->id());
  Measure m;
  m.id_ = std::move(id);
  m.space_ = std::move(space);
  m.codomain_ = std::move(codomain);
  m.additive_ = additive;
  m.lebesgue_scale_ = lebesgue_scale;
  m.assign_ = std::move(assign);
  return std::make_shared<Measure>(std::move(m));
}

MeasurePtr Measure::lebesgue(SpacePtr space, double scale) {
  if (scale <= 0.0) fail(Err::Schema, "lebesgue scale must be positive");
  // values are nonnegative with +inf absorbing, so a plain double sum agrees
  // with the codomain fold
  auto assign = [scale](const Region& A) {
    double total = 0.0;
    for (const Cell& c : A.cells()) total += scale * cell_content(c);
    return Raw{Value{total}};
  };
  std::string id = scale == 1.0 ? "lebesgue" : "lebesgue*" + std::to_string(scale);
  return custom(std::move(id), std::move(space), magma("ext_real_add"), true, assign, scale);
}

MeasurePtr Measure::counting(SpacePtr space, double weight) {
  if (weight <= 0.0) fail(Err::Schema, "counting weight must be positive");
  // counts the primitive points of the space: discrete cells weigh `weight`,
  // continuum cells hold infinitely many points
  auto assign = [weight](const Region& A) {
    double total = 0.0;
    for (const Cell& c : A.cells()) {
      bool discrete = std::holds_alternative<VertexCell>(c) ||
                      std::holds_alternative<GVertexCell>(c) ||
                      std::holds_alternative<GEdgeCell>(c) || cell_degenerate(c);
      total += discrete ? weight : HUGE_VAL;
    }
    return Raw{Value{total}};
  };
  std::string id = weight == 1.0 ? "counting" : "counting*" + std::to_string(weight);
  return custom(std::move(id), std::move(space), magma("ext_real_add"), true, assign, 0.0);
}

MeasurePtr Measure::dirac(SpacePtr space, const Rat& x) {
  if (!space || space->kind() != Space::Kind::Interval1D)
    fail(Err::Schema, "scalar dirac point needs an interval space");
  auto assign = [x](const Region& A) {
    for (const Cell& c : A.cells())
      if (iv_has(std::get<IntervalCell>(c).iv, x)) return Measure::Raw{Value{1.0}};
    return Measure::Raw{Value{0.0}};
  };
  return custom("dirac:" + rat_str(x), std::move(space), magma("ext_real_add"), true, assign);
}

MeasurePtr Measure::dirac(SpacePtr space, const Rat& x, const Rat& y) {
  if (!space) fail(Err::Schema, "dirac needs a space");
  auto hit = [x, y](const Cell& c) -> bool {
    if (const auto* r = std::get_if<RectCell>(&c)) return iv_has(r->x, x) && iv_has(r->y, y);
    if (const auto* e = std::get_if<EdgeCell>(&c))
      return e->vertical ? (e->offset == x && iv_has(e->span, y))
                         : (e->offset == y && iv_has(e->span, x));
    if (const auto* v = std::get_if<VertexCell>(&c)) return v->x == x && v->y == y;
    return false;
  };
  switch (space->kind()) {
    case Space::Kind::GridFaces:
    case Space::Kind::GridEdges:
    case Space::Kind::GridVertices:
      break;
    default:
      fail(Err::Schema, "planar dirac point needs a grid space");
  }
  auto assign = [hit](const Region& A) {
    for (const Cell& c : A.cells())
      if (hit(c)) return Measure::Raw{Value{1.0}};
    return Measure::Raw{Value{0.0}};
  };
  return custom("dirac:(" + rat_str(x) + "," + rat_str(y) + ")", std::move(space),
                magma("ext_real_add"), true, assign);
}

MeasurePtr Measure::dirac_vertex(SpacePtr space, int id) {
  if (!space || space->kind() != Space::Kind::GraphVertices)
    fail(Err::Schema, "vertex dirac needs a graph-vertex space");
  auto assign = [id](const Region& A) {
    for (const Cell& c : A.cells())
      if (std::get<GVertexCell>(c).id == id) return Measure::Raw{Value{1.0}};
    return Measure::Raw{Value{0.0}};
  };
  return custom("dirac:v" + std::to_string(id), std::move(space), magma("ext_real_add"), true,
                assign);
}

MeasurePtr Measure::zero(SpacePtr space, MagmaPtr codomain) {
  Value idv = codomain->identity();
  bool additive = codomain->commutative();
  auto assign = [idv](const Region&) { return Raw{idv}; };
  return custom("zero", std::move(space), std::move(codomain), additive, assign);
}

MeasurePtr Measure::table(SpacePtr space, MagmaPtr codomain,
                          std::map<std::string, Value> entries, bool additive) {
  Value idv = codomain->identity();
  auto assign = [entries = std::move(entries), idv](const Region& A) {
    auto it = entries.find(A.str());
    return Raw{it == entries.end() ? idv : it->second};
  };
  return custom("table", std::move(space), std::move(codomain), additive, std::move(assign));
}

MeasureValue measure_eval(const Measure& mu, const Region& A) {
  const Magma& m = *mu.codomain();
  if (A.empty()) return {m.identity(), MeasureClass::Zero, false};
  if (!region_in_space(A, *mu.space()))
    fail(Err::MixedSpaces, "region " + A.str() + " is not in the measure's space");
  Measure::Raw r = mu.raw_assign(A);
  if (!m.in_extended(r.v))
    fail(Err::Schema, "measure value " + value_str(r.v) + " outside codomain " + m.id());
  return {r.v, classify(m, r.v), r.deferred};
}

MeasurePtr measure_add(const MeasurePtr& a, const MeasurePtr& b) {
  if (!a || !b) fail(Err::Schema, "measure_add needs two measures");
  if (!a->space()->compatible(*b->space()))
    fail(Err::MixedSpaces, "measure_add across different spaces");
  if (a->codomain()->id() != b->codomain()->id())
    fail(Err::Schema, "measure_add across codomains " + a->codomain()->id() + " and " +
                          b->codomain()->id());
  MagmaPtr cod = a->codomain();
  auto assign = [a, b, cod](const Region& A) {
    Measure::Raw ra = a->raw_assign(A), rb = b->raw_assign(A);
    if (cod->is_extension_point(ra.v) && cod->is_extension_point(rb.v))
      fail(Err::UndefinedPair, "sum of two infinite measures on " + A.str());
    return Measure::Raw{cod->op(ra.v, rb.v), ra.deferred || rb.deferred};
  };
  double scale = (a->lebesgue_scale() > 0 && b->lebesgue_scale() > 0)
                     ? a->lebesgue_scale() + b->lebesgue_scale()
                     : 0.0;
  return Measure::custom("(" + a->id() + "+" + b->id() + ")", a->space(), cod,
                         a->additive() && b->additive(), std::move(assign), scale);
}

MeasurePtr oriented_measure(const OrientationMap& iota, const MeasurePtr& mu) {
  if (!mu) fail(Err::Schema, "oriented_measure needs a measure");
  MagmaPtr cod = mu->codomain();
  const auto& ids = cod->orientation_ids();
  if (std::find(ids.begin(), ids.end(), iota.id) == ids.end())
    fail(Err::Schema, "orientation " + iota.id + " is not defined on " + cod->id());
  auto apply = iota.apply;
  auto assign = [mu, cod, apply](const Region& A) {
    Measure::Raw r = mu->raw_assign(A);
    if (cod->is_extension_point(r.v)) return Measure::Raw{r.v, true};
    Value w = apply(r.v);
    return Measure::Raw{w, r.deferred};
  };
  bool is_e = iota.id == "e";
  // the built-in orientation maps are magma homomorphisms, so additivity is
  // preserved by composition
  return Measure::custom(is_e ? mu->id() : iota.id + "*" + mu->id(), mu->space(), cod,
                         mu->additive(), std::move(assign),
                         is_e ? mu->lebesgue_scale() : 0.0);
}

MeasurePtr restrict_measure(const MeasurePtr& mu, SpacePtr subspace) {
  if (!mu || !subspace) fail(Err::Schema, "restrict_measure needs a measure and a space");
  if (!mu->space()->compatible(*subspace))
    fail(Err::MixedSpaces, "subspace from another space family");
  auto assign = [mu](const Region& A) { return mu->raw_assign(A); };
  return Measure::custom(mu->id(), std::move(subspace), mu->codomain(), mu->additive(),
                         std::move(assign), mu->lebesgue_scale());
}

MeasurePtr measure_by_key(const std::string& key, SpacePtr space) {
  if (key == "lebesgue") return Measure::lebesgue(std::move(space));
  if (key == "counting") return Measure::counting(std::move(space));
  if (key.rfind("dirac:", 0) == 0) {
    std::string p = key.substr(6);
    if (p.empty()) fail(Err::Schema, "dirac needs a point");
    if (p[0] == 'v' && p.find_first_not_of("0123456789", 1) == std::string::npos && p.size() > 1)
      return Measure::dirac_vertex(std::move(space), std::stoi(p.substr(1)));
    if (p.front() == '(' && p.back() == ')') {
      std::string body = p.substr(1, p.size() - 2);
      auto comma = body.find(',');
      if (comma == std::string::npos) fail(Err::Schema, "planar dirac point needs two coordinates");
      return Measure::dirac(std::move(space), rat_parse(body.substr(0, comma)),
                            rat_parse(body.substr(comma + 1)));
    }
    return Measure::dirac(std::move(space), rat_parse(p));
  }
  fail(Err::UnknownKey, "no measure named '" + key + "'");
}

}  // namespace mcalc
