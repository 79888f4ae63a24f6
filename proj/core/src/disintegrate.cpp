#include "mcalc/disintegrate.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace mcalc {

namespace {

bool zero_measure(const MeasurePtr& mu) { return mu->id() == "zero"; }

std::string num_str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Length/area/edge-length membership: the factory-made Lebesgue-class
// measures advertise their scale, everything else (Dirac, counting, tables)
// has none and no registered boundary image.
DecomposableReport continuum_class(const MeasurePtr& mu, const char* cls) {
  if (zero_measure(mu)) return {true, "zero measure; the image is the zero measure"};
  if (mu->lebesgue_scale() > 0.0)
    return {true, std::string(cls) + "-class measure, scale " + num_str(mu->lebesgue_scale())};
  return {false, "no registered boundary image for '" + mu->id() + "' (" + cls +
                     "-class or zero measure required)"};
}

MeasurePtr zero_image(const SpacePtr& fallback, const Chain& b, const MeasurePtr& mu) {
  SpacePtr carrier = b.is_empty() ? fallback : subspace_algebra(fallback, b.base_set());
  return Measure::zero(carrier, mu->codomain());
}

}  // namespace

DisintegrationPtr disintegration(const ComplexPtr& cx, int level) {
  if (!cx) fail(Err::Schema, "disintegration needs a complex");
  if (level < 0 || level > cx->top())
    fail(Err::LevelMismatch, "complex '" + cx->id() + "' has levels 0.." +
                                 std::to_string(cx->top()) + ", asked for " +
                                 std::to_string(level));
  auto d = std::shared_ptr<Disintegration>(new Disintegration());
  d->level_ = level;
  d->complex_ = cx;

  if (level == 0) {
    d->decomposable_ = [](const MeasurePtr&) -> DecomposableReport {
      return {true, "level-0 boundaries are empty; every measure maps to the zero measure"};
    };
    d->map_ = [cx](const Chain&, const Chain&, const MeasurePtr& mu) {
      return Measure::zero(cx->level(0).coll.space, mu->codomain());
    };
    return d;
  }

  Space::Kind kind = cx->level(level).coll.space->kind();

  if (kind == Space::Kind::Interval1D && level == 1) {
    d->decomposable_ = [](const MeasurePtr& mu) { return continuum_class(mu, "length"); };
    d->map_ = [cx](const Chain&, const Chain& b, const MeasurePtr& mu) -> MeasurePtr {
      const SpacePtr& pts = cx->level(0).coll.space;
      if (zero_measure(mu) || b.is_empty()) return zero_image(pts, b, mu);
      return Measure::counting(subspace_algebra(pts, b.base_set()), mu->lebesgue_scale());
    };
    return d;
  }

  if (kind == Space::Kind::GridFaces && level == 2) {
    d->decomposable_ = [](const MeasurePtr& mu) { return continuum_class(mu, "area"); };
    d->map_ = [cx](const Chain&, const Chain& b, const MeasurePtr& mu) -> MeasurePtr {
      const SpacePtr& edges = cx->level(1).coll.space;
      if (zero_measure(mu) || b.is_empty()) return zero_image(edges, b, mu);
      return Measure::lebesgue(subspace_algebra(edges, b.base_set()), mu->lebesgue_scale());
    };
    return d;
  }

  if (kind == Space::Kind::GridEdges && level == 1) {
    d->decomposable_ = [](const MeasurePtr& mu) { return continuum_class(mu, "edge-length"); };
    d->map_ = [cx](const Chain&, const Chain& b, const MeasurePtr& mu) -> MeasurePtr {
      const SpacePtr& verts = cx->level(0).coll.space;
      if (zero_measure(mu) || b.is_empty()) return zero_image(verts, b, mu);
      return Measure::counting(subspace_algebra(verts, b.base_set()), mu->lebesgue_scale());
    };
    return d;
  }

  if (kind == Space::Kind::GraphEdges && level == 1) {
    d->decomposable_ = [cx](const MeasurePtr& mu) -> DecomposableReport {
      if (zero_measure(mu)) return {true, "zero measure; the image is the zero measure"};
      if (!mu->additive())
        return {false, "graph disintegration needs additive edge weights, '" + mu->id() +
                           "' is not additive"};
      if (!is_num(mu->codomain()->identity()))
        return {false, "graph edge weights need a numeric codomain, got " +
                           mu->codomain()->id()};
      const SpacePtr& edges = cx->level(1).coll.space;
      for (const auto& e : edges->graph()->edges) {
        Region r(edges, {Cell(GEdgeCell{e.first, e.second})});
        if (!region_in_space(r, *mu->space())) continue;
        if (measure_eval(*mu, r).cls == MeasureClass::Infinite)
          return {false, "edge " + cell_str(Cell(GEdgeCell{e.first, e.second})) +
                             " carries infinite weight"};
      }
      return {true, "per-edge weights"};
    };
    // Vertex weights sum over ALL incident edges of the graph, not just the
    // chain's edges: a chain-local weighting would break additivity of the
    // boundary integral over chain concatenation at interior vertices.
    d->map_ = [cx](const Chain&, const Chain& b, const MeasurePtr& mu) -> MeasurePtr {
      const SpacePtr& verts = cx->level(0).coll.space;
      if (zero_measure(mu) || b.is_empty()) return zero_image(verts, b, mu);
      const SpacePtr& edges = cx->level(1).coll.space;
      auto weights = std::make_shared<std::map<int, double>>();
      for (const auto& e : edges->graph()->edges) {
        Region r(edges, {Cell(GEdgeCell{e.first, e.second})});
        if (!region_in_space(r, *mu->space())) continue;
        double w = num(measure_eval(*mu, r).v);
        (*weights)[e.first] += w;
        (*weights)[e.second] += w;
      }
      auto assign = [weights](const Region& A) {
        double total = 0.0;
        for (const Cell& cell : A.cells()) {
          auto it = weights->find(std::get<GVertexCell>(cell).id);
          if (it != weights->end()) total += it->second;
        }
        return Measure::Raw{Value{total}};
      };
      return Measure::custom("incident-weight", subspace_algebra(verts, b.base_set()),
                             magma("ext_real_add"), true, std::move(assign));
    };
    return d;
  }

  fail(Err::UnknownKey, "no disintegration registered for complex '" + cx->id() +
                            "' at level " + std::to_string(level));
}

DecomposableReport decomposable_check(const Disintegration& d, const MeasurePtr& mu) {
  if (!mu) return {false, "null measure"};
  return d.decomposable_(mu);
}

MeasurePtr disintegrate(const Disintegration& d, const Chain& c, const MeasurePtr& mu) {
  if (!mu) fail(Err::Schema, "disintegrate needs a measure");
  if (!c.is_empty() && c.level() != d.level())
    fail(Err::LevelMismatch, "chain at level " + std::to_string(c.level()) +
                                 ", disintegration at level " + std::to_string(d.level()));
  const SpacePtr& lvl = d.complex()->level(d.level()).coll.space;
  if (!mu->space()->compatible(*lvl))
    fail(Err::MixedSpaces,
         "measure on " + mu->space()->str() + " does not match level space " + lvl->str());
  DecomposableReport rep = decomposable_check(d, mu);
  if (!rep.decomposable) fail(Err::NotDecomposable, rep.reason);
  Chain b = chain_reduce(d.complex()->boundary(c));
  return d.map_(c, b, mu);
}

}  // namespace mcalc
