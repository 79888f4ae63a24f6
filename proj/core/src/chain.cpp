#include "mcalc/chain.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace mcalc {

namespace {

int verdict_rank(Verdict v) {
  switch (v) {
    case Verdict::Defined: return 0;
    case Verdict::Undefined: return 1;
    case Verdict::NoNumericLimitAtCap: return 2;
    case Verdict::FundamentallyUndefinedAtCap: return 3;
  }
  return 3;
}

}  // namespace

Chain::Chain(int level, std::vector<ChainTerm> terms) : level_(level), terms_(std::move(terms)) {
  if (level_ < 0) fail(Err::LevelMismatch, "chain level must be >= 0");
  for (const ChainTerm& t : terms_) {
    if (t.orientation.empty()) fail(Err::Schema, "chain term needs an orientation id");
    if (t.region.empty()) fail(Err::Schema, "chain term region is empty; drop the term instead");
    if (!terms_.front().region.space()->compatible(*t.region.space()))
      fail(Err::MixedSpaces, "chain terms live in different spaces");
  }
}

Region Chain::base_set() const {
  Region u;
  for (const ChainTerm& t : terms_) u = u.empty() ? t.region : region_union(u, t.region);
  return u;
}

std::string Chain::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const ChainTerm& t : terms_) {
    if (!out.empty()) out += " ++ ";
    out += t.orientation + "*" + t.region.str();
  }
  return out;
}

Chain chain_add(const Chain& a, const Chain& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  if (a.level() != b.level())
    fail(Err::LevelMismatch, "cannot concatenate chains at levels " +
                                 std::to_string(a.level()) + " and " + std::to_string(b.level()));
  if (!a.terms().front().region.space()->compatible(*b.terms().front().region.space()))
    fail(Err::MixedSpaces, "cannot concatenate chains from different spaces");
  std::vector<ChainTerm> terms = a.terms();
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return Chain(a.level(), std::move(terms));
}

Chain chain_reduce(const Chain& c) {
  if (c.is_empty()) return c;
  auto signedness = [](const ChainTerm& t) {
    return t.orientation == "e" ? 1 : t.orientation == "neg" ? -1 : 0;
  };
  std::map<std::string, long> net;
  for (const ChainTerm& t : c.terms()) net[t.region.str()] += signedness(t);
  std::map<std::string, long> kept;
  std::vector<ChainTerm> out;
  for (const ChainTerm& t : c.terms()) {
    int s = signedness(t);
    if (s == 0) {
      out.push_back(t);
      continue;
    }
    long n = net[t.region.str()];
    if (n != 0 && (n > 0) == (s > 0) && kept[t.region.str()] < std::labs(n)) {
      out.push_back(t);
      ++kept[t.region.str()];
    }
  }
  if (out.empty()) return Chain::empty(c.level());
  return Chain(c.level(), std::move(out));
}

const ChainComplex::Level& ChainComplex::level(int n) const {
  if (n < 0 || n > top())
    fail(Err::LevelMismatch, id_ + " has levels 0.." + std::to_string(top()) + ", not " +
                                 std::to_string(n));
  return levels_[static_cast<size_t>(n)];
}

Chain ChainComplex::make(int n, std::vector<ChainTerm> terms) const {
  const Level& lv = level(n);
  for (const ChainTerm& t : terms) {
    const auto& admitted = lv.calc->orientations;
    if (std::find(admitted.begin(), admitted.end(), t.orientation) == admitted.end())
      fail(Err::UnknownKey,
           "orientation '" + t.orientation + "' is not admitted by the " + lv.calc->id +
               " calculus");
    if (!lv.coll.membership(t.region))
      fail(Err::Schema, "region " + t.region.str() + " is not a level-" + std::to_string(n) +
                            " member of " + id_);
  }
  return Chain(n, std::move(terms));
}

Chain ChainComplex::boundary(const Chain& c) const {
  if (c.is_empty()) return Chain::empty(c.level() - 1);
  int n = c.level();
  level(n);  // bounds check
  if (n == 0) return Chain::empty(-1);
  const SpacePtr& target = levels_[static_cast<size_t>(n - 1)].coll.space;

  std::vector<ChainTerm> out;
  auto emit = [&](const std::string& iota, const char* side, Cell cell) {
    out.push_back({compose_orientations(iota, side), Region(target, {std::move(cell)})});
  };
  for (const ChainTerm& t : c.terms()) {
    for (const Cell& cell : t.region.cells()) {
      if (const auto* ic = std::get_if<IntervalCell>(&cell)) {
        emit(t.orientation, "e", IntervalCell{iv_point(ic->iv.hi.r)});
        emit(t.orientation, "neg", IntervalCell{iv_point(ic->iv.lo.r)});
      } else if (const auto* rc = std::get_if<RectCell>(&cell)) {
        // counterclockwise circulation: bottom, right, top and left reversed
        emit(t.orientation, "e", EdgeCell{false, rc->y.lo.r, rc->x});
        emit(t.orientation, "e", EdgeCell{true, rc->x.hi.r, rc->y});
        emit(t.orientation, "neg", EdgeCell{false, rc->y.hi.r, rc->x});
        emit(t.orientation, "neg", EdgeCell{true, rc->x.lo.r, rc->y});
      } else if (const auto* ec = std::get_if<EdgeCell>(&cell)) {
        if (ec->vertical) {
          emit(t.orientation, "e", VertexCell{ec->offset, ec->span.hi.r});
          emit(t.orientation, "neg", VertexCell{ec->offset, ec->span.lo.r});
        } else {
          emit(t.orientation, "e", VertexCell{ec->span.hi.r, ec->offset});
          emit(t.orientation, "neg", VertexCell{ec->span.lo.r, ec->offset});
        }
      } else if (const auto* ge = std::get_if<GEdgeCell>(&cell)) {
        emit(t.orientation, "e", GVertexCell{ge->v});
        emit(t.orientation, "neg", GVertexCell{ge->u});
      } else {
        fail(Err::Schema, "no boundary rule for cell " + cell_str(cell) + " in " + id_);
      }
    }
  }
  return Chain(n - 1, std::move(out));
}

namespace {

bool cells_all(const Region& r, bool degenerate) {
  for (const Cell& c : r.cells())
    if (cell_degenerate(c) != degenerate) return false;
  return true;
}

std::vector<ChainComplex::Level> interval1d_levels() {
  SpacePtr line = Space::interval(std::nullopt, std::nullopt);
  CalculusPtr calc = calculus("riemann");

  IntegrableCollection points;
  points.space = line;
  for (int k = 0; k <= 8; ++k)
    points.generators.push_back(Region(line, {Cell(IntervalCell{iv_point(Rat(k, 8))})}));
  points.membership = [line](const Region& r) {
    return !r.empty() && region_in_space(r, *line) && cells_all(r, true);
  };

  IntegrableCollection segments;
  segments.space = line;
  for (int k = 0; k < 8; ++k)
    segments.generators.push_back(
        Region(line, {Cell(IntervalCell{iv(Rat(k, 8), Rat(k + 1, 8))})}));
  segments.membership = [line](const Region& r) {
    return !r.empty() && region_in_space(r, *line) && cells_all(r, false);
  };

  return {{std::move(points), calc}, {std::move(segments), calc}};
}

std::vector<ChainComplex::Level> rect2d_levels(long long w, long long h) {
  if (w < 1 || h < 1 || w > 64 || h > 64)
    fail(Err::Schema, "rect2d grid sides must be in 1..64");
  SpacePtr faces = Space::grid_faces(Rat(0), Rat(0), Rat(w), Rat(h));
  SpacePtr edges = Space::grid_edges(Rat(0), Rat(0), Rat(w), Rat(h));
  SpacePtr verts = Space::grid_vertices(Rat(0), Rat(0), Rat(w), Rat(h));
  CalculusPtr calc = calculus("riemann");

  auto in_space = [](SpacePtr sp) {
    return [sp](const Region& r) { return !r.empty() && region_in_space(r, *sp); };
  };

  IntegrableCollection v0{verts, {}, in_space(verts)};
  IntegrableCollection e1{edges, {}, in_space(edges)};
  IntegrableCollection f2{faces, {}, in_space(faces)};
  for (long long i = 0; i <= std::min<long long>(w, 4); ++i)
    for (long long j = 0; j <= std::min<long long>(h, 4); ++j) {
      v0.generators.push_back(Region(verts, {Cell(VertexCell{Rat(i), Rat(j)})}));
      if (i < w)
        e1.generators.push_back(Region(edges, {Cell(EdgeCell{false, Rat(j), iv(Rat(i), Rat(i + 1))})}));
      if (j < h)
        e1.generators.push_back(Region(edges, {Cell(EdgeCell{true, Rat(i), iv(Rat(j), Rat(j + 1))})}));
      if (i < w && j < h)
        f2.generators.push_back(
            Region(faces, {Cell(RectCell{iv(Rat(i), Rat(i + 1)), iv(Rat(j), Rat(j + 1))})}));
    }

  return {{std::move(v0), calc}, {std::move(e1), calc}, {std::move(f2), calc}};
}

std::vector<ChainComplex::Level> graph_levels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::Schema, "cannot read graph file '" + path + "'");
  auto g = std::make_shared<GraphData>();
  std::string tag;
  for (std::string ln; std::getline(in, ln);) {
    std::istringstream row(ln);
    if (!(row >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      int id;
      if (!(row >> id)) fail(Err::Schema, "graph file: bad vertex line '" + ln + "'");
      g->vertices.push_back(id);
    } else if (tag == "e") {
      int u, v;
      if (!(row >> u >> v)) fail(Err::Schema, "graph file: bad edge line '" + ln + "'");
      g->edges.emplace_back(u, v);
    } else {
      fail(Err::Schema, "graph file: unknown line tag '" + tag + "'");
    }
  }
  std::sort(g->vertices.begin(), g->vertices.end());
  g->vertices.erase(std::unique(g->vertices.begin(), g->vertices.end()), g->vertices.end());
  for (auto [u, v] : g->edges)
    if (!g->has_vertex(u) || !g->has_vertex(v))
      fail(Err::Schema, "graph file: edge endpoint not declared as a vertex");

  SpacePtr verts = Space::graph_vertices(g);
  SpacePtr edges = Space::graph_edges(g);
  CalculusPtr calc = calculus("riemann");

  IntegrableCollection v0;
  v0.space = verts;
  for (int id : g->vertices) v0.generators.push_back(Region(verts, {Cell(GVertexCell{id})}));
  v0.membership = [verts](const Region& r) { return !r.empty() && region_in_space(r, *verts); };

  IntegrableCollection e1;
  e1.space = edges;
  for (auto [u, v] : g->edges) e1.generators.push_back(Region(edges, {Cell(GEdgeCell{u, v})}));
  e1.membership = [edges](const Region& r) { return !r.empty() && region_in_space(r, *edges); };

  return {{std::move(v0), calc}, {std::move(e1), calc}};
}

}  // namespace

ComplexPtr chain_complex(const std::string& key) {
  static std::map<std::string, ComplexPtr> cache;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<ChainComplex::Level> levels;
  if (key == "interval1d") {
    levels = interval1d_levels();
  } else if (key.rfind("rect2d:", 0) == 0) {
    std::string dims = key.substr(7);
    size_t x = dims.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == dims.size())
      fail(Err::Schema, "rect2d key needs the form rect2d:<W>x<H>");
    long long w = 0, h = 0;
    try {
      w = std::stoll(dims.substr(0, x));
      h = std::stoll(dims.substr(x + 1));
    } catch (const std::exception&) {
      fail(Err::Schema, "rect2d key needs integer sides");
    }
    levels = rect2d_levels(w, h);
  } else if (key.rfind("graph:", 0) == 0) {
    levels = graph_levels(key.substr(6));
  } else {
    fail(Err::UnknownKey, "no chain complex registered as '" + key + "'");
  }

  auto cx = std::shared_ptr<ChainComplex>(new ChainComplex());
  cx->id_ = key;
  cx->levels_ = std::move(levels);
  cache.emplace(key, cx);
  return cx;
}

IAReport integrate_chain(const Chain& c, const FunctionExpr& f, const MeasurePtr& mu,
                         const CalculusPtr& calc, double tol, int cap,
                         std::vector<IAPolicy> policies, std::uint64_t seed) {
  if (!calc) fail(Err::Schema, "integrate_chain needs a calculus");
  if (!mu) fail(Err::Schema, "integrate_chain needs a measure");

  IAReport rep;
  rep.tol = tol;
  rep.cap = cap;
  if (c.is_empty()) {
    rep.verdict = Verdict::Defined;
    rep.value = calc->g_out->identity();
    return rep;
  }

  const SpacePtr& sp = c.terms().front().region.space();
  if (!mu->space()->compatible(*sp))
    fail(Err::MixedSpaces, "measure space does not match the chain's space");
  if (policies.empty()) policies = calc->default_policies(sp->kind(), seed);

  std::vector<IAReport> parts;
  parts.reserve(c.terms().size());
  for (size_t k = 0; k < c.terms().size(); ++k) {
    const ChainTerm& t = c.terms()[k];
    const auto& admitted = calc->orientations;
    if (std::find(admitted.begin(), admitted.end(), t.orientation) == admitted.end())
      fail(Err::UnknownKey, "orientation '" + t.orientation + "' is not admitted by the " +
                                calc->id + " calculus");
    MeasurePtr oriented = oriented_measure(orientation(*mu->codomain(), t.orientation), mu);
    MeasurePtr local = restrict_measure(oriented, subspace_algebra(sp, t.region));
    parts.push_back(ia_integrate(f, local, t.region, calc->elem, policies, tol, cap));
  }

  size_t worst = 0;
  for (size_t k = 1; k < parts.size(); ++k)
    if (verdict_rank(parts[k].verdict) > verdict_rank(parts[worst].verdict)) worst = k;
  rep.verdict = parts[worst].verdict;

  for (size_t k = 0; k < parts.size(); ++k)
    for (PolicyTrace& tr : parts[k].traces) {
      if (parts.size() > 1) tr.policy = "term" + std::to_string(k) + ":" + tr.policy;
      rep.traces.push_back(std::move(tr));
    }

  if (rep.verdict == Verdict::Defined) {
    std::vector<Value> vals;
    vals.reserve(parts.size());
    for (const IAReport& p : parts) vals.push_back(p.value);
    rep.value = fold_ordered(*calc->g_out, vals);
  } else {
    rep.value = calc->g_out->identity();
    rep.witness = "term " + std::to_string(worst) + " (" + c.terms()[worst].orientation + "*" +
                  c.terms()[worst].region.str() + "): " + parts[worst].witness;
    rep.divergence = parts[worst].divergence;
  }
  return rep;
}

namespace {

MeasurePtr free_whole_measure(const SpacePtr& sp, const MagmaPtr& cod, char atom) {
  std::string name(1, atom);
  auto assign = [cod, name](const Region& A) {
    if (A.empty()) return Measure::Raw{cod->identity()};
    return Measure::Raw{Value(FreeTerm::atom(name))};
  };
  return Measure::custom("free-whole:" + name, sp, cod, false, std::move(assign));
}

MeasurePtr free_percell_measure(const SpacePtr& sp, const MagmaPtr& cod, char atom) {
  std::string name(1, atom);
  auto assign = [cod, name](const Region& A) {
    std::vector<Value> terms(A.cells().size(), Value(FreeTerm::atom(name)));
    return Measure::Raw{fold_ordered(*cod, terms)};
  };
  return Measure::custom("free-percell:" + name, sp, cod, false, std::move(assign));
}

}  // namespace

std::vector<Probe> standard_probes(const CalculusPtr& calc, const SpacePtr& space, bool points) {
  if (!calc || !space) fail(Err::Schema, "standard_probes needs a calculus and a space");
  std::vector<Probe> out;

  if (calc->id.rfind("free:", 0) == 0) {
    std::string alphabet = calc->y->id().substr(5);
    char fa = alphabet[0];
    char fb = alphabet.size() > 1 ? alphabet[1] : alphabet[0];
    char mc = alphabet.size() > 2 ? alphabet[2] : alphabet.back();
    auto atom_const = [&](char a) {
      return FunctionExpr::constant(Value(FreeTerm::atom(std::string(1, a))), calc->y);
    };
    out.push_back({"atom/whole", atom_const(fa), free_whole_measure(space, calc->m, mc)});
    out.push_back({"atom/percell", atom_const(fa), free_percell_measure(space, calc->m, mc)});
    out.push_back({"atom2/whole", atom_const(fb), free_whole_measure(space, calc->m, mc)});
    return out;
  }

  bool product = calc->id == "product";
  auto fn = [&](const std::string& src) { return FunctionExpr::parse(src, calc->y); };

  std::vector<FunctionExpr> fns;
  std::vector<MeasurePtr> measures;
  switch (space->kind()) {
    case Space::Kind::Interval1D: {
      if (product) {
        for (const char* s : {"2", "exp(x)", "exp(x^2)", "exp(2*x)", "1/2"}) fns.push_back(fn(s));
      } else {
        for (const char* s : {"1", "x", "x^2", "x^3", "x^4"}) fns.push_back(fn(s));
        Region lo(space, {Cell(IntervalCell{iv(Rat(0), Rat(1, 2))})});
        Region hi(space, {Cell(IntervalCell{iv(Rat(1, 2), Rat(1))})});
        fns.push_back(FunctionExpr::piecewise({{lo, FunctionExpr::constant(3.0, calc->y)},
                                               {hi, FunctionExpr::constant(1.0, calc->y)}},
                                              calc->y));
      }
      if (points) measures.push_back(Measure::counting(space));
      else measures.push_back(Measure::lebesgue(space));
      measures.push_back(Measure::dirac(space, Rat(1, 3)));
      measures.push_back(Measure::dirac(space, Rat(2, 3)));
      break;
    }
    case Space::Kind::GridFaces:
    case Space::Kind::GridEdges:
    case Space::Kind::GridVertices: {
      if (product) {
        for (const char* s : {"2", "exp(x)", "exp(y)"}) fns.push_back(fn(s));
      } else {
        for (const char* s : {"1", "x", "y", "x*y", "x^2"}) fns.push_back(fn(s));
      }
      bool discrete = space->kind() == Space::Kind::GridVertices;
      measures.push_back(discrete ? Measure::counting(space) : Measure::lebesgue(space));
      // corner and an interior lattice point: both lie on every stratum
      measures.push_back(Measure::dirac(space, space->lo().r, space->ylo().r));
      Rat mx = space->lo().r + (space->hi().r - space->lo().r) / 2;
      measures.push_back(Measure::dirac(space, mx, space->ylo().r));
      break;
    }
    case Space::Kind::GraphVertices: {
      fns.push_back(FunctionExpr::named(
          "vertex-id", [](const Point& p) -> Value { return static_cast<double>(p.u); },
          calc->y));
      fns.push_back(FunctionExpr::named(
          "vertex-id-squared",
          [](const Point& p) -> Value { return static_cast<double>(p.u) * p.u; }, calc->y));
      measures.push_back(Measure::counting(space));
      if (!space->graph()->vertices.empty())
        measures.push_back(Measure::dirac_vertex(space, space->graph()->vertices.front()));
      break;
    }
    case Space::Kind::GraphEdges: {
      fns.push_back(FunctionExpr::named(
          "endpoint-sum", [](const Point& p) -> Value { return static_cast<double>(p.u + p.v); },
          calc->y));
      measures.push_back(Measure::counting(space));
      break;
    }
  }

  for (size_t i = 0; i < fns.size(); ++i)
    for (size_t j = 0; j < measures.size(); ++j)
      out.push_back({fns[i].str() + "/" + measures[j]->id(), fns[i], measures[j]});
  return out;
}

const char* equiv_name(Equiv e) {
  switch (e) {
    case Equiv::Equivalent: return "Equivalent";
    case Equiv::Distinguished: return "Distinguished";
    case Equiv::SameDomainRequiredFailure: return "SameDomainRequiredFailure";
  }
  return "?";
}

EquivReport integration_equivalent(const Chain& c1, const Chain& c2,
                                   const std::vector<Probe>& probes, const CalculusPtr& calc,
                                   double tol, int cap) {
  if (probes.empty()) fail(Err::Schema, "integration_equivalent needs at least one probe");
  if (c1.is_empty() && c2.is_empty()) return {};

  // Against the literal empty chain the base-set requirement is waived: the
  // identity class of the quotient contains cancelling nonempty chains.
  if (!c1.is_empty() && !c2.is_empty() && c1.base_set() != c2.base_set())
    return {Equiv::SameDomainRequiredFailure,
            "base sets differ: " + c1.base_set().str() + " vs " + c2.base_set().str()};

  const double band = kAgreeBandFactor * tol;
  for (const Probe& p : probes) {
    IAReport r1 = integrate_chain(c1, p.f, p.mu, calc, tol, cap);
    IAReport r2 = integrate_chain(c2, p.f, p.mu, calc, tol, cap);
    if (r1.verdict != r2.verdict)
      return {Equiv::Distinguished, "probe " + p.name + ": " + verdict_name(r1.verdict) +
                                        " vs " + verdict_name(r2.verdict)};
    if (r1.verdict != Verdict::Defined) continue;  // matched undefinedness
    double d = calc->g_out->chart_distance(r1.value, r2.value);
    if (d > band) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " (chart distance %.6g)", d);
      return {Equiv::Distinguished, "probe " + p.name + ": " + value_str(r1.value) + " vs " +
                                        value_str(r2.value) + buf};
    }
  }
  return {};
}

AdditivityReport region_additivity_check(const CalculusPtr& calc, int samples,
                                         std::uint64_t seed) {
  if (!calc) fail(Err::Schema, "region_additivity_check needs a calculus");
  if (samples < 1) fail(Err::Schema, "region_additivity_check needs at least one sample");
  SpacePtr sp = Space::interval(Rat(0), Rat(1));
  std::vector<Probe> probes = standard_probes(calc, sp);
  std::mt19937_64 rng(seed);

  AdditivityReport rep;
  for (int s = 0; s < samples; ++s) {
    // adjacent pair on even samples, separated pair on odd ones
    long long cuts[3];
    if (s % 2 == 0) {
      long long a = static_cast<long long>(rng() % 14);
      long long m = a + 1 + static_cast<long long>(rng() % (15 - a));
      long long b = m + 1 + static_cast<long long>(rng() % (16 - m));
      cuts[0] = a, cuts[1] = m, cuts[2] = b;
    } else {
      long long a = static_cast<long long>(rng() % 13);
      cuts[0] = a, cuts[1] = a + 1, cuts[2] = a + 2;
    }
    Region s1, s2;
    if (s % 2 == 0) {
      s1 = Region(sp, {Cell(IntervalCell{iv(Rat(cuts[0], 16), Rat(cuts[1], 16))})});
      s2 = Region(sp, {Cell(IntervalCell{iv(Rat(cuts[1], 16), Rat(cuts[2], 16))})});
    } else {
      s1 = Region(sp, {Cell(IntervalCell{iv(Rat(cuts[0], 16), Rat(cuts[1], 16))})});
      s2 = Region(sp, {Cell(IntervalCell{iv(Rat(cuts[1] + 1, 16), Rat(cuts[2] + 1, 16))})});
    }
    Chain split(1, {{"e", s1}, {"e", s2}});
    Chain merged(1, {{"e", region_union(s1, s2)}});
    EquivReport er = integration_equivalent(split, merged, probes, calc);
    ++rep.checked;
    if (er.verdict != Equiv::Equivalent) {
      rep.additive = false;
      rep.witness = "S1=" + s1.str() + " S2=" + s2.str() + ": " + er.witness;
      break;
    }
  }
  if (!rep.additive && calc->g_out->commutative())
    fail(Err::Schema, "region additivity failed under a commutative codomain: " + rep.witness);
  return rep;
}

}  // namespace mcalc
