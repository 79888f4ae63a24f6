#include "mcalc/region.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace mcalc {

Rat rat_parse(const std::string& s) {
  if (s.empty()) fail(Err::Schema, "empty rational literal");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      long long n = std::stoll(s.substr(0, slash));
      long long d = std::stoll(s.substr(slash + 1));
      if (d == 0) fail(Err::Schema, "zero denominator in '" + s + "'");
      return Rat(n, d);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rat(std::stoll(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac = s.size() - dot - 1;
    if (frac > 15) fail(Err::Schema, "decimal literal too fine: '" + s + "'");
    long long den = 1;
    for (size_t i = 0; i < frac; ++i) den *= 10;
    return Rat(std::stoll(digits), den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Err::Schema, "bad rational literal '" + s + "'");
  }
}

double rat_num(const Rat& r) {
  return (double)r.numerator() / (double)r.denominator();
}

std::string rat_str(const Rat& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

double REnd::num() const {
  if (inf) return inf > 0 ? HUGE_VAL : -HUGE_VAL;
  return rat_num(r);
}

double Iv::length() const {
  if (!lo.finite() || !hi.finite()) return HUGE_VAL;
  return rat_num(hi.r - lo.r);
}

std::string Iv::str() const {
  auto end_str = [](const REnd& e) {
    if (e.inf) return std::string(e.inf > 0 ? "inf" : "-inf");
    return rat_str(e.r);
  };
  return "[" + end_str(lo) + "," + end_str(hi) + "]";
}

Iv iv(const Rat& lo, const Rat& hi) {
  if (hi < lo) fail(Err::Schema, "interval with hi < lo");
  return Iv{REnd::at(lo), REnd::at(hi)};
}

Iv iv_point(const Rat& p) { return Iv{REnd::at(p), REnd::at(p)}; }

std::string cell_str(const Cell& c) {
  struct V {
    std::string operator()(const IntervalCell& x) const { return x.iv.str(); }
    std::string operator()(const RectCell& x) const { return x.x.str() + "x" + x.y.str(); }
    std::string operator()(const EdgeCell& x) const {
      return std::string(x.vertical ? "v@" : "h@") + rat_str(x.offset) + ":" + x.span.str();
    }
    std::string operator()(const VertexCell& x) const {
      return "(" + rat_str(x.x) + "," + rat_str(x.y) + ")";
    }
    std::string operator()(const GVertexCell& x) const { return "v" + std::to_string(x.id); }
    std::string operator()(const GEdgeCell& x) const {
      return "e" + std::to_string(x.u) + "-" + std::to_string(x.v);
    }
  };
  return std::visit(V{}, c);
}

bool GraphData::has_vertex(int id) const {
  return std::find(vertices.begin(), vertices.end(), id) != vertices.end();
}

bool GraphData::has_edge(int u, int v) const {
  return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
}

namespace {
void check_grid_bounds(const Rat& x0, const Rat& y0, const Rat& x1, const Rat& y1) {
  if (!(x0 < x1) || !(y0 < y1)) fail(Err::Schema, "grid bounds must be a proper rectangle");
}
}  // namespace

SpacePtr Space::interval(std::optional<Rat> lo, std::optional<Rat> hi) {
  REnd l = lo ? REnd::at(*lo) : REnd::neg_inf();
  REnd h = hi ? REnd::at(*hi) : REnd::pos_inf();
  if (!(l < h)) fail(Err::Schema, "interval space needs lo < hi");
  Space s;
  s.kind_ = Kind::Interval1D;
  s.lo_ = l;
  s.hi_ = h;
  return std::make_shared<Space>(std::move(s));
}

SpacePtr Space::grid_faces(Rat x0, Rat y0, Rat x1, Rat y1) {
  check_grid_bounds(x0, y0, x1, y1);
  Space s;
  s.kind_ = Kind::GridFaces;
  s.lo_ = REnd::at(x0);
  s.hi_ = REnd::at(x1);
  s.ylo_ = REnd::at(y0);
  s.yhi_ = REnd::at(y1);
  return std::make_shared<Space>(std::move(s));
}

SpacePtr Space::grid_edges(Rat x0, Rat y0, Rat x1, Rat y1) {
  SpacePtr f = grid_faces(x0, y0, x1, y1);
  Space s = *f;
  s.kind_ = Kind::GridEdges;
  return std::make_shared<Space>(std::move(s));
}

SpacePtr Space::grid_vertices(Rat x0, Rat y0, Rat x1, Rat y1) {
  SpacePtr f = grid_faces(x0, y0, x1, y1);
  Space s = *f;
  s.kind_ = Kind::GridVertices;
  return std::make_shared<Space>(std::move(s));
}

SpacePtr Space::graph_vertices(GraphPtr g) {
  if (!g || g->vertices.empty()) fail(Err::Schema, "graph space needs vertices");
  Space s;
  s.kind_ = Kind::GraphVertices;
  s.graph_ = std::move(g);
  return std::make_shared<Space>(std::move(s));
}

SpacePtr Space::graph_edges(GraphPtr g) {
  if (!g) fail(Err::Schema, "graph space needs a graph");
  Space s;
  s.kind_ = Kind::GraphEdges;
  s.graph_ = std::move(g);
  return std::make_shared<Space>(std::move(s));
}

bool Space::unbounded() const {
  return kind_ == Kind::Interval1D && (!lo_.finite() || !hi_.finite());
}

bool Space::compatible(const Space& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Interval1D:
      return lo_ == o.lo_ && hi_ == o.hi_;
    case Kind::GridFaces:
    case Kind::GridEdges:
    case Kind::GridVertices:
      return lo_ == o.lo_ && hi_ == o.hi_ && ylo_ == o.ylo_ && yhi_ == o.yhi_;
    case Kind::GraphVertices:
    case Kind::GraphEdges:
      return graph_ == o.graph_ ||
             (graph_ && o.graph_ && graph_->vertices == o.graph_->vertices &&
              graph_->edges == o.graph_->edges);
  }
  return false;
}

const char* Space::kind_name(Kind k) {
  switch (k) {
    case Kind::Interval1D: return "interval";
    case Kind::GridFaces: return "grid-faces";
    case Kind::GridEdges: return "grid-edges";
    case Kind::GridVertices: return "grid-vertices";
    case Kind::GraphVertices: return "graph-vertices";
    case Kind::GraphEdges: return "graph-edges";
  }
  return "?";
}

std::string Space::str() const {
  switch (kind_) {
    case Kind::Interval1D: return "interval" + Iv{lo_, hi_}.str();
    case Kind::GridFaces: return "faces" + Iv{lo_, hi_}.str() + "x" + Iv{ylo_, yhi_}.str();
    case Kind::GridEdges: return "edges" + Iv{lo_, hi_}.str() + "x" + Iv{ylo_, yhi_}.str();
    case Kind::GridVertices: return "vertices" + Iv{lo_, hi_}.str() + "x" + Iv{ylo_, yhi_}.str();
    case Kind::GraphVertices: return "graph-vertices";
    case Kind::GraphEdges: return "graph-edges";
  }
  return "?";
}

namespace {

// ---- 1D interval algebra -------------------------------------------------

// keep_points: Interval1D keeps degenerate cells (0-chains live on them);
// the y-sections of rects and the spans of edges are regularized instead.
std::vector<Iv> norm_ivs(std::vector<Iv> v, bool keep_points) {
  if (!keep_points) {
    v.erase(std::remove_if(v.begin(), v.end(), [](const Iv& i) { return i.degenerate(); }),
            v.end());
  }
  std::sort(v.begin(), v.end(), [](const Iv& a, const Iv& b) {
    if (a.lo == b.lo) return a.hi < b.hi;
    return a.lo < b.lo;
  });
  std::vector<Iv> out;
  for (const Iv& c : v) {
    if (!out.empty() && c.lo <= out.back().hi) {
      if (out.back().hi < c.hi) out.back().hi = c.hi;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Iv> ivs_intersect(const std::vector<Iv>& a, const std::vector<Iv>& b,
                              bool keep_points) {
  std::vector<Iv> out;
  for (const Iv& x : a)
    for (const Iv& y : b) {
      REnd lo = std::max(x.lo, y.lo, [](const REnd& p, const REnd& q) { return p < q; });
      REnd hi = std::min(x.hi, y.hi, [](const REnd& p, const REnd& q) { return p < q; });
      if (lo <= hi) out.push_back(Iv{lo, hi});
    }
  return norm_ivs(std::move(out), keep_points);
}

std::vector<Iv> ivs_diff(const std::vector<Iv>& a, const std::vector<Iv>& b,
                         bool keep_points) {
  std::vector<Iv> out;
  for (const Iv& x : a) {
    std::vector<Iv> rem{x};
    for (const Iv& y : b) {
      std::vector<Iv> next;
      for (const Iv& c : rem) {
        if (y.hi < c.lo || c.hi < y.lo) {  // no contact
          next.push_back(c);
          continue;
        }
        if (c.degenerate()) continue;  // covered point disappears
        // closure of the set difference: keep the cut endpoints
        if (c.lo < y.lo) next.push_back(Iv{c.lo, std::min(c.hi, y.lo)});
        if (y.hi < c.hi) next.push_back(Iv{std::max(c.lo, y.hi), c.hi});
      }
      rem = std::move(next);
    }
    out.insert(out.end(), rem.begin(), rem.end());
  }
  return norm_ivs(std::move(out), keep_points);
}

std::vector<Iv> ivs_op(char op, const std::vector<Iv>& a, const std::vector<Iv>& b,
                       bool keep_points) {
  if (op == 'u') {
    std::vector<Iv> all = a;
    all.insert(all.end(), b.begin(), b.end());
    return norm_ivs(std::move(all), keep_points);
  }
  if (op == 'i') return ivs_intersect(a, b, keep_points);
  return ivs_diff(a, b, keep_points);
}

// ---- rect slab machinery ---------------------------------------------------

std::vector<RectCell> rects_op(char op, const std::vector<RectCell>& A,
                               const std::vector<RectCell>& B) {
  std::vector<Rat> cuts;
  auto add_cuts = [&cuts](const std::vector<RectCell>& v) {
    for (const RectCell& r : v) {
      cuts.push_back(r.x.lo.r);
      cuts.push_back(r.x.hi.r);
    }
  };
  add_cuts(A);
  add_cuts(B);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Slab { Rat a, b; std::vector<Iv> ys; };
  std::vector<Slab> slabs;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Rat &a = cuts[i], &b = cuts[i + 1];
    auto sections = [&](const std::vector<RectCell>& v) {
      std::vector<Iv> ys;
      for (const RectCell& r : v)
        if (r.x.lo.r <= a && b <= r.x.hi.r) ys.push_back(r.y);
      return norm_ivs(std::move(ys), false);
    };
    std::vector<Iv> ys = ivs_op(op, sections(A), sections(B), false);
    if (!ys.empty()) slabs.push_back(Slab{a, b, std::move(ys)});
  }

  // merge x-adjacent slabs with identical section lists
  std::vector<RectCell> out;
  size_t i = 0;
  while (i < slabs.size()) {
    size_t j = i;
    while (j + 1 < slabs.size() && slabs[j + 1].a == slabs[j].b) {
      const auto &p = slabs[j].ys, &q = slabs[j + 1].ys;
      bool same = p.size() == q.size();
      for (size_t k = 0; same && k < p.size(); ++k)
        same = p[k].lo == q[k].lo && p[k].hi == q[k].hi;
      if (!same) break;
      ++j;
    }
    for (const Iv& y : slabs[i].ys)
      out.push_back(RectCell{iv(slabs[i].a, slabs[j].b), y});
    i = j + 1;
  }
  return out;
}

// ---- generic cell plumbing -------------------------------------------------

int cell_tag(const Cell& c) { return (int)c.index(); }

int expected_tag(Space::Kind k) {
  switch (k) {
    case Space::Kind::Interval1D: return 0;
    case Space::Kind::GridFaces: return 1;
    case Space::Kind::GridEdges: return 2;
    case Space::Kind::GridVertices: return 3;
    case Space::Kind::GraphVertices: return 4;
    case Space::Kind::GraphEdges: return 5;
  }
  return -1;
}

bool cell_less(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  struct V {
    const Cell& b;
    bool operator()(const IntervalCell& x) const {
      const auto& y = std::get<IntervalCell>(b);
      if (!(x.iv.lo == y.iv.lo)) return x.iv.lo < y.iv.lo;
      return x.iv.hi < y.iv.hi;
    }
    bool operator()(const RectCell& x) const {
      const auto& y = std::get<RectCell>(b);
      if (!(x.x.lo == y.x.lo)) return x.x.lo < y.x.lo;
      if (!(x.y.lo == y.y.lo)) return x.y.lo < y.y.lo;
      if (!(x.x.hi == y.x.hi)) return x.x.hi < y.x.hi;
      return x.y.hi < y.y.hi;
    }
    bool operator()(const EdgeCell& x) const {
      const auto& y = std::get<EdgeCell>(b);
      if (x.vertical != y.vertical) return !x.vertical;
      if (x.offset != y.offset) return x.offset < y.offset;
      if (!(x.span.lo == y.span.lo)) return x.span.lo < y.span.lo;
      return x.span.hi < y.span.hi;
    }
    bool operator()(const VertexCell& x) const {
      const auto& y = std::get<VertexCell>(b);
      if (x.x != y.x) return x.x < y.x;
      return x.y < y.y;
    }
    bool operator()(const GVertexCell& x) const { return x.id < std::get<GVertexCell>(b).id; }
    bool operator()(const GEdgeCell& x) const {
      const auto& y = std::get<GEdgeCell>(b);
      return std::tie(x.u, x.v) < std::tie(y.u, y.v);
    }
  };
  return std::visit(V{b}, a);
}

bool cell_equal(const Cell& a, const Cell& b) {
  return !cell_less(a, b) && !cell_less(b, a);
}

std::vector<Cell> normalize_cells(Space::Kind kind, std::vector<Cell> cells) {
  switch (kind) {
    case Space::Kind::Interval1D: {
      std::vector<Iv> v;
      v.reserve(cells.size());
      for (const Cell& c : cells) v.push_back(std::get<IntervalCell>(c).iv);
      v = norm_ivs(std::move(v), true);
      std::vector<Cell> out;
      out.reserve(v.size());
      for (const Iv& i : v) out.push_back(IntervalCell{i});
      return out;
    }
    case Space::Kind::GridFaces: {
      std::vector<RectCell> v;
      for (const Cell& c : cells) v.push_back(std::get<RectCell>(c));
      v.erase(std::remove_if(v.begin(), v.end(),
                             [](const RectCell& r) { return r.x.degenerate() || r.y.degenerate(); }),
              v.end());
      auto merged = rects_op('u', v, {});
      std::vector<Cell> out;
      for (const RectCell& r : merged) out.push_back(r);
      return out;
    }
    case Space::Kind::GridEdges: {
      std::map<std::pair<bool, Rat>, std::vector<Iv>> lines;
      for (const Cell& c : cells) {
        const auto& e = std::get<EdgeCell>(c);
        lines[{e.vertical, e.offset}].push_back(e.span);
      }
      std::vector<Cell> out;
      for (auto& [key, spans] : lines)
        for (const Iv& s : norm_ivs(std::move(spans), false))
          out.push_back(EdgeCell{key.first, key.second, s});
      return out;
    }
    default: {
      std::sort(cells.begin(), cells.end(), cell_less);
      cells.erase(std::unique(cells.begin(), cells.end(), cell_equal), cells.end());
      return cells;
    }
  }
}

bool cells_subset(Space::Kind kind, const std::vector<Cell>& a, const std::vector<Cell>& b);

std::vector<Cell> cells_op(Space::Kind kind, char op, const std::vector<Cell>& a,
                           const std::vector<Cell>& b) {
  switch (kind) {
    case Space::Kind::Interval1D: {
      std::vector<Iv> va, vb;
      for (const Cell& c : a) va.push_back(std::get<IntervalCell>(c).iv);
      for (const Cell& c : b) vb.push_back(std::get<IntervalCell>(c).iv);
      std::vector<Cell> out;
      for (const Iv& i : ivs_op(op, va, vb, true)) out.push_back(IntervalCell{i});
      return out;
    }
    case Space::Kind::GridFaces: {
      std::vector<RectCell> va, vb;
      for (const Cell& c : a) va.push_back(std::get<RectCell>(c));
      for (const Cell& c : b) vb.push_back(std::get<RectCell>(c));
      std::vector<Cell> out;
      for (const RectCell& r : rects_op(op, va, vb)) out.push_back(r);
      return out;
    }
    case Space::Kind::GridEdges: {
      std::map<std::pair<bool, Rat>, std::pair<std::vector<Iv>, std::vector<Iv>>> lines;
      for (const Cell& c : a) {
        const auto& e = std::get<EdgeCell>(c);
        lines[{e.vertical, e.offset}].first.push_back(e.span);
      }
      for (const Cell& c : b) {
        const auto& e = std::get<EdgeCell>(c);
        lines[{e.vertical, e.offset}].second.push_back(e.span);
      }
      std::vector<Cell> out;
      for (auto& [key, pr] : lines)
        for (const Iv& s : ivs_op(op, pr.first, pr.second, false))
          out.push_back(EdgeCell{key.first, key.second, s});
      return out;
    }
    default: {
      // sorted set algebra on discrete cells
      std::vector<Cell> out;
      if (op == 'u') {
        out = a;
        out.insert(out.end(), b.begin(), b.end());
        return normalize_cells(kind, std::move(out));
      }
      for (const Cell& c : a) {
        bool in_b = std::any_of(b.begin(), b.end(),
                                [&](const Cell& d) { return cell_equal(c, d); });
        if ((op == 'i') == in_b) out.push_back(c);
      }
      return out;
    }
  }
}

bool cells_subset(Space::Kind kind, const std::vector<Cell>& a, const std::vector<Cell>& b) {
  return cells_op(kind, 'd', a, b).empty();
}

void check_cell_in_space(const Cell& c, const Space& sp) {
  if (cell_tag(c) != expected_tag(sp.kind()))
    fail(Err::Schema, "cell kind does not match space " + sp.str());
  switch (sp.kind()) {
    case Space::Kind::Interval1D: {
      const Iv& i = std::get<IntervalCell>(c).iv;
      if (i.lo < sp.lo() || sp.hi() < i.hi)
        fail(Err::Schema, "cell " + i.str() + " outside space " + sp.str());
      break;
    }
    case Space::Kind::GridFaces: {
      const auto& r = std::get<RectCell>(c);
      if (r.x.lo < sp.lo() || sp.hi() < r.x.hi || r.y.lo < sp.ylo() || sp.yhi() < r.y.hi)
        fail(Err::Schema, "rect outside grid bounds");
      break;
    }
    case Space::Kind::GridEdges: {
      const auto& e = std::get<EdgeCell>(c);
      REnd off = REnd::at(e.offset);
      bool ok = e.vertical
                    ? (sp.lo() <= off && off <= sp.hi() && !(e.span.lo < sp.ylo()) &&
                       !(sp.yhi() < e.span.hi))
                    : (sp.ylo() <= off && off <= sp.yhi() && !(e.span.lo < sp.lo()) &&
                       !(sp.hi() < e.span.hi));
      if (!ok) fail(Err::Schema, "edge segment outside grid bounds");
      break;
    }
    case Space::Kind::GridVertices: {
      const auto& v = std::get<VertexCell>(c);
      REnd x = REnd::at(v.x), y = REnd::at(v.y);
      if (x < sp.lo() || sp.hi() < x || y < sp.ylo() || sp.yhi() < y)
        fail(Err::Schema, "vertex outside grid bounds");
      break;
    }
    case Space::Kind::GraphVertices:
      if (!sp.graph()->has_vertex(std::get<GVertexCell>(c).id))
        fail(Err::Schema, "unknown graph vertex");
      break;
    case Space::Kind::GraphEdges: {
      const auto& e = std::get<GEdgeCell>(c);
      if (!sp.graph()->has_edge(e.u, e.v)) fail(Err::Schema, "unknown graph edge");
      break;
    }
  }
}

}  // namespace

Region::Region(SpacePtr space, std::vector<Cell> cells) : space_(std::move(space)) {
  if (!space_) fail(Err::Schema, "region needs a space");
  for (const Cell& c : cells) check_cell_in_space(c, *space_);
  cells_ = normalize_cells(space_->kind(), std::move(cells));
  if (space_->restricted() && !cells_subset(space_->kind(), cells_, space_->restriction()))
    fail(Err::Schema, "region leaves the subspace restriction");
}

bool Region::operator==(const Region& o) const {
  if (empty() && o.empty()) return true;
  if (empty() != o.empty()) return false;
  if (!space_->compatible(*o.space_)) return false;
  if (cells_.size() != o.cells_.size()) return false;
  for (size_t i = 0; i < cells_.size(); ++i)
    if (!cell_equal(cells_[i], o.cells_[i])) return false;
  return true;
}

std::string Region::str() const {
  if (empty()) return "{}";
  std::string out;
  for (size_t i = 0; i < cells_.size(); ++i) {
    if (i) out += "+";
    out += cell_str(cells_[i]);
  }
  return out;
}

namespace {

const SpacePtr& pick_space(const Region& a, const Region& b, const char* what) {
  if (a.empty() && b.empty()) {
    static const SpacePtr none;
    return none;
  }
  if (a.empty()) return b.space();
  if (b.empty()) return a.space();
  if (!a.space()->compatible(*b.space()))
    fail(Err::MixedSpaces, std::string(what) + " across incompatible spaces");
  return a.space();
}

}  // namespace

Region region_union(const Region& a, const Region& b) {
  const SpacePtr& sp = pick_space(a, b, "union");
  if (!sp) return {};
  std::vector<Cell> all = a.cells();
  all.insert(all.end(), b.cells().begin(), b.cells().end());
  return Region(sp, std::move(all));
}

Region region_intersect(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return {};
  const SpacePtr& sp = pick_space(a, b, "intersection");
  return Region(sp, cells_op(sp->kind(), 'i', a.cells(), b.cells()));
}

Region region_difference(const Region& a, const Region& b) {
  if (a.empty()) return {};
  if (b.empty()) return a;
  const SpacePtr& sp = pick_space(a, b, "difference");
  return Region(sp, cells_op(sp->kind(), 'd', a.cells(), b.cells()));
}

bool region_subset(const Region& a, const Region& b) {
  if (a.empty()) return true;
  if (b.empty()) return false;
  const SpacePtr& sp = pick_space(a, b, "subset");
  return cells_subset(sp->kind(), a.cells(), b.cells());
}

bool region_contains_point(const Region& r, const Point& p) {
  struct V {
    const Point& p;
    bool operator()(const IntervalCell& c) const {
      return c.iv.lo.num() <= p.x && p.x <= c.iv.hi.num();
    }
    bool operator()(const RectCell& c) const {
      return c.x.lo.num() <= p.x && p.x <= c.x.hi.num() && c.y.lo.num() <= p.y &&
             p.y <= c.y.hi.num();
    }
    bool operator()(const EdgeCell& c) const {
      double off = rat_num(c.offset);
      if (c.vertical)
        return p.x == off && c.span.lo.num() <= p.y && p.y <= c.span.hi.num();
      return p.y == off && c.span.lo.num() <= p.x && p.x <= c.span.hi.num();
    }
    bool operator()(const VertexCell& c) const {
      return p.x == rat_num(c.x) && p.y == rat_num(c.y);
    }
    bool operator()(const GVertexCell& c) const { return p.u == c.id && p.v < 0; }
    bool operator()(const GEdgeCell& c) const { return p.u == c.u && p.v == c.v; }
  };
  for (const Cell& c : r.cells())
    if (std::visit(V{p}, c)) return true;
  return false;
}

SpacePtr subspace_algebra(const SpacePtr& parent, const Region& s) {
  if (!parent) fail(Err::Schema, "subspace of a null space");
  if (s.empty()) fail(Err::EmptyCarrier, "subspace restriction is empty");
  if (!s.space()->compatible(*parent)) fail(Err::MixedSpaces, "restriction from another space");
  if (parent->restricted() && !cells_subset(parent->kind(), s.cells(), parent->restriction()))
    fail(Err::Schema, "restriction leaves the parent subspace");
  Space sub = *parent;
  sub.restricted_ = true;
  sub.restriction_ = s.cells();
  return std::make_shared<Space>(std::move(sub));
}

bool region_in_space(const Region& r, const Space& sp) {
  if (r.empty()) return true;
  if (!r.space()->compatible(sp)) return false;
  for (const Cell& c : r.cells()) {
    try {
      check_cell_in_space(c, sp);
    } catch (const Error&) {
      return false;
    }
  }
  if (sp.restricted() && !cells_subset(sp.kind(), r.cells(), sp.restriction()))
    return false;
  return true;
}

double cell_content(const Cell& c) {
  struct V {
    double operator()(const IntervalCell& x) const { return x.iv.length(); }
    double operator()(const RectCell& x) const { return x.x.length() * x.y.length(); }
    double operator()(const EdgeCell& x) const { return x.span.length(); }
    double operator()(const VertexCell&) const { return 0.0; }
    double operator()(const GVertexCell&) const { return 0.0; }
    double operator()(const GEdgeCell&) const { return 0.0; }
  };
  return std::visit(V{}, c);
}

bool cell_degenerate(const Cell& c) {
  if (const auto* i = std::get_if<IntervalCell>(&c)) return i->iv.degenerate();
  return cell_content(c) == 0.0;
}

Point cell_midpoint(const Cell& c) {
  struct V {
    Point operator()(const IntervalCell& x) const {
      if (!x.iv.lo.finite() || !x.iv.hi.finite()) return Point::at(0.0);
      return Point::at(rat_num((x.iv.lo.r + x.iv.hi.r) / 2));
    }
    Point operator()(const RectCell& x) const {
      return Point::at(rat_num((x.x.lo.r + x.x.hi.r) / 2), rat_num((x.y.lo.r + x.y.hi.r) / 2));
    }
    Point operator()(const EdgeCell& x) const {
      double mid = rat_num((x.span.lo.r + x.span.hi.r) / 2);
      double off = rat_num(x.offset);
      return x.vertical ? Point::at(off, mid) : Point::at(mid, off);
    }
    Point operator()(const VertexCell& x) const { return Point::at(rat_num(x.x), rat_num(x.y)); }
    Point operator()(const GVertexCell& x) const { return Point::vertex(x.id); }
    Point operator()(const GEdgeCell& x) const { return Point::edge(x.u, x.v); }
  };
  return std::visit(V{}, c);
}

Region full_region(const SpacePtr& sp) {
  if (!sp) fail(Err::Schema, "full region of a null space");
  if (sp->restricted()) return Region(sp, sp->restriction());
  switch (sp->kind()) {
    case Space::Kind::Interval1D:
      return Region(sp, {IntervalCell{Iv{sp->lo(), sp->hi()}}});
    case Space::Kind::GridFaces:
      return Region(sp, {RectCell{Iv{sp->lo(), sp->hi()}, Iv{sp->ylo(), sp->yhi()}}});
    case Space::Kind::GraphVertices: {
      std::vector<Cell> cs;
      for (int v : sp->graph()->vertices) cs.push_back(GVertexCell{v});
      return Region(sp, std::move(cs));
    }
    case Space::Kind::GraphEdges: {
      std::vector<Cell> cs;
      for (auto [u, v] : sp->graph()->edges) cs.push_back(GEdgeCell{u, v});
      return Region(sp, std::move(cs));
    }
    default:
      fail(Err::Schema, "space has no finite full region: " + sp->str());
  }
}

}  // namespace mcalc
