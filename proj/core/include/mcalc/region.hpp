#pragma once

#include <boost/rational.hpp>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcalc/errors.hpp"

namespace mcalc {

// Exact endpoint arithmetic. Endpoints stay small (dyadic refinements and
// short decimals), so int64 rationals never get near overflow.
using Rat = boost::rational<long long>;

Rat rat_parse(const std::string& s);  // "3", "-1/4", "0.125"
double rat_num(const Rat& r);
std::string rat_str(const Rat& r);

// Interval endpoint in the two-point compactification of the line.
struct REnd {
  int inf = 0;  // -1 / 0 / +1
  Rat r{};

  static REnd at(const Rat& v) { return {0, v}; }
  static REnd neg_inf() { return {-1, {}}; }
  static REnd pos_inf() { return {+1, {}}; }
  bool finite() const { return inf == 0; }
  double num() const;

  friend bool operator==(const REnd& a, const REnd& b) {
    return a.inf == b.inf && (a.inf != 0 || a.r == b.r);
  }
  friend bool operator<(const REnd& a, const REnd& b) {
    if (a.inf != b.inf) return a.inf < b.inf;
    return a.inf == 0 && a.r < b.r;
  }
  friend bool operator<=(const REnd& a, const REnd& b) { return a < b || a == b; }
};

// Closed interval [lo, hi], lo <= hi. Degenerate (lo == hi) intervals are
// points; they are first-class in Interval1D spaces because the boundary of
// a 1-chain lives on them.
struct Iv {
  REnd lo, hi;
  bool degenerate() const { return lo == hi; }
  double length() const;
  std::string str() const;
};

Iv iv(const Rat& lo, const Rat& hi);
Iv iv_point(const Rat& p);

// Primitive cells, one alternative per space kind.
struct IntervalCell { Iv iv; };
struct RectCell { Iv x, y; };
// An axis-aligned segment on the grid line {offset} x span (vertical) or
// span x {offset} (horizontal).
struct EdgeCell { bool vertical = false; Rat offset{}; Iv span; };
struct VertexCell { Rat x{}, y{}; };
struct GVertexCell { int id = 0; };
struct GEdgeCell { int u = 0, v = 0; };

using Cell = std::variant<IntervalCell, RectCell, EdgeCell, VertexCell,
                          GVertexCell, GEdgeCell>;

std::string cell_str(const Cell& c);

struct GraphData {
  std::vector<int> vertices;
  std::vector<std::pair<int, int>> edges;  // stored direction is the edge's
                                           // start -> end convention
  bool has_vertex(int id) const;
  bool has_edge(int u, int v) const;
};
using GraphPtr = std::shared_ptr<const GraphData>;

class Space;
using SpacePtr = std::shared_ptr<const Space>;

// A family of primitive cells. The three spec-level shapes fan out into six
// kinds here because every stratum of a 2D grid or a graph carries its own
// cell family (faces vs edges vs vertices).
class Space {
 public:
  enum class Kind {
    Interval1D,
    GridFaces,
    GridEdges,
    GridVertices,
    GraphVertices,
    GraphEdges,
  };

  static SpacePtr interval(std::optional<Rat> lo, std::optional<Rat> hi);
  static SpacePtr grid_faces(Rat x0, Rat y0, Rat x1, Rat y1);
  static SpacePtr grid_edges(Rat x0, Rat y0, Rat x1, Rat y1);
  static SpacePtr grid_vertices(Rat x0, Rat y0, Rat x1, Rat y1);
  static SpacePtr graph_vertices(GraphPtr g);
  static SpacePtr graph_edges(GraphPtr g);

  static const char* kind_name(Kind k);

  Kind kind() const { return kind_; }
  bool unbounded() const;
  // Interval bounds (Interval1D) or grid bounds (grid kinds).
  REnd lo() const { return lo_; }
  REnd hi() const { return hi_; }
  REnd ylo() const { return ylo_; }
  REnd yhi() const { return yhi_; }
  const GraphPtr& graph() const { return graph_; }

  bool restricted() const { return restricted_; }
  const std::vector<Cell>& restriction() const { return restriction_; }

  // Same kind and parameters; restrictions are carried by the subspace but
  // do not make cells incompatible with the parent.
  bool compatible(const Space& o) const;
  std::string str() const;

 private:
  friend SpacePtr subspace_algebra(const SpacePtr&, const class Region&);
  Kind kind_;
  REnd lo_, hi_, ylo_, yhi_;
  GraphPtr graph_;
  bool restricted_ = false;
  std::vector<Cell> restriction_;
};

// Point of a space, used for function evaluation, tags, and dirac tests.
// Numeric coordinates for interval/grid kinds; ids for graph kinds.
struct Point {
  double x = 0.0, y = 0.0;
  int u = -1, v = -1;  // graph vertex (u) or edge (u, v)

  static Point at(double x) { return {x, 0.0, -1, -1}; }
  static Point at(double x, double y) { return {x, y, -1, -1}; }
  static Point vertex(int id) { return {0.0, 0.0, id, -1}; }
  static Point edge(int u, int v) { return {0.0, 0.0, u, v}; }
};

// A finite union of primitive cells in canonical form:
//  - intervals: sorted, overlapping/touching cells merged, points kept;
//  - rects: vertical-slab decomposition with degenerate rects dropped,
//    adjacent slabs with identical section lists re-merged;
//  - edges: per-line sorted interval algebra, degenerate spans dropped;
//  - vertices / graph cells: sorted, deduplicated.
// Canonical form makes structural equality set equality (up to the closure
// semantics above), and Region::str() a stable key.
class Region {
 public:
  Region() = default;  // empty; compatible with any space
  Region(SpacePtr space, std::vector<Cell> cells);

  bool empty() const { return cells_.empty(); }
  const SpacePtr& space() const { return space_; }
  const std::vector<Cell>& cells() const { return cells_; }

  bool operator==(const Region& o) const;
  bool operator!=(const Region& o) const { return !(*this == o); }
  std::string str() const;

 private:
  SpacePtr space_;
  std::vector<Cell> cells_;
};

Region region_union(const Region& a, const Region& b);
Region region_intersect(const Region& a, const Region& b);
// Closure semantics: the closed hull of the set difference. Cutting an
// interior interval keeps both cut endpoints; subtracting a point from a
// nondegenerate interval changes nothing.
Region region_difference(const Region& a, const Region& b);
bool region_subset(const Region& a, const Region& b);
bool region_contains_point(const Region& r, const Point& p);

// The derived space whose carrier is exactly s. Errors with EmptyCarrier on
// an empty s. Region membership in the derived space means inclusion in s.
SpacePtr subspace_algebra(const SpacePtr& parent, const Region& s);
bool region_in_space(const Region& r, const Space& sp);

// Helpers shared by measures and policies.
double cell_content(const Cell& c);  // length / area / span length; 0 for points
bool cell_degenerate(const Cell& c);
Point cell_midpoint(const Cell& c);
Region full_region(const SpacePtr& sp);  // whole carrier (bounded kinds or
                                         // unbounded interval as one cell)

}  // namespace mcalc
