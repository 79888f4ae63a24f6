#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mcalc/magma.hpp"
#include "mcalc/region.hpp"

namespace mcalc {

// Pointwise function on a carrier space, valued in a declared codomain magma.
// Built from a small arithmetic grammar, a piecewise splice, or an opaque
// callable. Evaluation is total: points outside every piece of a piecewise
// function map to the codomain identity.
class FunctionExpr {
 public:
  using Fn = std::function<Value(const Point&)>;

  // Grammar: expr := term (('+'|'-') term)*
  //          term := unary (('*'|'/') unary)*
  //          unary := '-' unary | power
  //          power := primary ('^' unary)?          (right-associative)
  //          primary := number | 'x' | 'y' | name '(' expr ')' | '(' expr ')'
  //          name ∈ {exp, log, abs, sqrt, sin, cos}
  // With a free codomain the grammar shrinks to atoms and '+': single letters
  // from the alphabet are formal constants and '+' is the codomain op.
  static FunctionExpr parse(const std::string& src, MagmaPtr codomain);

  static FunctionExpr constant(Value v, MagmaPtr codomain);
  // Opaque function; `display` names it in ids and diagnostics.
  static FunctionExpr named(std::string display, Fn fn, MagmaPtr codomain);
  // First matching piece wins; pieces must be essentially disjoint (their
  // pairwise intersections may share only degenerate seam cells). Points
  // outside every piece evaluate to the codomain identity.
  static FunctionExpr piecewise(std::vector<std::pair<Region, FunctionExpr>> pieces,
                                MagmaPtr codomain);

  Value eval(const Point& p) const;
  const MagmaPtr& codomain() const { return codomain_; }
  const std::string& str() const { return display_; }

 private:
  FunctionExpr(std::string display, Fn fn, MagmaPtr codomain)
      : display_(std::move(display)), fn_(std::move(fn)), codomain_(std::move(codomain)) {}

  std::string display_;
  Fn fn_;
  MagmaPtr codomain_;
};

}  // namespace mcalc
