#pragma once

#include "mcalc/chain.hpp"

namespace mcalc {

class Disintegration;
using DisintegrationPtr = std::shared_ptr<const Disintegration>;

struct DecomposableReport {
  bool decomposable = false;
  std::string reason;
};

// A level's measure map: sends decomposable measures on level-n chains to
// measures on the boundary. There is no general construction; each rule is
// hand-built per complex kind and validated through the Stokes checks
// downstream. Decomposability is extensional: membership in the measure
// class the rule was built for.
class Disintegration {
 public:
  int level() const { return level_; }
  const ComplexPtr& complex() const { return complex_; }

 private:
  friend DisintegrationPtr disintegration(const ComplexPtr&, int);
  friend DecomposableReport decomposable_check(const Disintegration&, const MeasurePtr&);
  friend MeasurePtr disintegrate(const Disintegration&, const Chain&, const MeasurePtr&);
  Disintegration() = default;
  int level_ = 0;
  ComplexPtr complex_;
  std::function<DecomposableReport(const MeasurePtr&)> decomposable_;
  std::function<MeasurePtr(const Chain&, const Chain& reduced_boundary, const MeasurePtr&)> map_;
};

// Registered instances, looked up by complex and level:
//   interval1d  level 1: length-class measures -> counting on the boundary
//               points, one unit of the length scale per endpoint
//   rect2d      level 2: area-class -> edge length on the boundary edges
//               level 1: edge-length-class -> counting on the boundary
//               corners
//   graph       level 1: additive finite edge weights -> vertex counting
//               weighted by total incident edge weight
// Level 0 is registered for every complex: a 0-chain's boundary is empty, so
// every measure maps to the zero measure. Orientation is never applied here;
// integrate_chain orients the output measure term by term. Unknown
// complex/level pairs raise Err::UnknownKey, levels outside the complex
// Err::LevelMismatch.
DisintegrationPtr disintegration(const ComplexPtr& cx, int level);

// Membership verdict with a reason; never throws.
DecomposableReport decomposable_check(const Disintegration& d, const MeasurePtr& mu);

// The output measure lives on the subspace algebra of
// base_set(chain_reduce(boundary(c))): interior boundary pieces shared by
// adjacent terms with cancelling orientations carry no mass. When the
// reduced boundary is empty (level 0, a fully cancelling chain, or the empty
// chain) there is no carrier to restrict to, and the result is the zero
// measure on the full lower-level space; composing two disintegrations
// always lands there. The zero measure maps to the zero image on the same
// carrier rule. Raises Err::NotDecomposable when decomposable_check refuses
// mu, Err::LevelMismatch when c is not at the rule's level.
MeasurePtr disintegrate(const Disintegration& d, const Chain& c, const MeasurePtr& mu);

}  // namespace mcalc
