#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mcalc/calculus.hpp"
#include "mcalc/expr.hpp"
#include "mcalc/integrate.hpp"
#include "mcalc/measure.hpp"

namespace mcalc {

struct ChainTerm {
  std::string orientation;
  Region region;
};

// Ordered formal sum of oriented regions at one grading level. Term order is
// semantic: integration folds left to right in a magma that need not
// commute. The empty chain is the identity and is level-agnostic under
// chain_add.
class Chain {
 public:
  static Chain empty(int level) { return Chain(level); }
  // Non-empty chains need level >= 0, nonempty regions, and one shared space.
  Chain(int level, std::vector<ChainTerm> terms);

  int level() const { return level_; }
  bool is_empty() const { return terms_.empty(); }
  const std::vector<ChainTerm>& terms() const { return terms_; }
  // Union of the term regions; the empty region for the empty chain.
  Region base_set() const;
  std::string str() const;

 private:
  explicit Chain(int level) : level_(level) {}
  int level_ = 0;
  std::vector<ChainTerm> terms_;
};

// Ordered concatenation: a's terms then b's. The empty chain is a two-sided
// identity at any level; otherwise levels must match (Err::LevelMismatch)
// and spaces must be compatible (Err::MixedSpaces).
Chain chain_add(const Chain& a, const Chain& b);

// Cancels matched pairs of terms carrying the same region with mutually
// inverse orientations (e against neg), keeping survivors in their original
// order. Terms under any other orientation id pass through untouched. The
// result is integration-equivalent to the input; its base set is where a
// disintegrated measure lives, and boundaries of boundaries reduce to the
// empty chain.
Chain chain_reduce(const Chain& c);

// The measurable family at one grading level: a seed list of generator
// regions (for sampling in law checks) plus the membership predicate.
// Membership is closed under finite unions and under subspace members by
// construction, since regions are canonical cell unions in the space.
struct IntegrableCollection {
  SpacePtr space;
  std::vector<Region> generators;
  std::function<bool(const Region&)> membership;
};

// Graded levels with boundary operators. Boundaries are magma homomorphisms
// extended term-by-term; each registered complex hand-codes the level rules:
//   interval1d   d1(i*[a,b]) = i.e*{b} ++ i.neg*{a}; d0 = empty
//   rect2d       d2(rect) = bottom, right, top reversed, left reversed;
//                d1(edge) = i.e*{end} ++ i.neg*{start}
//   graph        d1(edge u->v) = e*{v} ++ neg*{u}
// All levels share the integration codomain of their calculus.
class ChainComplex {
 public:
  struct Level {
    IntegrableCollection coll;
    CalculusPtr calc;
  };

  const std::string& id() const { return id_; }
  int top() const { return static_cast<int>(levels_.size()) - 1; }
  const Level& level(int n) const;
  bool f_monovalued() const { return f_monovalued_; }

  // Validates terms against the level's collection and orientation set.
  Chain make(int n, std::vector<ChainTerm> terms) const;
  // Level n chain -> level n-1 chain; empty for level 0 and empty inputs.
  Chain boundary(const Chain& c) const;

 private:
  friend std::shared_ptr<const ChainComplex> chain_complex(const std::string&);
  ChainComplex() = default;
  std::string id_;
  std::vector<Level> levels_;
  bool f_monovalued_ = true;
};

using ComplexPtr = std::shared_ptr<const ChainComplex>;

// Registry: "interval1d" | "rect2d:<W>x<H>" | "graph:<file>". The graph file
// holds '#' comments and lines "v <id>" / "e <u> <v>". Instances are cached
// by key.
ComplexPtr chain_complex(const std::string& key);

// Fold of per-term IA integrals: for term (i, S) the measure is reoriented
// by i and restricted to the subspace algebra of S, then ia_integrate runs
// over S. Values fold left to right in calc->g_out; the verdict is the worst
// across terms (Defined < Undefined < NoNumericLimitAtCap <
// FundamentallyUndefinedAtCap), with the offending term named in the
// witness. The empty chain integrates to the g_out identity.
// An empty `policies` falls back to calc->default_policies for the region
// kind.
IAReport integrate_chain(const Chain& c, const FunctionExpr& f, const MeasurePtr& mu,
                         const CalculusPtr& calc, double tol = kDefaultTol,
                         int cap = kDefaultCap, std::vector<IAPolicy> policies = {},
                         std::uint64_t seed = 1);

struct Probe {
  std::string name;
  FunctionExpr f;
  MeasurePtr mu;
};

// The fixed probe family for equivalence checks: monomials to degree 4 plus
// an indicator step, against Lebesgue and two Dirac measures on continuum
// strata, counting and Dirac on discrete strata. The product calculus swaps
// in positive-valued functions; the free calculus probes with atom constants
// against one whole-region and one per-cell formal measure. `points` selects
// the discrete variant for Interval1D point levels.
std::vector<Probe> standard_probes(const CalculusPtr& calc, const SpacePtr& space,
                                   bool points = false);

enum class Equiv { Equivalent, Distinguished, SameDomainRequiredFailure };
const char* equiv_name(Equiv e);

// Default probe tolerance. Looser than kDefaultTol on purpose: Dirac probes
// converge only first-order (the tagged cell around the mass point halves per
// depth), so tight tolerances push every probe run to the cap. Genuine
// inequivalences show up at macroscopic chart distances, far above the
// kAgreeBandFactor * kEquivTol agreement band.
inline constexpr double kEquivTol = 1e-3;

struct EquivReport {
  Equiv verdict = Equiv::Equivalent;
  std::string witness;  // set for the non-Equivalent verdicts
};

// Equivalence modulo the probe family. Two nonempty chains must have equal
// base sets (SameDomainRequiredFailure otherwise); probe integrals must then
// agree within kAgreeBandFactor * tol in the g_out chart, or share the same
// non-Defined verdict. Against the empty chain only the probe integrals are
// compared (to the identity): the identity class of the chain-space quotient
// contains cancelling nonempty chains, whose base sets are never empty.
EquivReport integration_equivalent(const Chain& c1, const Chain& c2,
                                   const std::vector<Probe>& probes, const CalculusPtr& calc,
                                   double tol = kEquivTol, int cap = kDefaultCap);

struct AdditivityReport {
  bool additive = true;
  int checked = 0;
  std::string witness;  // first failing sample, with both values
};

// Samples disjoint region pairs (adjacent and separated) in [0, 1] and
// compares the two-term chain against the single-term union chain over the
// standard probes. Failure is only coherent for a noncommutative integration
// codomain; a failure under a commutative g_out raises Err::Schema.
AdditivityReport region_additivity_check(const CalculusPtr& calc, int samples,
                                         std::uint64_t seed = 1);

}  // namespace mcalc
