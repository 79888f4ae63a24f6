#pragma once

#include <cstdint>
#include <optional>

#include "mcalc/chain.hpp"
#include "mcalc/disintegrate.hpp"

namespace mcalc {

// A chain paired with the measure its audit integrates against.
struct ProbeChain {
  Chain chain;
  MeasurePtr mu;
};

// One derivative question on a complex with registered disintegrations:
// which h on S satisfies, for every probe chain c carrying measure mu,
//   integral over c of g(h, dmu) == integral over boundary(c) of g(f, d pi mu)
// with pi the disintegration at level ply+1. One calculus pairs both levels,
// so h and f share a codomain. Regions are unions of closed cells; S carries
// its closure by construction.
struct DerivativeProblem {
  ComplexPtr complex;
  CalculusPtr calc;
  int ply = 0;  // chains live at level ply+1, their boundaries at level ply
  Region S;     // member of the level ply+1 collection
  FunctionExpr f;  // evaluable on S and on boundary carriers inside it
  MeasurePtr mu;   // decomposable; drives cell-wise solving
  std::vector<ProbeChain> probes;  // base sets inside S, decomposable measures
};

// Throws the first violated field invariant: Schema (missing pieces, S or a
// probe outside bounds), LevelMismatch (ply out of range, probe level),
// WrongCodomain (f or a measure against the calculus), MixedSpaces,
// NotDecomposable, UnknownKey (no disintegration registered for the level).
// f is not probed here; a function that escapes its carrier surfaces when an
// audit integrates it.
void validate_problem(const DerivativeProblem& p);

struct DerivativeCandidate {
  FunctionExpr h;  // evaluable on S
};

struct SolvedCell {
  Region cell;
  Value value;
};

// Piecewise-constant function over essentially disjoint interval, rect,
// grid-edge, or graph-edge cells (one kind per table, degenerate cells
// refused). A boundary point shared between cells belongs to the cell that
// starts there (per axis for rects); the topmost cell keeps its upper
// boundary. Points outside every cell evaluate to the codomain identity.
// Lookup is logarithmic in the cell count.
FunctionExpr piecewise_constant(const std::vector<SolvedCell>& rows, MagmaPtr codomain);

// Local inversion of the pairing: given m and r, find h with g(h, m) = r.
using Inverter = std::function<Value(const Value& m, const Value& r)>;

// riemann solves h = r/m, product solves h = r^(1/m); any other numeric
// carrier falls back to chart_root_inverter. Formal carriers have no
// inverse: Err::InverterUnavailable.
Inverter inverter_for(const CalculusPtr& calc);

// Bisection on the first sign change of g(h, m) - r along an expanding
// ladder through the carrier, accepted once the result sits within 1e-9 of r
// in the output chart. Err::InverterUnavailable on a formal carrier,
// Err::Schema when the ladder brackets no root.
Inverter chart_root_inverter(const CalculusPtr& calc);

struct VerifyFailure {
  std::string chain;  // the probe that broke
  std::string reason;
  IAReport lhs;  // candidate side: the integral of h over the chain
  IAReport rhs;  // boundary side: f against the disintegrated measure
};

// pass means every probe had both sides Defined and within the agreement
// band kAgreeBandFactor * tol in the output chart. max_residual is the worst
// both-Defined chart distance, passing probes included.
struct VerifyReport {
  bool pass = false;
  int checked = 0;
  double max_residual = 0.0;
  std::vector<VerifyFailure> failures;
};

// Audits the defining relation over p.probes (Err::Schema when there are
// none). Probes run in parallel under the MC_THREADS budget; the report is
// deterministic.
VerifyReport verify_derivative(const DerivativeProblem& p, const DerivativeCandidate& cand,
                               double tol = kEquivTol, int cap = kDefaultCap);

struct SolveReport {
  DerivativeCandidate candidate;
  std::vector<SolvedCell> table;     // grid order; skipped cells absent
  std::vector<std::string> skipped;  // zero-measure cells, named
  VerifyReport verify;               // grid self-consistency audit
};

// Cell-wise inversion: per grid cell, h = inverter(mu(cell), r) where r is
// the boundary integral of f over the single-cell chain. The grid must be an
// essentially disjoint cover of S by bounded collection members. Cells of
// measure zero are skipped and reported; when every cell is skipped there is
// nothing to solve (Err::ZeroMeasureCell). The returned audit runs over
// every solved cell plus 50 seeded random cell unions; the unions are the
// held-out part, since the single-cell relation holds by construction up to
// integration error. An empty inverter defaults to inverter_for(p.calc).
SolveReport solve_derivative(const DerivativeProblem& p, const std::vector<Region>& grid,
                             const Inverter& inverter = {}, double tol = kEquivTol,
                             int cap = kDefaultCap, std::uint64_t seed = 1);

// Even cover of S for solving: interval cells split into 2^depth pieces,
// rect cells into 2^ceil(depth/2) x 2^floor(depth/2) subrects, grid-edge
// spans into 2^depth pieces. Indivisible cells (graph edges, points) pass
// through whole. Cells must be bounded.
std::vector<Region> solve_grid(const ComplexPtr& cx, int level, const Region& S, int depth);

struct IterateStage {
  int order = 0;  // 1-based
  SolveReport solve;
  VerifyReport verify;  // the stage relation audited over p.probes
};

// achieved is the highest order whose stage passed both audits; candidate is
// that stage's h (absent when the first stage already fails). stages keeps
// every attempt including the failing one, so the failure witness survives.
struct IterateReport {
  int achieved = 0;
  std::optional<DerivativeCandidate> candidate;
  std::vector<IterateStage> stages;
};

// Repeated solving: each stage solves for the derivative of the previous
// stage's candidate on a coarsened grid (consecutive cells merged pairwise
// where the union stays a single cell), then audits the stage relation over
// p.probes. Coarsening tempers the error amplification of repeated
// differencing. p.probes must be nonempty: the grid audit is consistent by
// construction, so the problem's own probes are the only failure detector,
// and they only see a defect finer than the current grid (a kink hides from
// any probe that contains the offending cell whole). Stops at the first
// failing stage.
IterateReport iterate_derivative(const DerivativeProblem& p, int order,
                                 const std::vector<Region>& grid,
                                 const Inverter& inverter = {}, double tol = kEquivTol,
                                 int cap = kDefaultCap, std::uint64_t seed = 1);

}  // namespace mcalc
