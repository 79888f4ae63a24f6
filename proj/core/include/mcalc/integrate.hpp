#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcalc/expr.hpp"
#include "mcalc/magma.hpp"
#include "mcalc/measure.hpp"
#include "mcalc/region.hpp"

namespace mcalc {

// Order in which a pairing expands composite arguments. A pairing that
// distributes over both arguments still has two inequivalent expansions of
// g(a+b, m+n) when the output op is noncommutative; the declared order picks
// one. YFirst splits the function argument at each level before the measure
// argument, MFirst the reverse.
enum class ExpansionOrder { YFirst, MFirst };

// Pairing g : Y x M̄ -> Ḡ between function values and measure values.
// Required laws (checked by check_element at calculus registration):
//   g(a +_Y b, m) = g(a,m) +_G g(b,m)   sampled with m primitive
//   g(a, m +_M n) = g(a,m) +_G g(a,n)   sampled with a primitive
//   g(0_Y, m) = 0_G                     including extension points m
// Composite-by-composite products are settled by `order`; the law on the
// opposite side is only sampled with a primitive other argument because no
// pairing into a noncommutative output can satisfy both unrestricted.
struct IntegrationElement {
  std::string id;
  MagmaPtr y;
  MagmaPtr m;
  MagmaPtr g_out;
  ExpansionOrder order = ExpansionOrder::YFirst;
  // Action on primitive (non-composite) argument pairs.
  std::function<Value(const Value&, const Value&)> pair;
};

// Applies the element with identity short-circuits (either identity argument
// yields 0_G) and recursive expansion of composite formal arguments in the
// declared order.
Value element_apply(const IntegrationElement& e, const Value& a, const Value& m);

// Samples the three element laws; throws Err::Schema naming the first law
// that fails. Numeric comparisons use the output chart within 1e-9.
void check_element(const IntegrationElement& e, std::uint64_t seed = 1);

struct SimpleTerm {
  Region region;
  Value coeff;
};

// Ordered formal sum of coefficient-weighted indicators. Order is data: the
// value at a point and the integral both fold terms left to right, so
// permuting terms changes the result whenever the codomain op is
// noncommutative. Terms with the identity coefficient are dropped at
// construction; coefficients must lie in the carrier of y.
class SimpleFunction {
 public:
  SimpleFunction() = default;
  SimpleFunction(MagmaPtr y, std::vector<SimpleTerm> terms);

  const MagmaPtr& y() const { return y_; }
  const std::vector<SimpleTerm>& terms() const { return terms_; }
  // Ordered fold of the coefficients of the terms whose region contains p.
  Value eval(const Point& p) const;
  std::string str() const;

 private:
  MagmaPtr y_;
  std::vector<SimpleTerm> terms_;
};

// Concatenation; pointwise this is the ordered sum of the two functions.
SimpleFunction sf_concat(const SimpleFunction& a, const SimpleFunction& b);

// Ordered fold of g(c_k, mu(S_k ∩ U)) over the terms. Throws
// Err::NotIntegrable naming the first term whose intersection with U has
// infinite measure.
Value simple_integral(const SimpleFunction& s, const Measure& mu, const Region& U,
                      const IntegrationElement& e);

// One approximation scheme: depth d yields a simple function approximating f
// on U. Tags describe the policy for selection predicates (e.g. principal
// value keeps only symmetric exclusions).
struct IAPolicy {
  std::string id;
  std::map<std::string, std::string> tags;
  std::function<SimpleFunction(const FunctionExpr&, const Region&, const Measure&, int)> generate;
};

// Tagged-partition policies on Interval1D regions. Depth d partitions each
// cell into pieces with exact rational cuts:
//   uniform     2^d equal pieces per cell
//   dyadic      absolute grid k/2^d intersected with the cell (nested)
//   randomized  nested splits at a seeded fraction in [0.4, 0.6]
// and evaluates f at the chosen tag (left | right | midpoint).
IAPolicy riemann_policy(const std::string& scheme, const std::string& tag, std::uint64_t seed = 0);
// Same partitions with positive-valued f; throws Err::WrongCodomain unless
// the function codomain is pos_mul.
IAPolicy geometric_policy(const std::string& scheme, const std::string& tag, std::uint64_t seed = 0);
// Dominated approximation: on each dyadic grid cell of width 2^-d the
// coefficient is the one-sided bound of f over the cell's sample lattice,
// quantized toward zero in multiples of 2^-d. Satisfies |s_d| <= |f| and
// |s_d| <= |s_{d+1}| pointwise for functions monotone between consecutive
// lattice points (cell endpoints and eighths).
IAPolicy lebesgue_policy();
// Uniform subdivision of rect cells into ~2^d subrects. Tags: "center" and
// "centerswap" use cell midpoints and refine the two axes on opposite
// schedules; "lowerleft" tags the cell corner. The corner tag carries a
// first-order bias, so it needs far deeper partitions to settle than the
// center tags and is kept out of the default families.
IAPolicy grid2d_policy(const std::string& tag);
// Midpoint tags on 2^d subdivisions of each edge cell span.
IAPolicy edge_policy();
// Depth-independent: one term over the whole region, coefficient f at the
// first cell's midpoint. The coarsest approximation; the formal calculi use
// it, where a region is a single indivisible atom.
IAPolicy atomic_policy();
// Depth-independent: one term per cell of U, coefficient f at the cell
// midpoint. Exact on discrete strata (vertex and graph cells), where cells
// are points and f is constant on each.
IAPolicy discrete_policy();

// Principal-value exclusions around the origin: at depth d the base policy
// runs on U minus a window of half-width 2^-d (symmetric) or on U minus
// (-2^-d, 4*2^-d) (shifted). Tag "symmetric" is "yes"/"no".
IAPolicy pv_symmetric(IAPolicy base);
IAPolicy pv_shifted(IAPolicy base);

std::vector<IAPolicy> restrict_policies(const std::vector<IAPolicy>& policies,
                                        const std::function<bool(const IAPolicy&)>& keep);
// Predicate for the principal-value restriction.
bool symmetric_exclusion(const IAPolicy& p);

// Policy registry key grammar:
//   riemann:<scheme>:<tag> | geometric:<scheme>:<tag> | lebesgue
//   grid2d:<tag> | edge:midpoint | atomic | discrete
//   pv:sym:<base> | pv:shift:<base>
IAPolicy policy_by_key(const std::string& key, std::uint64_t seed = 0);

enum class Verdict { Defined, Undefined, FundamentallyUndefinedAtCap, NoNumericLimitAtCap };
const char* verdict_name(Verdict v);

struct PolicyTrace {
  std::string policy;
  std::vector<Value> values;  // values[k] is the depth k+1 approximation
  LimitOutcome outcome;
};

struct IAReport {
  Verdict verdict = Verdict::NoNumericLimitAtCap;
  Value value;  // meaningful when verdict == Defined
  std::string witness;
  std::optional<Value> divergence;  // extension point all traces drift toward
  std::vector<PolicyTrace> traces;
  double tol = 0.0;
  int cap = 0;
};

// Two policies that each stop once their increments drop below tol can sit a
// small multiple of tol apart even when they share a limit, so cross-policy
// agreement is judged at this multiple of tol rather than tol itself.
inline constexpr double kAgreeBandFactor = 8.0;
inline constexpr int kLimitWindow = 4;
inline constexpr int kDefaultCap = 20;
inline constexpr double kDefaultTol = 1e-6;

// Runs every policy's depth sequence through limit() and combines:
//   Defined      all converge and pairwise agree within kAgreeBandFactor*tol
//                (value taken from the lexicographically smallest policy id)
//   Undefined    all converge but two land measurably apart (witness names
//                the farthest pair)
//   FundamentallyUndefinedAtCap   no policy converges; `divergence` is set
//                when every trace drifts toward the same extension point
//   NoNumericLimitAtCap           a strict subset converges
// The verdict is invariant under policy reordering and duplication. Policies
// run in parallel up to the MC_THREADS budget; results are deterministic.
IAReport ia_integrate(const FunctionExpr& f, const MeasurePtr& mu, const Region& U,
                      const IntegrationElement& elem, const std::vector<IAPolicy>& policies,
                      double tol = kDefaultTol, int cap = kDefaultCap);

// Parallelism budget: MC_THREADS when set (minimum 1), else hardware width.
int thread_budget();

}  // namespace mcalc
