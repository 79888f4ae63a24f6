#pragma once

#include <optional>

#include "mcalc/chain.hpp"

namespace mcalc {

// One (f, mu) pair on a level of a complex. Evaluation on a chain is
// integrate_chain(c, f, mu) under the level's calculus, which makes
// additivity over concatenation and restriction coherence structural: there
// is a single global representation and every chain sees it the same way.
struct BasicForm {
  ComplexPtr complex;
  int level = 0;
  FunctionExpr f;
  MeasurePtr mu;
  // Where the representation answers. Chains with a term outside it raise
  // Err::CoverageGap. Unset means the whole carrier, the only available
  // reading on strata without a finite full region (grid edges, vertices).
  std::optional<Region> domain;
};

// Ordered summand list at one level. Evaluation folds the summand integrals
// left to right in the level's output magma, so order is data. The zero form
// has no summands and evaluates to the identity on every chain.
class Form {
 public:
  static Form zero(ComplexPtr cx, int level) { return Form(std::move(cx), level, {}); }
  // Validates each summand against the complex level: matching complex and
  // level, function codomain = the calculus Y, measure codomain = M, measure
  // and domain on the level's space.
  Form(ComplexPtr cx, int level, std::vector<BasicForm> summands);

  const ComplexPtr& complex() const { return complex_; }
  int level() const { return level_; }
  const std::vector<BasicForm>& summands() const { return summands_; }

 private:
  ComplexPtr complex_;
  int level_ = 0;
  std::vector<BasicForm> summands_;
};

// Ordered concatenation of summand lists; same complex and level required.
// The zero form is a two-sided identity (extensionally and literally).
Form form_add(const Form& a, const Form& b);

// Fold over summands of integrate_chain(c, f_i, mu_i) under the level's
// calculus. The empty chain gives the identity at any level. Verdicts
// combine worst-first (Defined < Undefined < NoNumericLimitAtCap <
// FundamentallyUndefinedAtCap) with the offending summand named in the
// witness; the value is the ordered fold when everything is Defined.
// Errors: CoverageGap when a chain term escapes a summand's domain,
// LevelMismatch / MixedSpaces for chains from the wrong grading or space.
IAReport eval_form(const Form& omega, const Chain& c, double tol = kDefaultTol,
                   int cap = kDefaultCap);

struct DFormReport {
  bool outside_domain = false;  // the chain left the evaluator's declared region
  IAReport rep;                 // meaningful only when !outside_domain
};

// Evaluator produced by exterior_derivative. On a level-(n+1) chain inside
// its declared region it reports the base form's value on the boundary;
// outside, it refuses with outside_domain set rather than inventing a value.
class DerivativeForm {
 public:
  const ComplexPtr& complex() const { return complex_; }
  int level() const { return level_; }  // the chain level it consumes: n+1
  const Region& domain() const { return domain_; }

 private:
  friend DerivativeForm exterior_derivative(const Form&, const Region&, double, int);
  friend DerivativeForm exterior_derivative(const DerivativeForm&, const Region&, double, int);
  friend DFormReport eval_dform(const DerivativeForm&, const Chain&, double, int);
  DerivativeForm() = default;
  ComplexPtr complex_;
  int level_ = 0;
  Region domain_;
  std::function<DFormReport(const Chain&, double, int)> base_;
};

// The derivative evaluator: d[S, omega](c) = omega(boundary(c)) for chains
// inside S. Construction probes differentiability on every level-(n+1)
// generator inside S plus one two-generator concatenation: a boundary
// evaluation that errors, refuses, settles on a non-Defined verdict, or
// lands on an extension point raises Err::NotExteriorDifferentiable naming
// the witness chain. The probe samples generators only; parts of S without
// one go unprobed and surface failures at evaluation time. tol and cap here
// drive the probe; evaluation takes its own.
// The value on chains inside S does not depend on S: evaluators built over
// nested regions agree exactly where both answer.
DerivativeForm exterior_derivative(const Form& omega, const Region& S,
                                   double tol = kDefaultTol, int cap = kDefaultCap);
// d applied to a derivative evaluator, enabling d(d(omega)). An inner
// refusal counts as a probe failure at construction and propagates as
// outside_domain at evaluation time.
DerivativeForm exterior_derivative(const DerivativeForm& omega, const Region& S,
                                   double tol = kDefaultTol, int cap = kDefaultCap);

DFormReport eval_dform(const DerivativeForm& d, const Chain& c, double tol = kDefaultTol,
                       int cap = kDefaultCap);

// Chart distance between candidate(c) and omega(boundary(c)), both run at
// the same tol/cap. A candidate equal to exterior_derivative(omega, S) gives
// exactly zero: the two sides are the same computation. Errors: LevelMismatch
// unless omega, candidate, and c sit at levels n, n+1, n+1 of one complex;
// CoverageGap when the candidate refuses c; Schema naming the side and
// verdict when either side is not Defined.
double stokes_residual(const Form& omega, const Chain& c, const Form& candidate,
                       double tol = kDefaultTol, int cap = kDefaultCap);
double stokes_residual(const Form& omega, const Chain& c, const DerivativeForm& candidate,
                       double tol = kDefaultTol, int cap = kDefaultCap);

struct FormEquivReport {
  bool equivalent = true;
  std::string witness;  // set when distinguished: the chain and both values
};

// Extensional comparison over probe chains built from the level's
// generators: each generator alone, one two-generator concatenation, and a
// mixed-orientation pair where the calculus admits "neg". Forms agree on a
// probe when both cover it with the same verdict and, for Defined, values
// within kAgreeBandFactor * tol in the output chart; a probe only one side
// covers distinguishes them. Representations are not canonicalized: distinct
// (f, mu) pairs evaluating alike pass.
FormEquivReport forms_extensionally_equal(const Form& a, const Form& b,
                                          double tol = kEquivTol, int cap = kDefaultCap);

}  // namespace mcalc
