#include "mcalc/forms.hpp"

#include <algorithm>

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

std::string summand_label(size_t k, const BasicForm& s) {
  return "summand " + std::to_string(k) + " (f=" + s.f.str() + ", mu=" + s.mu->id() + ")";
}

}  // namespace

Form::Form(ComplexPtr cx, int level, std::vector<BasicForm> summands)
    : complex_(std::move(cx)), level_(level), summands_(std::move(summands)) {
  if (!complex_) fail(Err::Schema, "form needs a chain complex");
  const ChainComplex::Level& lv = complex_->level(level_);
  for (size_t k = 0; k < summands_.size(); ++k) {
    const BasicForm& s = summands_[k];
    if (!s.mu) fail(Err::Schema, "summand " + std::to_string(k) + " has no measure");
    if (!s.complex || s.complex->id() != complex_->id())
      fail(Err::Schema, summand_label(k, s) + " is attached to a different complex");
    if (s.level != level_)
      fail(Err::LevelMismatch, summand_label(k, s) + " sits at level " + std::to_string(s.level) +
                                   " in a level-" + std::to_string(level_) + " sum");
    if (s.f.codomain()->id() != lv.calc->y->id())
      fail(Err::WrongCodomain, summand_label(k, s) + ": function codomain " +
                                   s.f.codomain()->id() + " is not the " + lv.calc->id +
                                   " function magma " + lv.calc->y->id());
    if (s.mu->codomain()->id() != lv.calc->m->id())
      fail(Err::WrongCodomain, summand_label(k, s) + ": measure codomain " +
                                   s.mu->codomain()->id() + " is not the " + lv.calc->id +
                                   " measure magma " + lv.calc->m->id());
    if (!s.mu->space()->compatible(*lv.coll.space))
      fail(Err::MixedSpaces, summand_label(k, s) + ": measure lives off the level space");
    if (s.domain && !region_in_space(*s.domain, *lv.coll.space))
      fail(Err::MixedSpaces, summand_label(k, s) + ": domain is not a region of the level space");
  }
}

Form form_add(const Form& a, const Form& b) {
  if (a.complex()->id() != b.complex()->id())
    fail(Err::Schema, "cannot add forms on complexes " + a.complex()->id() + " and " +
                          b.complex()->id());
  if (a.level() != b.level())
    fail(Err::LevelMismatch, "cannot add forms at levels " + std::to_string(a.level()) + " and " +
                                 std::to_string(b.level()));
  std::vector<BasicForm> summands = a.summands();
  summands.insert(summands.end(), b.summands().begin(), b.summands().end());
  return Form(a.complex(), a.level(), std::move(summands));
}

IAReport eval_form(const Form& omega, const Chain& c, double tol, int cap) {
  const ChainComplex::Level& lv = omega.complex()->level(omega.level());
  if (!c.is_empty()) {
    if (c.level() != omega.level())
      fail(Err::LevelMismatch, "level-" + std::to_string(c.level()) + " chain against a level-" +
                                   std::to_string(omega.level()) + " form");
    if (!c.terms().front().region.space()->compatible(*lv.coll.space))
      fail(Err::MixedSpaces, "chain space does not match the form's level space");
    for (size_t k = 0; k < omega.summands().size(); ++k) {
      const BasicForm& s = omega.summands()[k];
      if (!s.domain) continue;
      for (const ChainTerm& t : c.terms())
        if (!region_subset(t.region, *s.domain))
          fail(Err::CoverageGap, summand_label(k, s) + " does not cover " + t.region.str());
    }
  }

  IAReport out;
  out.tol = tol;
  out.cap = cap;
  out.verdict = Verdict::Defined;
  out.value = lv.calc->g_out->identity();
  if (omega.summands().empty()) return out;  // the zero form

  std::vector<IAReport> parts;
  parts.reserve(omega.summands().size());
  for (const BasicForm& s : omega.summands())
    parts.push_back(integrate_chain(c, s.f, s.mu, lv.calc, tol, cap));

  size_t worst = 0;
  for (size_t k = 1; k < parts.size(); ++k)
    if (verdict_rank(parts[k].verdict) > verdict_rank(parts[worst].verdict)) worst = k;
  out.verdict = parts[worst].verdict;

  for (size_t k = 0; k < parts.size(); ++k)
    for (PolicyTrace& tr : parts[k].traces) {
      if (parts.size() > 1) tr.policy = "summand" + std::to_string(k) + ":" + tr.policy;
      out.traces.push_back(std::move(tr));
    }

  if (out.verdict == Verdict::Defined) {
    std::vector<Value> vals;
    vals.reserve(parts.size());
    for (const IAReport& p : parts) vals.push_back(p.value);
    out.value = fold_ordered(*lv.calc->g_out, vals);
  } else {
    out.witness = summand_label(worst, omega.summands()[worst]) + ": " + parts[worst].witness;
    out.divergence = parts[worst].divergence;
  }
  return out;
}

namespace {

// Samples the differentiability precondition: every generator inside the
// declared region (plus one concatenation, when two fit) must produce a
// Defined boundary value in the output carrier.
void probe_differentiability(const DerivativeForm& d, double tol, int cap) {
  const ChainComplex::Level& lv = d.complex()->level(d.level());
  std::vector<Region> eligible;
  for (const Region& g : lv.coll.generators)
    if (region_subset(g, d.domain())) eligible.push_back(g);

  std::vector<Chain> chains;
  chains.reserve(eligible.size() + 1);
  for (const Region& g : eligible) chains.push_back(d.complex()->make(d.level(), {{"e", g}}));
  if (eligible.size() >= 2)
    chains.push_back(
        d.complex()->make(d.level(), {{"e", eligible[0]}, {"e", eligible[1]}}));

  for (const Chain& c : chains) {
    DFormReport r;
    try {
      r = eval_dform(d, c, tol, cap);
    } catch (const Error& e) {
      fail(Err::NotExteriorDifferentiable,
           "on " + c.str() + ": the boundary evaluation failed (" + e.what() + ")");
    }
    if (r.outside_domain)
      fail(Err::NotExteriorDifferentiable,
           "on " + c.str() + ": the boundary leaves the inner evaluator's region");
    if (r.rep.verdict != Verdict::Defined)
      fail(Err::NotExteriorDifferentiable,
           "on " + c.str() + ": boundary integral verdict " + verdict_name(r.rep.verdict) +
               (r.rep.witness.empty() ? "" : "; " + r.rep.witness));
    if (lv.calc->g_out->is_extension_point(r.rep.value))
      fail(Err::NotExteriorDifferentiable, "on " + c.str() +
                                               ": the boundary integral escapes the carrier (" +
                                               value_str(r.rep.value) + ")");
  }
}

void check_upper_level(const ComplexPtr& cx, int up, const Region& S) {
  if (up > cx->top())
    fail(Err::LevelMismatch,
         cx->id() + " has no level " + std::to_string(up) + " to differentiate into");
  if (!S.empty() && !region_in_space(S, *cx->level(up).coll.space))
    fail(Err::MixedSpaces, "the declared region is not in the level-" + std::to_string(up) +
                               " space of " + cx->id());
}

}  // namespace

DerivativeForm exterior_derivative(const Form& omega, const Region& S, double tol, int cap) {
  const ComplexPtr& cx = omega.complex();
  int up = omega.level() + 1;
  check_upper_level(cx, up, S);

  DerivativeForm d;
  d.complex_ = cx;
  d.level_ = up;
  d.domain_ = S;
  d.base_ = [omega, cx](const Chain& c, double t, int cp) -> DFormReport {
    return {false, eval_form(omega, cx->boundary(c), t, cp)};
  };
  probe_differentiability(d, tol, cap);
  return d;
}

DerivativeForm exterior_derivative(const DerivativeForm& omega, const Region& S, double tol,
                                   int cap) {
  const ComplexPtr& cx = omega.complex_;
  if (!cx) fail(Err::Schema, "exterior derivative of an uninitialized evaluator");
  int up = omega.level_ + 1;
  check_upper_level(cx, up, S);

  DerivativeForm d;
  d.complex_ = cx;
  d.level_ = up;
  d.domain_ = S;
  d.base_ = [omega, cx](const Chain& c, double t, int cp) -> DFormReport {
    return eval_dform(omega, cx->boundary(c), t, cp);
  };
  probe_differentiability(d, tol, cap);
  return d;
}

DFormReport eval_dform(const DerivativeForm& d, const Chain& c, double tol, int cap) {
  if (!d.complex_) fail(Err::Schema, "evaluating an uninitialized derivative form");
  const ChainComplex::Level& lv = d.complex_->level(d.level_);
  if (!c.is_empty()) {
    if (c.level() != d.level_)
      fail(Err::LevelMismatch, "level-" + std::to_string(c.level()) +
                                   " chain against a level-" + std::to_string(d.level_) +
                                   " derivative form");
    if (!c.terms().front().region.space()->compatible(*lv.coll.space))
      fail(Err::MixedSpaces, "chain space does not match the derivative form's level space");
    for (const ChainTerm& t : c.terms())
      if (!region_subset(t.region, d.domain_)) {
        DFormReport r;
        r.outside_domain = true;
        r.rep.witness = t.orientation + "*" + t.region.str() + " is outside the declared region";
        return r;
      }
  }
  return d.base_(c, tol, cap);
}

namespace {

void check_stokes_frame(const Form& omega, const Chain& c, const ComplexPtr& cand_cx,
                        int cand_level) {
  if (cand_cx->id() != omega.complex()->id())
    fail(Err::Schema, "candidate lives on " + cand_cx->id() + ", the form on " +
                          omega.complex()->id());
  if (cand_level != omega.level() + 1)
    fail(Err::LevelMismatch, "candidate at level " + std::to_string(cand_level) +
                                 " cannot witness the derivative of a level-" +
                                 std::to_string(omega.level()) + " form");
  if (!c.is_empty() && c.level() != omega.level() + 1)
    fail(Err::LevelMismatch, "stokes pairing needs a level-" +
                                 std::to_string(omega.level() + 1) + " chain, got level " +
                                 std::to_string(c.level()));
}

const IAReport& expect_defined(const IAReport& r, const char* side) {
  if (r.verdict != Verdict::Defined)
    fail(Err::Schema, std::string(side) + " side verdict is " + verdict_name(r.verdict) +
                          (r.witness.empty() ? "" : ": " + r.witness));
  return r;
}

}  // namespace

double stokes_residual(const Form& omega, const Chain& c, const Form& candidate, double tol,
                       int cap) {
  check_stokes_frame(omega, c, candidate.complex(), candidate.level());
  const IAReport rhs = eval_form(omega, omega.complex()->boundary(c), tol, cap);
  const IAReport lhs = eval_form(candidate, c, tol, cap);
  expect_defined(lhs, "candidate");
  expect_defined(rhs, "boundary");
  return omega.complex()->level(omega.level()).calc->g_out->chart_distance(lhs.value, rhs.value);
}

double stokes_residual(const Form& omega, const Chain& c, const DerivativeForm& candidate,
                       double tol, int cap) {
  if (!candidate.complex()) fail(Err::Schema, "candidate evaluator is uninitialized");
  check_stokes_frame(omega, c, candidate.complex(), candidate.level());
  const IAReport rhs = eval_form(omega, omega.complex()->boundary(c), tol, cap);
  const DFormReport lhs = eval_dform(candidate, c, tol, cap);
  if (lhs.outside_domain)
    fail(Err::CoverageGap, "candidate refuses the chain: " + lhs.rep.witness);
  expect_defined(lhs.rep, "candidate");
  expect_defined(rhs, "boundary");
  return omega.complex()->level(omega.level()).calc->g_out->chart_distance(lhs.rep.value,
                                                                           rhs.value);
}

FormEquivReport forms_extensionally_equal(const Form& a, const Form& b, double tol, int cap) {
  if (a.complex()->id() != b.complex()->id())
    fail(Err::Schema, "cannot compare forms on complexes " + a.complex()->id() + " and " +
                          b.complex()->id());
  if (a.level() != b.level())
    fail(Err::LevelMismatch, "cannot compare forms at levels " + std::to_string(a.level()) +
                                 " and " + std::to_string(b.level()));
  const ChainComplex::Level& lv = a.complex()->level(a.level());
  const auto& gens = lv.coll.generators;

  std::vector<Chain> probes;
  size_t take = std::min<size_t>(gens.size(), 6);
  for (size_t i = 0; i < take; ++i)
    probes.push_back(a.complex()->make(a.level(), {{"e", gens[i]}}));
  if (take >= 2) {
    probes.push_back(a.complex()->make(a.level(), {{"e", gens[0]}, {"e", gens[1]}}));
    const auto& ors = lv.calc->orientations;
    if (std::find(ors.begin(), ors.end(), "neg") != ors.end())
      probes.push_back(a.complex()->make(a.level(), {{"e", gens[0]}, {"neg", gens[1]}}));
  }

  auto run = [&](const Form& w, const Chain& c) -> std::optional<IAReport> {
    try {
      return eval_form(w, c, tol, cap);
    } catch (const Error& e) {
      if (e.kind() == Err::CoverageGap) return std::nullopt;
      throw;
    }
  };

  for (const Chain& c : probes) {
    std::optional<IAReport> ra = run(a, c);
    std::optional<IAReport> rb = run(b, c);
    if (ra.has_value() != rb.has_value())
      return {false, "on " + c.str() + ": only one side covers the chain"};
    if (!ra) continue;
    if (ra->verdict != rb->verdict)
      return {false, "on " + c.str() + ": verdict " + verdict_name(ra->verdict) + " vs " +
                         verdict_name(rb->verdict)};
    if (ra->verdict != Verdict::Defined) continue;
    double dist = lv.calc->g_out->chart_distance(ra->value, rb->value);
    if (dist > kAgreeBandFactor * tol)
      return {false, "on " + c.str() + ": " + value_str(ra->value) + " vs " +
                         value_str(rb->value) + " (chart distance " + std::to_string(dist) + ")"};
  }
  return {};
}

}  // namespace mcalc
