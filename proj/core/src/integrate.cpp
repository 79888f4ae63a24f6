#include "mcalc/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <thread>

#include "mcalc/errors.hpp"

namespace mcalc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_double(std::uint64_t bits) { return (bits >> 11) * 0x1p-53; }

bool is_free_node(const Value& v) { return !is_num(v) && term(v).is_node(); }

Value apply_rec(const IntegrationElement& e, const Value& a, const Value& m) {
  if (value_equal(a, e.y->identity(), 0.0)) return e.g_out->identity();
  if (value_equal(m, e.m->identity(), 0.0)) return e.g_out->identity();
  const bool a_comp = is_free_node(a);
  const bool m_comp = is_free_node(m);
  if (e.order == ExpansionOrder::YFirst) {
    if (a_comp)
      return e.g_out->op(apply_rec(e, Value(term(a).left()), m),
                         apply_rec(e, Value(term(a).right()), m));
    if (m_comp)
      return e.g_out->op(apply_rec(e, a, Value(term(m).left())),
                         apply_rec(e, a, Value(term(m).right())));
  } else {
    if (m_comp)
      return e.g_out->op(apply_rec(e, a, Value(term(m).left())),
                         apply_rec(e, a, Value(term(m).right())));
    if (a_comp)
      return e.g_out->op(apply_rec(e, Value(term(a).left()), m),
                         apply_rec(e, Value(term(a).right()), m));
  }
  return e.pair(a, m);
}

// Random carrier element. `primitive` asks for a non-composite value: an
// atom for free magmas, any carrier value numerically.
Value sample_value(const Magma& mg, std::mt19937_64& rng, bool primitive) {
  const std::string& id = mg.id();
  if (id.rfind("free:", 0) == 0) {
    std::string alphabet = id.substr(5);
    auto atom = [&]() -> Value {
      return Value(FreeTerm::atom(std::string(1, alphabet[rng() % alphabet.size()])));
    };
    Value acc = atom();
    if (!primitive) {
      int extra = static_cast<int>(rng() % 3);
      for (int i = 0; i < extra; ++i) acc = mg.op(acc, atom());
    }
    return acc;
  }
  double u = unit_double(rng());
  if (id == "pos_mul") return std::exp((2.0 * u - 1.0) * 2.0);
  if (id == "ext_nonneg_add" || id == "ext_nonneg_mul") return u * 10.0 + 0.01;
  return (2.0 * u - 1.0) * 10.0;
}

void check_law(bool ok, const IntegrationElement& e, const std::string& law,
               const Value& lhs, const Value& rhs) {
  if (ok) return;
  fail(Err::Schema, "element '" + e.id + "' violates " + law + ": " + value_str(lhs) +
                        " != " + value_str(rhs));
}

// --- interval partition schemes ----------------------------------------

constexpr int kSnapBits = 40;

long long to_snapped(const Rat& r) {
  __int128 t = static_cast<__int128>(r.numerator()) << kSnapBits;
  long long q = r.denominator();  // > 0 by boost::rational invariant
  __int128 n = t >= 0 ? (t + q / 2) / q : (t - q / 2) / q;
  return static_cast<long long>(n);
}

void split_randomized_rec(const Rat& lo, const Rat& hi, int remaining, std::uint64_t key,
                          std::uint64_t seed, std::vector<Iv>& out) {
  if (remaining == 0) {
    out.push_back(iv(lo, hi));
    return;
  }
  std::uint64_t h = splitmix64(seed ^ (key * 0x9e3779b97f4a7c15ULL));
  long long jitter = static_cast<long long>(h % 205);  // fraction in [409/1024, 613/1024]
  long long L = to_snapped(lo);
  long long H = to_snapped(hi);
  long long C = L + ((H - L) * (409 + jitter)) / 1024;
  C = std::max(L + 1, std::min(H - 1, C));
  Rat cut(C, 1LL << kSnapBits);
  split_randomized_rec(lo, cut, remaining - 1, 2 * key + 1, seed, out);
  split_randomized_rec(cut, hi, remaining - 1, 2 * key + 2, seed, out);
}

std::vector<Iv> split_cell(const Iv& c, const std::string& scheme, int depth,
                           std::uint64_t seed, std::uint64_t cell_key) {
  if (depth < 0 || depth > 40) fail(Err::Schema, "partition depth out of range");
  std::vector<Iv> out;
  const Rat lo = c.lo.r, hi = c.hi.r;
  // a point cell admits only itself as a piece; without this, uniform
  // splitting would emit 2^depth copies and multiply counting mass
  if (lo == hi) return {c};
  if (scheme == "uniform") {
    long long n = 1LL << depth;
    Rat w = hi - lo;
    out.reserve(static_cast<size_t>(n));
    Rat prev = lo;
    for (long long i = 1; i <= n; ++i) {
      Rat cut = (i == n) ? hi : lo + w * Rat(i, n);
      out.push_back(iv(prev, cut));
      prev = cut;
    }
    return out;
  }
  if (scheme == "dyadic") {
    long long scale = 1LL << depth;
    // first grid point strictly above lo
    Rat scaled = lo * Rat(scale, 1);
    long long k = scaled.numerator() >= 0
                      ? scaled.numerator() / scaled.denominator() + 1
                      : -((-scaled.numerator() + scaled.denominator() - 1) / scaled.denominator()) + 1;
    Rat prev = lo;
    for (; Rat(k, scale) < hi; ++k) {
      out.push_back(iv(prev, Rat(k, scale)));
      prev = Rat(k, scale);
    }
    out.push_back(iv(prev, hi));
    return out;
  }
  if (scheme == "randomized") {
    split_randomized_rec(lo, hi, depth, cell_key, seed, out);
    return out;
  }
  fail(Err::UnknownKey, "unknown partition scheme '" + scheme + "'");
}

Rat tag_point(const Iv& piece, const std::string& tag) {
  if (tag == "left") return piece.lo.r;
  if (tag == "right") return piece.hi.r;
  if (tag == "midpoint") return (piece.lo.r + piece.hi.r) / 2;
  fail(Err::UnknownKey, "unknown tag rule '" + tag + "'");
}

void require_kind(const Region& U, Space::Kind k, const char* what) {
  if (U.empty()) return;
  if (U.space()->kind() != k)
    fail(Err::WrongSpaceKind, std::string(what) + " needs a " + Space::kind_name(k) + " region, got " +
                                  U.space()->str());
}

// Shared body of the 1D tagged-partition policies.
SimpleFunction tagged_partition(const FunctionExpr& f, const Region& U, int depth,
                                const std::string& scheme, const std::string& tag,
                                std::uint64_t seed, const MagmaPtr& y) {
  std::vector<SimpleTerm> terms;
  std::uint64_t cell_key = 1;
  for (const Cell& c : U.cells()) {
    const Iv& whole = std::get<IntervalCell>(c).iv;
    if (!whole.lo.finite() || !whole.hi.finite())
      fail(Err::NotIntegrable, "cannot partition the unbounded cell " + cell_str(c));
    if (whole.degenerate()) {
      terms.push_back({Region(U.space(), {c}), f.eval(Point::at(rat_num(whole.lo.r)))});
      ++cell_key;
      continue;
    }
    for (const Iv& piece : split_cell(whole, scheme, depth, seed, cell_key << 24)) {
      Value coeff = f.eval(Point::at(rat_num(tag_point(piece, tag))));
      terms.push_back({Region(U.space(), {Cell(IntervalCell{piece})}), coeff});
    }
    ++cell_key;
  }
  return SimpleFunction(y, std::move(terms));
}

void validate_scheme_tag(const std::string& scheme, const std::string& tag) {
  if (scheme != "uniform" && scheme != "dyadic" && scheme != "randomized")
    fail(Err::UnknownKey, "unknown partition scheme '" + scheme + "'");
  if (tag != "left" && tag != "right" && tag != "midpoint")
    fail(Err::UnknownKey, "unknown tag rule '" + tag + "'");
}

}  // namespace

Value element_apply(const IntegrationElement& e, const Value& a, const Value& m) {
  if (!e.y || !e.m || !e.g_out || !e.pair) fail(Err::Schema, "integration element is incomplete");
  return apply_rec(e, a, m);
}

void check_element(const IntegrationElement& e, std::uint64_t seed) {
  if (!e.y || !e.m || !e.g_out || !e.pair) fail(Err::Schema, "integration element is incomplete");
  std::mt19937_64 rng(seed);
  auto close = [&](const Value& a, const Value& b) {
    return e.g_out->chart_distance(a, b) <= 1e-9;
  };
  for (int i = 0; i < 500; ++i) {
    Value a = sample_value(*e.y, rng, false);
    Value b = sample_value(*e.y, rng, false);
    Value m = sample_value(*e.m, rng, true);
    Value lhs = element_apply(e, e.y->op(a, b), m);
    Value rhs = e.g_out->op(element_apply(e, a, m), element_apply(e, b, m));
    check_law(close(lhs, rhs), e, "left distributivity", lhs, rhs);
  }
  for (int i = 0; i < 500; ++i) {
    Value a = sample_value(*e.y, rng, true);
    Value m1 = sample_value(*e.m, rng, false);
    Value m2 = sample_value(*e.m, rng, false);
    Value lhs = element_apply(e, a, e.m->op(m1, m2));
    Value rhs = e.g_out->op(element_apply(e, a, m1), element_apply(e, a, m2));
    check_law(close(lhs, rhs), e, "right distributivity", lhs, rhs);
  }
  std::vector<Value> ms = e.m->extension_points();
  for (int i = 0; i < 100; ++i) ms.push_back(sample_value(*e.m, rng, false));
  for (const Value& m : ms) {
    Value got = element_apply(e, e.y->identity(), m);
    check_law(close(got, e.g_out->identity()), e, "annihilation at the function identity", got,
              e.g_out->identity());
  }
}

SimpleFunction::SimpleFunction(MagmaPtr y, std::vector<SimpleTerm> terms) : y_(std::move(y)) {
  if (!y_) fail(Err::Schema, "simple function needs a coefficient magma");
  terms_.reserve(terms.size());
  for (auto& t : terms) {
    if (t.region.empty()) continue;
    if (value_equal(t.coeff, y_->identity(), 0.0)) continue;
    if (!y_->contains(t.coeff))
      fail(Err::Schema, "coefficient " + value_str(t.coeff) + " is outside the carrier of " +
                            y_->id());
    terms_.push_back(std::move(t));
  }
}

Value SimpleFunction::eval(const Point& p) const {
  Value acc = y_ ? y_->identity() : Value(0.0);
  if (!y_) return acc;
  for (const SimpleTerm& t : terms_)
    if (region_contains_point(t.region, p)) acc = y_->op(acc, t.coeff);
  return acc;
}

std::string SimpleFunction::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (i) out += " ++ ";
    out += value_str(terms_[i].coeff) + "*" + terms_[i].region.str();
  }
  return out;
}

SimpleFunction sf_concat(const SimpleFunction& a, const SimpleFunction& b) {
  if (!a.y()) return b;
  if (!b.y()) return a;
  if (a.y()->id() != b.y()->id())
    fail(Err::Schema, "cannot concatenate simple functions over different coefficient magmas");
  std::vector<SimpleTerm> ts = a.terms();
  ts.insert(ts.end(), b.terms().begin(), b.terms().end());
  return SimpleFunction(a.y(), std::move(ts));
}

Value simple_integral(const SimpleFunction& s, const Measure& mu, const Region& U,
                      const IntegrationElement& e) {
  Value acc = e.g_out->identity();
  size_t k = 0;
  for (const SimpleTerm& t : s.terms()) {
    MeasureValue mv = measure_eval(mu, region_intersect(t.region, U));
    if (mv.cls == MeasureClass::Infinite)
      fail(Err::NotIntegrable, "term " + std::to_string(k) + " (" + t.region.str() +
                                   ") meets the domain in infinite measure");
    acc = e.g_out->op(acc, element_apply(e, t.coeff, mv.v));
    ++k;
  }
  return acc;
}

IAPolicy riemann_policy(const std::string& scheme, const std::string& tag, std::uint64_t seed) {
  validate_scheme_tag(scheme, tag);
  IAPolicy p;
  p.id = "riemann:" + scheme + ":" + tag;
  p.tags = {{"family", "riemann"}, {"scheme", scheme}, {"tag", tag}};
  MagmaPtr y = magma("real_add");
  p.generate = [scheme, tag, seed, y](const FunctionExpr& f, const Region& U, const Measure&,
                                      int depth) {
    if (!is_num(f.codomain()->identity()))
      fail(Err::WrongCodomain, "riemann policies need a numeric function codomain");
    require_kind(U, Space::Kind::Interval1D, "a riemann policy");
    return tagged_partition(f, U, depth, scheme, tag, seed, y);
  };
  return p;
}

IAPolicy geometric_policy(const std::string& scheme, const std::string& tag, std::uint64_t seed) {
  validate_scheme_tag(scheme, tag);
  IAPolicy p;
  p.id = "geometric:" + scheme + ":" + tag;
  p.tags = {{"family", "geometric"}, {"scheme", scheme}, {"tag", tag}};
  MagmaPtr y = magma("pos_mul");
  p.generate = [scheme, tag, seed, y](const FunctionExpr& f, const Region& U, const Measure&,
                                      int depth) {
    if (f.codomain()->id() != "pos_mul")
      fail(Err::WrongCodomain, "geometric policies need the pos_mul function codomain, got " +
                                   f.codomain()->id());
    require_kind(U, Space::Kind::Interval1D, "a geometric policy");
    return tagged_partition(f, U, depth, scheme, tag, seed, y);
  };
  return p;
}

IAPolicy lebesgue_policy() {
  IAPolicy p;
  p.id = "lebesgue";
  p.tags = {{"family", "lebesgue"}, {"dominated", "yes"}};
  MagmaPtr y = magma("real_add");
  p.generate = [y](const FunctionExpr& f, const Region& U, const Measure&, int depth) {
    if (!is_num(f.codomain()->identity()))
      fail(Err::WrongCodomain, "the lebesgue policy needs a numeric function codomain");
    require_kind(U, Space::Kind::Interval1D, "the lebesgue policy");
    const double q = std::ldexp(1.0, -depth);
    std::vector<SimpleTerm> terms;
    for (const Cell& c : U.cells()) {
      const Iv& whole = std::get<IntervalCell>(c).iv;
      if (!whole.lo.finite() || !whole.hi.finite())
        fail(Err::NotIntegrable, "cannot partition the unbounded cell " + cell_str(c));
      if (whole.degenerate()) continue;  // zero length: nothing to dominate
      for (const Iv& piece : split_cell(whole, "dyadic", depth, 0, 0)) {
        // Cellwise one-sided bound of f, quantized toward zero in multiples
        // of 2^-depth. The bound is the extremum over the cell's endpoints
        // and eighths; it equals the true extremum whenever f is monotone
        // between consecutive lattice points, which makes both dominance
        // conditions exact. The lattice refines with the cells, so any
        // violation for wilder functions is transient and caught by the
        // pointwise spot-check.
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (int j = 0; j <= 8; ++j) {
          Rat x = piece.lo.r + (piece.hi.r - piece.lo.r) * Rat(j, 8);
          double v = num(f.eval(Point::at(rat_num(x))));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        double coeff = 0.0;
        if (lo > 0.0)
          coeff = std::floor(lo / q) * q;
        else if (hi < 0.0)
          coeff = -std::floor(-hi / q) * q;
        if (coeff == 0.0) continue;
        terms.push_back({Region(U.space(), {Cell(IntervalCell{piece})}), coeff});
      }
    }
    return SimpleFunction(y, std::move(terms));
  };
  return p;
}

IAPolicy grid2d_policy(const std::string& tag) {
  if (tag != "center" && tag != "centerswap" && tag != "lowerleft")
    fail(Err::UnknownKey, "unknown grid tag '" + tag + "'");
  IAPolicy p;
  p.id = "grid2d:" + tag;
  p.tags = {{"family", "grid2d"}, {"tag", tag}};
  MagmaPtr y = magma("real_add");
  p.generate = [tag, y](const FunctionExpr& f, const Region& U, const Measure&, int depth) {
    if (!is_num(f.codomain()->identity()))
      fail(Err::WrongCodomain, "grid policies need a numeric function codomain");
    require_kind(U, Space::Kind::GridFaces, "a grid policy");
    // ~2^depth subrects per cell, split across the two axes; centerswap
    // refines the axes on the opposite schedule so the two center policies
    // walk genuinely different partition sequences toward the same limit.
    int dx = tag == "centerswap" ? depth / 2 : (depth + 1) / 2;
    int dy = depth - dx;
    std::vector<SimpleTerm> terms;
    for (const Cell& c : U.cells()) {
      const RectCell& r = std::get<RectCell>(c);
      auto xs = split_cell(r.x, "uniform", dx, 0, 0);
      auto ys = split_cell(r.y, "uniform", dy, 0, 0);
      for (const Iv& px : xs)
        for (const Iv& py : ys) {
          Rat tx = tag == "lowerleft" ? px.lo.r : (px.lo.r + px.hi.r) / 2;
          Rat ty = tag == "lowerleft" ? py.lo.r : (py.lo.r + py.hi.r) / 2;
          Value coeff = f.eval(Point::at(rat_num(tx), rat_num(ty)));
          terms.push_back({Region(U.space(), {Cell(RectCell{px, py})}), coeff});
        }
    }
    return SimpleFunction(y, std::move(terms));
  };
  return p;
}

IAPolicy edge_policy() {
  IAPolicy p;
  p.id = "edge:midpoint";
  p.tags = {{"family", "edge"}, {"tag", "midpoint"}};
  MagmaPtr y = magma("real_add");
  p.generate = [y](const FunctionExpr& f, const Region& U, const Measure&, int depth) {
    if (!is_num(f.codomain()->identity()))
      fail(Err::WrongCodomain, "the edge policy needs a numeric function codomain");
    require_kind(U, Space::Kind::GridEdges, "the edge policy");
    std::vector<SimpleTerm> terms;
    for (const Cell& c : U.cells()) {
      const EdgeCell& e = std::get<EdgeCell>(c);
      for (const Iv& piece : split_cell(e.span, "uniform", depth, 0, 0)) {
        Rat m = (piece.lo.r + piece.hi.r) / 2;
        Point pt = e.vertical ? Point::at(rat_num(e.offset), rat_num(m))
                              : Point::at(rat_num(m), rat_num(e.offset));
        terms.push_back({Region(U.space(), {Cell(EdgeCell{e.vertical, e.offset, piece})}),
                         f.eval(pt)});
      }
    }
    return SimpleFunction(y, std::move(terms));
  };
  return p;
}

IAPolicy atomic_policy() {
  IAPolicy p;
  p.id = "atomic";
  p.tags = {{"family", "atomic"}};
  // One term over the whole region: the coarsest approximation, constant in
  // depth. The formal calculi use it, where a region is a single atom and
  // refinement has no metric meaning.
  p.generate = [](const FunctionExpr& f, const Region& U, const Measure&, int) {
    std::vector<SimpleTerm> terms;
    if (!U.empty()) terms.push_back({U, f.eval(cell_midpoint(U.cells().front()))});
    return SimpleFunction(f.codomain(), std::move(terms));
  };
  return p;
}

IAPolicy discrete_policy() {
  IAPolicy p;
  p.id = "discrete";
  p.tags = {{"family", "discrete"}};
  p.generate = [](const FunctionExpr& f, const Region& U, const Measure&, int) {
    std::vector<SimpleTerm> terms;
    for (const Cell& c : U.cells())
      terms.push_back({Region(U.space(), {c}), f.eval(cell_midpoint(c))});
    return SimpleFunction(f.codomain(), std::move(terms));
  };
  return p;
}

namespace {

IAPolicy pv_wrap(IAPolicy base, bool symmetric) {
  IAPolicy p;
  p.id = std::string("pv:") + (symmetric ? "sym" : "shift") + ":" + base.id;
  p.tags = base.tags;
  p.tags["family"] = "pv";
  p.tags["symmetric"] = symmetric ? "yes" : "no";
  p.generate = [base = std::move(base), symmetric](const FunctionExpr& f, const Region& U,
                                                   const Measure& mu, int depth) {
    if (U.empty()) return base.generate(f, U, mu, depth);
    require_kind(U, Space::Kind::Interval1D, "a principal-value policy");
    if (depth < 1 || depth > 40) fail(Err::Schema, "exclusion depth out of range");
    Rat eps(1, 1LL << depth);
    Rat lo = -eps, hi = symmetric ? eps : Rat(4, 1) * eps;
    // clamp the exclusion window to the carrier so coarse depths stay legal
    const SpacePtr& sp = U.space();
    if (sp->lo().inf == 0 && lo < sp->lo().r) lo = sp->lo().r;
    if (sp->hi().inf == 0 && hi > sp->hi().r) hi = sp->hi().r;
    if (hi < lo) return base.generate(f, U, mu, depth);
    Region window(sp, {Cell(IntervalCell{iv(lo, hi)})});
    return base.generate(f, region_difference(U, window), mu, depth);
  };
  return p;
}

}  // namespace

IAPolicy pv_symmetric(IAPolicy base) { return pv_wrap(std::move(base), true); }
IAPolicy pv_shifted(IAPolicy base) { return pv_wrap(std::move(base), false); }

std::vector<IAPolicy> restrict_policies(const std::vector<IAPolicy>& policies,
                                        const std::function<bool(const IAPolicy&)>& keep) {
  std::vector<IAPolicy> out;
  for (const IAPolicy& p : policies)
    if (keep(p)) out.push_back(p);
  return out;
}

bool symmetric_exclusion(const IAPolicy& p) {
  auto it = p.tags.find("symmetric");
  return it != p.tags.end() && it->second == "yes";
}

IAPolicy policy_by_key(const std::string& key, std::uint64_t seed) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= key.size(); ++i)
    if (i == key.size() || key[i] == ':') {
      parts.push_back(key.substr(start, i - start));
      start = i + 1;
    }
  if (parts.empty()) fail(Err::UnknownKey, "empty policy key");
  const std::string& head = parts[0];
  if (head == "riemann" && parts.size() == 3) return riemann_policy(parts[1], parts[2], seed);
  if (head == "geometric" && parts.size() == 3) return geometric_policy(parts[1], parts[2], seed);
  if (head == "lebesgue" && parts.size() == 1) return lebesgue_policy();
  if (head == "grid2d" && parts.size() == 2) return grid2d_policy(parts[1]);
  if (head == "edge" && parts.size() == 2 && parts[1] == "midpoint") return edge_policy();
  if (head == "atomic" && parts.size() == 1) return atomic_policy();
  if (head == "discrete" && parts.size() == 1) return discrete_policy();
  if (head == "pv" && parts.size() >= 3) {
    std::string rest = key.substr(parts[0].size() + parts[1].size() + 2);
    if (parts[1] == "sym") return pv_symmetric(policy_by_key(rest, seed));
    if (parts[1] == "shift") return pv_shifted(policy_by_key(rest, seed));
  }
  fail(Err::UnknownKey, "no policy registered as '" + key + "'");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Defined: return "Defined";
    case Verdict::Undefined: return "Undefined";
    case Verdict::FundamentallyUndefinedAtCap: return "FundamentallyUndefinedAtCap";
    case Verdict::NoNumericLimitAtCap: return "NoNumericLimitAtCap";
  }
  return "?";
}

int thread_budget() {
  if (const char* env = std::getenv("MC_THREADS")) {
    int n = std::atoi(env);
    return n >= 1 ? n : 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

IAReport ia_integrate(const FunctionExpr& f, const MeasurePtr& mu, const Region& U,
                      const IntegrationElement& elem, const std::vector<IAPolicy>& policies,
                      double tol, int cap) {
  if (policies.empty()) fail(Err::Schema, "ia_integrate needs at least one policy");
  if (!(tol > 0.0)) fail(Err::Schema, "ia_integrate needs a positive tolerance");
  if (!mu) fail(Err::Schema, "ia_integrate needs a measure");
  const Magma& G = *elem.g_out;

  IAReport rep;
  rep.tol = tol;
  rep.cap = cap;
  rep.value = G.identity();
  rep.traces.resize(policies.size());

  std::vector<std::exception_ptr> errors(policies.size());
  auto run_one = [&](size_t i) {
    PolicyTrace& t = rep.traces[i];
    t.policy = policies[i].id;
    try {
      auto seq = [&](int depth) -> Value {
        SimpleFunction s = policies[i].generate(f, U, *mu, depth);
        Value v = simple_integral(s, *mu, U, elem);
        t.values.push_back(v);
        return v;
      };
      t.outcome = limit(G, seq, tol, kLimitWindow, cap);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  int budget = std::min<int>(thread_budget(), static_cast<int>(policies.size()));
  if (budget <= 1) {
    for (size_t i = 0; i < policies.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(budget));
    for (int w = 0; w < budget; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < policies.size(); i = next.fetch_add(1)) run_one(i);
      });
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<size_t> conv, wander;
  for (size_t i = 0; i < rep.traces.size(); ++i)
    (rep.traces[i].outcome.converged() ? conv : wander).push_back(i);

  if (wander.empty()) {
    double worst = -1.0;
    size_t wa = 0, wb = 0;
    for (size_t ii = 0; ii < conv.size(); ++ii)
      for (size_t jj = ii + 1; jj < conv.size(); ++jj) {
        size_t i = conv[ii], j = conv[jj];
        double d = G.chart_distance(rep.traces[i].outcome.value, rep.traces[j].outcome.value);
        // deterministic argmax under reordering: break distance ties by id
        auto names = std::minmax(rep.traces[i].policy, rep.traces[j].policy);
        auto best = std::minmax(rep.traces[wa].policy, rep.traces[wb].policy);
        if (d > worst || (d == worst && names < best)) {
          worst = d;
          wa = i;
          wb = j;
        }
      }
    if (conv.size() == 1 || worst <= kAgreeBandFactor * tol) {
      rep.verdict = Verdict::Defined;
      size_t pick = conv[0];
      for (size_t i : conv)
        if (rep.traces[i].policy < rep.traces[pick].policy) pick = i;
      rep.value = rep.traces[pick].outcome.value;
    } else {
      rep.verdict = Verdict::Undefined;
      if (rep.traces[wb].policy < rep.traces[wa].policy) std::swap(wa, wb);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", worst);
      rep.witness = "policy " + rep.traces[wa].policy + " -> " +
                    value_str(rep.traces[wa].outcome.value) + " vs policy " +
                    rep.traces[wb].policy + " -> " + value_str(rep.traces[wb].outcome.value) +
                    " (chart distance " + buf + ")";
    }
    return rep;
  }

  if (conv.empty()) {
    rep.verdict = Verdict::FundamentallyUndefinedAtCap;
    bool all_drift = true;
    std::optional<Value> target;
    for (size_t i : wander) {
      const auto& dt = rep.traces[i].outcome.drift_target;
      if (!dt) { all_drift = false; break; }
      if (!target) target = *dt;
      else if (!value_equal(*target, *dt, 0.0)) { all_drift = false; break; }
    }
    if (all_drift) rep.divergence = target;
    rep.witness = "no policy sequence settled by depth " + std::to_string(cap);
    if (rep.divergence) rep.witness += "; all drift toward " + value_str(*rep.divergence);
    return rep;
  }

  rep.verdict = Verdict::NoNumericLimitAtCap;
  size_t c0 = conv[0], w0 = wander[0];
  for (size_t i : conv)
    if (rep.traces[i].policy < rep.traces[c0].policy) c0 = i;
  for (size_t i : wander)
    if (rep.traces[i].policy < rep.traces[w0].policy) w0 = i;
  rep.witness = "policy " + rep.traces[c0].policy + " settled at " +
                value_str(rep.traces[c0].outcome.value) + " but policy " + rep.traces[w0].policy +
                " did not settle by depth " + std::to_string(cap);
  return rep;
}

}  // namespace mcalc
