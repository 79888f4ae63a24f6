#include "mcalc/funcalc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <utility>

#include "mcalc/errors.hpp"

namespace mcalc {

namespace {

std::string num_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Index-sharded pool, same shape as the integration runner: exceptions are
// collected per slot and the lowest-index one wins, so failures are
// deterministic no matter how the shards interleave.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t budget = std::min<std::size_t>(thread_budget(), n);
  if (budget <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(budget);
    for (std::size_t t = 0; t < budget; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) guarded(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// One sorted run of [lo, hi] rows along a single axis. Lookup takes the last
// row starting at or before q and keeps closed upper ends, which makes a
// shared boundary belong to the row that starts there while the topmost row
// keeps its own top.
struct NumRow {
  double lo = 0.0, hi = 0.0;
  Value v;
};

const NumRow* row_at(const std::vector<NumRow>& rows, double q) {
  auto it = std::upper_bound(rows.begin(), rows.end(), q,
                             [](double x, const NumRow& r) { return x < r.lo; });
  if (it == rows.begin()) return nullptr;
  const NumRow& r = *(it - 1);
  return q <= r.hi ? &r : nullptr;
}

void sort_rows(std::vector<NumRow>& rows, const std::string& where) {
  std::sort(rows.begin(), rows.end(),
            [](const NumRow& a, const NumRow& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].lo < rows[i].hi)
      fail(Err::Schema, "piecewise cells overlap near " + num_str(rows[i + 1].lo) + " on " + where);
}

}  // namespace

FunctionExpr piecewise_constant(const std::vector<SolvedCell>& rows, MagmaPtr codomain) {
  if (!codomain) fail(Err::Schema, "a piecewise table needs a codomain");
  struct Entry {
    Cell cell;
    Value v;
  };
  std::vector<Entry> entries;
  for (const SolvedCell& r : rows) {
    if (!codomain->contains(r.value))
      fail(Err::Schema, "piecewise value " + value_str(r.value) + " is outside the carrier of " +
                            codomain->id());
    for (const Cell& c : r.cell.cells()) entries.push_back({c, r.value});
  }
  const Value idv = codomain->identity();
  const std::string display = "pcw[" + std::to_string(entries.size()) + " cells]";
  if (entries.empty())
    return FunctionExpr::named(display, [idv](const Point&) { return idv; }, codomain);
  const std::size_t kind = entries.front().cell.index();
  for (const Entry& e : entries) {
    if (e.cell.index() != kind)
      fail(Err::Schema, "a piecewise table holds one cell kind; got " +
                            cell_str(entries.front().cell) + " and " + cell_str(e.cell));
    if (std::holds_alternative<VertexCell>(e.cell) || std::holds_alternative<GVertexCell>(e.cell))
      fail(Err::Schema, "point cells cannot carry a piecewise table");
    if (!std::holds_alternative<GEdgeCell>(e.cell) && cell_degenerate(e.cell))
      fail(Err::Schema, "degenerate piecewise cell " + cell_str(e.cell));
  }

  if (std::holds_alternative<IntervalCell>(entries.front().cell)) {
    std::vector<NumRow> line;
    for (const Entry& e : entries) {
      const Iv& iv = std::get<IntervalCell>(e.cell).iv;
      line.push_back({iv.lo.num(), iv.hi.num(), e.v});
    }
    sort_rows(line, "the line");
    return FunctionExpr::named(
        display,
        [line = std::move(line), idv](const Point& p) {
          const NumRow* r = row_at(line, p.x);
          return r ? r->v : idv;
        },
        codomain);
  }

  if (std::holds_alternative<RectCell>(entries.front().cell)) {
    // Vertical slabs between consecutive x cuts; every table rect spans
    // whole slabs because its own bounds are cuts. Slabs nothing covers are
    // dropped so a rect adjoining a gap keeps its closed edge.
    std::set<double> cutset;
    for (const Entry& e : entries) {
      const RectCell& rc = std::get<RectCell>(e.cell);
      cutset.insert(rc.x.lo.num());
      cutset.insert(rc.x.hi.num());
    }
    const std::vector<double> cuts(cutset.begin(), cutset.end());
    struct Slab {
      double lo = 0.0, hi = 0.0;
      std::vector<NumRow> rows;
    };
    std::vector<Slab> slabs;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) slabs.push_back({cuts[i], cuts[i + 1], {}});
    for (const Entry& e : entries) {
      const RectCell& rc = std::get<RectCell>(e.cell);
      const std::size_t a =
          std::lower_bound(cuts.begin(), cuts.end(), rc.x.lo.num()) - cuts.begin();
      const std::size_t b =
          std::lower_bound(cuts.begin(), cuts.end(), rc.x.hi.num()) - cuts.begin();
      for (std::size_t s = a; s < b; ++s)
        slabs[s].rows.push_back({rc.y.lo.num(), rc.y.hi.num(), e.v});
    }
    slabs.erase(std::remove_if(slabs.begin(), slabs.end(),
                               [](const Slab& s) { return s.rows.empty(); }),
                slabs.end());
    for (Slab& s : slabs) sort_rows(s.rows, "the slab at x = " + num_str(s.lo));
    return FunctionExpr::named(
        display,
        [slabs = std::move(slabs), idv](const Point& p) {
          auto it = std::upper_bound(slabs.begin(), slabs.end(), p.x,
                                     [](double x, const Slab& s) { return x < s.lo; });
          if (it == slabs.begin()) return idv;
          const Slab& s = *(it - 1);
          if (p.x > s.hi) return idv;
          const NumRow* r = row_at(s.rows, p.y);
          return r ? r->v : idv;
        },
        codomain);
  }

  if (std::holds_alternative<EdgeCell>(entries.front().cell)) {
    std::map<std::pair<bool, double>, std::vector<NumRow>> lines;
    for (const Entry& e : entries) {
      const EdgeCell& ec = std::get<EdgeCell>(e.cell);
      lines[{ec.vertical, rat_num(ec.offset)}].push_back(
          {ec.span.lo.num(), ec.span.hi.num(), e.v});
    }
    for (auto& [key, rowsv] : lines)
      sort_rows(rowsv, std::string(key.first ? "the vertical line x = " : "the horizontal line y = ") +
                           num_str(key.second));
    return FunctionExpr::named(
        display,
        [lines = std::move(lines), idv](const Point& p) {
          if (auto it = lines.find({true, p.x}); it != lines.end())
            if (const NumRow* r = row_at(it->second, p.y)) return r->v;
          if (auto it = lines.find({false, p.y}); it != lines.end())
            if (const NumRow* r = row_at(it->second, p.x)) return r->v;
          return idv;
        },
        codomain);
  }

  // graph edges: exact key match on the stored direction
  std::map<std::pair<int, int>, Value> table;
  for (const Entry& e : entries) {
    const GEdgeCell& ge = std::get<GEdgeCell>(e.cell);
    if (!table.emplace(std::make_pair(ge.u, ge.v), e.v).second)
      fail(Err::Schema, "piecewise cell " + cell_str(e.cell) + " appears twice");
  }
  return FunctionExpr::named(
      display,
      [table = std::move(table), idv](const Point& p) {
        if (p.u < 0 || p.v < 0) return idv;
        auto it = table.find({p.u, p.v});
        return it == table.end() ? idv : it->second;
      },
      codomain);
}

Inverter chart_root_inverter(const CalculusPtr& calc) {
  if (!calc) fail(Err::Schema, "chart_root_inverter needs a calculus");
  if (!is_num(calc->y->identity()))
    fail(Err::InverterUnavailable, "chart root-finding needs a numeric carrier; '" +
                                       calc->y->id() + "' is formal");
  return [calc](const Value& m, const Value& r) -> Value {
    const auto diff = [&](double h) {
      return num(element_apply(calc->elem, Value{h}, m)) - num(r);
    };
    // expanding ladder through the carrier, 2^-20 .. 2^40 both ways
    std::vector<double> hs;
    if (calc->y->contains(Value{0.0})) hs.push_back(0.0);
    for (int k = -20; k <= 40; ++k) {
      const double step = std::ldexp(1.0, k);
      if (calc->y->contains(Value{step})) hs.push_back(step);
      if (calc->y->contains(Value{-step})) hs.push_back(-step);
    }
    std::sort(hs.begin(), hs.end());
    double lo = 0.0, hi = 0.0;
    bool found = false;
    double prev = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double d = diff(hs[i]);
      if (d == 0.0) return Value{hs[i]};
      if (i > 0 && std::signbit(d) != std::signbit(prev)) {
        lo = hs[i - 1];
        hi = hs[i];
        found = true;
        break;
      }
      prev = d;
    }
    if (!found)
      fail(Err::Schema, "no bracket for g(h, " + value_str(m) + ") = " + value_str(r) +
                            " along the '" + calc->y->id() + "' carrier ladder");
    double flo = diff(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = diff(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if (std::signbit(fm) == std::signbit(flo)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const Value h{0.5 * (lo + hi)};
    if (calc->g_out->chart_distance(element_apply(calc->elem, h, m), r) > 1e-9)
      fail(Err::Schema, "root-finding stalled: g(" + value_str(h) + ", " + value_str(m) +
                            ") misses " + value_str(r));
    return h;
  };
}

Inverter inverter_for(const CalculusPtr& calc) {
  if (!calc) fail(Err::Schema, "inverter_for needs a calculus");
  const MagmaPtr y = calc->y;
  if (calc->id == "riemann") {
    return [y](const Value& m, const Value& r) -> Value {
      if (num(m) == 0.0) fail(Err::Schema, "cannot invert the riemann pairing against measure 0");
      const Value h{num(r) / num(m)};
      if (!y->contains(h))
        fail(Err::Schema, "h = " + value_str(h) + " escapes the carrier of " + y->id());
      return h;
    };
  }
  if (calc->id == "product") {
    return [y](const Value& m, const Value& r) -> Value {
      if (num(m) == 0.0) fail(Err::Schema, "cannot invert the product pairing against exponent 0");
      if (!(num(r) > 0.0))
        fail(Err::Schema, "no positive h solves h^m = " + value_str(r));
      const Value h{std::pow(num(r), 1.0 / num(m))};
      if (!y->contains(h))
        fail(Err::Schema, "h = " + value_str(h) + " escapes the carrier of " + y->id());
      return h;
    };
  }
  if (is_num(y->identity())) return chart_root_inverter(calc);
  fail(Err::InverterUnavailable,
       "no inverter for the '" + calc->id + "' calculus; its function carrier is formal");
}

void validate_problem(const DerivativeProblem& p) {
  if (!p.complex) fail(Err::Schema, "the problem has no complex");
  if (!p.calc) fail(Err::Schema, "the problem has no calculus");
  if (!p.complex->f_monovalued())
    fail(Err::Schema, "complex '" + p.complex->id() +
                          "' is not f-monovalued; one function carrier must serve every level");
  const int n = p.ply + 1;
  if (p.ply < 0 || n > p.complex->top())
    fail(Err::LevelMismatch, "ply " + std::to_string(p.ply) + " needs level " + std::to_string(n) +
                                 "; complex '" + p.complex->id() + "' tops out at level " +
                                 std::to_string(p.complex->top()));
  const auto& lvl = p.complex->level(n);
  if (p.S.empty()) fail(Err::Schema, "S is empty");
  if (!region_in_space(p.S, *lvl.coll.space))
    fail(Err::MixedSpaces,
         "S = " + p.S.str() + " does not live in the level-" + std::to_string(n) + " space");
  if (!lvl.coll.membership(p.S))
    fail(Err::Schema,
         "S = " + p.S.str() + " is not a member of the level-" + std::to_string(n) + " collection");
  if (p.f.codomain()->id() != p.calc->y->id())
    fail(Err::WrongCodomain, "f maps into '" + p.f.codomain()->id() + "'; the " + p.calc->id +
                                 " calculus integrates '" + p.calc->y->id() + "'-valued functions");
  if (!p.mu) fail(Err::Schema, "the problem has no solving measure");
  if (p.mu->codomain()->id() != p.calc->m->id())
    fail(Err::WrongCodomain, "measure '" + p.mu->id() + "' maps into '" + p.mu->codomain()->id() +
                                 "'; the " + p.calc->id + " calculus pairs against '" +
                                 p.calc->m->id() + "'");
  if (p.mu->space() != lvl.coll.space)
    fail(Err::MixedSpaces, "measure '" + p.mu->id() + "' lives on a different space than level " +
                               std::to_string(n));
  const DisintegrationPtr dis = disintegration(p.complex, n);
  if (const auto rep = decomposable_check(*dis, p.mu); !rep.decomposable)
    fail(Err::NotDecomposable, "measure '" + p.mu->id() + "': " + rep.reason);
  for (std::size_t i = 0; i < p.probes.size(); ++i) {
    const ProbeChain& pr = p.probes[i];
    const std::string tag = "probe " + std::to_string(i) + " (" + pr.chain.str() + ")";
    if (pr.chain.level() != n)
      fail(Err::LevelMismatch, tag + " lives at level " + std::to_string(pr.chain.level()) +
                                   "; ply " + std::to_string(p.ply) + " probes live at level " +
                                   std::to_string(n));
    if (!pr.mu) fail(Err::Schema, tag + " has no measure");
    if (pr.mu->codomain()->id() != p.calc->m->id())
      fail(Err::WrongCodomain, tag + ": measure '" + pr.mu->id() + "' maps into '" +
                                   pr.mu->codomain()->id() + "', not '" + p.calc->m->id() + "'");
    if (pr.mu->space() != lvl.coll.space)
      fail(Err::MixedSpaces, tag + ": measure '" + pr.mu->id() + "' lives on a different space");
    if (!pr.chain.is_empty() && !region_subset(pr.chain.base_set(), p.S))
      fail(Err::Schema, tag + " leaves S = " + p.S.str());
    if (const auto rep = decomposable_check(*dis, pr.mu); !rep.decomposable)
      fail(Err::NotDecomposable, tag + ": " + rep.reason);
  }
}

VerifyReport verify_derivative(const DerivativeProblem& p, const DerivativeCandidate& cand,
                               double tol, int cap) {
  validate_problem(p);
  if (p.probes.empty()) fail(Err::Schema, "the problem has no probe chains to audit");
  if (cand.h.codomain()->id() != p.calc->y->id())
    fail(Err::WrongCodomain, "the candidate maps into '" + cand.h.codomain()->id() + "'; the " +
                                 p.calc->id + " calculus integrates '" + p.calc->y->id() +
                                 "'-valued functions");
  const DisintegrationPtr dis = disintegration(p.complex, p.ply + 1);
  struct Row {
    bool failed = false;
    double resid = 0.0;
    VerifyFailure f;
  };
  std::vector<Row> rows(p.probes.size());
  parallel_for(p.probes.size(), [&](std::size_t i) {
    const ProbeChain& pr = p.probes[i];
    Row& row = rows[i];
    IAReport lhs = integrate_chain(pr.chain, cand.h, pr.mu, p.calc, tol, cap);
    const MeasurePtr pm = disintegrate(*dis, pr.chain, pr.mu);
    const Chain b = chain_reduce(p.complex->boundary(pr.chain));
    IAReport rhs = integrate_chain(b, p.f, pm, p.calc, tol, cap);
    if (lhs.verdict != Verdict::Defined || rhs.verdict != Verdict::Defined) {
      const bool left = lhs.verdict != Verdict::Defined;
      const IAReport& bad = left ? lhs : rhs;
      row.failed = true;
      row.f = {pr.chain.str(),
               std::string(left ? "candidate" : "boundary") + " side verdict is " +
                   verdict_name(bad.verdict) + ": " + bad.witness,
               std::move(lhs), std::move(rhs)};
      return;
    }
    row.resid = p.calc->g_out->chart_distance(lhs.value, rhs.value);
    if (row.resid > kAgreeBandFactor * tol) {
      row.failed = true;
      row.f = {pr.chain.str(),
               "sides differ by " + num_str(row.resid) + " in the output chart; the band at tol " +
                   num_str(tol) + " is " + num_str(kAgreeBandFactor * tol),
               std::move(lhs), std::move(rhs)};
    }
  });
  VerifyReport rep;
  rep.checked = static_cast<int>(rows.size());
  for (Row& r : rows) {
    rep.max_residual = std::max(rep.max_residual, r.resid);
    if (r.failed) rep.failures.push_back(std::move(r.f));
  }
  rep.pass = rep.failures.empty();
  return rep;
}

SolveReport solve_derivative(const DerivativeProblem& p, const std::vector<Region>& grid,
                             const Inverter& inverter, double tol, int cap, std::uint64_t seed) {
  validate_problem(p);
  if (grid.empty()) fail(Err::Schema, "solving needs a nonempty grid");
  const int n = p.ply + 1;
  const auto& lvl = p.complex->level(n);

  // essentially disjoint cover of S: union matches, contents add up, no
  // primitive cell repeats
  std::set<std::string> seen;
  double grid_content = 0.0;
  Region covered = grid.front();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Region& cell = grid[i];
    const std::string tag = "grid cell " + std::to_string(i) + " (" + cell.str() + ")";
    if (cell.empty()) fail(Err::Schema, tag + " is empty");
    if (!lvl.coll.membership(cell))
      fail(Err::Schema, tag + " is not a member of the level-" + std::to_string(n) + " collection");
    if (!region_subset(cell, p.S)) fail(Err::Schema, tag + " leaves S = " + p.S.str());
    for (const Cell& c : cell.cells()) {
      const double content = cell_content(c);
      if (!std::isfinite(content)) fail(Err::Schema, tag + " is unbounded");
      if (!seen.insert(cell_str(c)).second) fail(Err::Schema, tag + " repeats " + cell_str(c));
      grid_content += content;
    }
    if (i > 0) covered = region_union(covered, cell);
  }
  if (covered != p.S)
    fail(Err::Schema, "the grid covers " + covered.str() + ", not S = " + p.S.str());
  double s_content = 0.0;
  for (const Cell& c : p.S.cells()) s_content += cell_content(c);
  if (std::fabs(grid_content - s_content) > 1e-9 * std::max(1.0, s_content))
    fail(Err::Schema, "grid cells overlap: their content sums to " + num_str(grid_content) +
                          " against " + num_str(s_content) + " for S");

  const DisintegrationPtr dis = disintegration(p.complex, n);
  const Inverter inv = inverter ? inverter : inverter_for(p.calc);

  struct CellOut {
    bool skipped = false;
    std::string note;
    Value h;
  };
  std::vector<CellOut> outs(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Region& cell = grid[i];
    CellOut& o = outs[i];
    const MeasureValue mv = measure_eval(*p.mu, cell);
    if (mv.cls == MeasureClass::Zero) {
      o.skipped = true;
      o.note = "cell " + cell.str() + " has measure 0 under '" + p.mu->id() + "'; skipped";
      return;
    }
    if (mv.cls == MeasureClass::Infinite)
      fail(Err::NotIntegrable,
           "cell " + cell.str() + " has infinite measure under '" + p.mu->id() + "'");
    const Chain single = p.complex->make(n, {{"e", cell}});
    const MeasurePtr pm = disintegrate(*dis, single, p.mu);
    const Chain b = chain_reduce(p.complex->boundary(single));
    const IAReport rhs = integrate_chain(b, p.f, pm, p.calc, tol, cap);
    if (rhs.verdict != Verdict::Defined)
      fail(Err::Schema, "cell " + cell.str() + ": the boundary integral is " +
                            verdict_name(rhs.verdict) + ": " + rhs.witness);
    o.h = inv(mv.v, rhs.value);
  });

  SolveReport rep{DerivativeCandidate{p.f}, {}, {}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (outs[i].skipped)
      rep.skipped.push_back(std::move(outs[i].note));
    else
      rep.table.push_back({grid[i], std::move(outs[i].h)});
  }
  if (rep.table.empty())
    fail(Err::ZeroMeasureCell,
         "every grid cell has measure 0 under '" + p.mu->id() + "'; nothing to solve");
  rep.candidate = DerivativeCandidate{piecewise_constant(rep.table, p.calc->y)};

  // self-consistency: every solved cell, then 50 seeded unions of 2..4 cells
  // as the held-out part
  std::vector<ProbeChain> probes;
  probes.reserve(rep.table.size() + 50);
  for (const SolvedCell& sc : rep.table)
    probes.push_back({p.complex->make(n, {{"e", sc.cell}}), p.mu});
  if (rep.table.size() >= 2) {
    std::mt19937_64 rng(seed);
    for (int u = 0; u < 50; ++u) {
      const std::size_t k = 2 + rng() % std::min<std::size_t>(3, rep.table.size() - 1);
      std::set<std::size_t> pick;
      while (pick.size() < k) pick.insert(rng() % rep.table.size());
      std::vector<ChainTerm> terms;
      for (std::size_t idx : pick) terms.push_back({"e", rep.table[idx].cell});
      probes.push_back({p.complex->make(n, std::move(terms)), p.mu});
    }
  }
  DerivativeProblem held = p;
  held.probes = std::move(probes);
  rep.verify = verify_derivative(held, rep.candidate, tol, cap);
  return rep;
}

std::vector<Region> solve_grid(const ComplexPtr& cx, int level, const Region& S, int depth) {
  if (!cx) fail(Err::Schema, "solve_grid needs a complex");
  if (level < 0 || level > cx->top())
    fail(Err::LevelMismatch, "complex '" + cx->id() + "' has levels 0.." +
                                 std::to_string(cx->top()) + ", not " + std::to_string(level));
  if (S.empty()) fail(Err::Schema, "cannot grid an empty region");
  if (depth < 0 || depth > 20) fail(Err::Schema, "grid depth must lie in 0..20");
  const SpacePtr& sp = cx->level(level).coll.space;
  if (!region_in_space(S, *sp))
    fail(Err::MixedSpaces,
         "S = " + S.str() + " does not live in the level-" + std::to_string(level) + " space");

  std::vector<Region> out;
  auto push = [&](Cell c) { out.push_back(Region(sp, {std::move(c)})); };
  for (const Cell& c : S.cells()) {
    if (const auto* ic = std::get_if<IntervalCell>(&c)) {
      if (!ic->iv.lo.finite() || !ic->iv.hi.finite())
        fail(Err::Schema, "cannot grid the unbounded cell " + cell_str(c));
      if (ic->iv.degenerate()) {
        push(c);
        continue;
      }
      const long long parts = 1LL << depth;
      const Rat lo = ic->iv.lo.r, w = (ic->iv.hi.r - lo) / parts;
      for (long long k = 0; k < parts; ++k)
        push(IntervalCell{iv(lo + w * k, lo + w * (k + 1))});
    } else if (const auto* rc = std::get_if<RectCell>(&c)) {
      const long long nx = 1LL << ((depth + 1) / 2), ny = 1LL << (depth / 2);
      const Rat xlo = rc->x.lo.r, wx = (rc->x.hi.r - xlo) / nx;
      const Rat ylo = rc->y.lo.r, wy = (rc->y.hi.r - ylo) / ny;
      for (long long j = 0; j < ny; ++j)
        for (long long i = 0; i < nx; ++i)
          push(RectCell{iv(xlo + wx * i, xlo + wx * (i + 1)),
                        iv(ylo + wy * j, ylo + wy * (j + 1))});
    } else if (const auto* ec = std::get_if<EdgeCell>(&c)) {
      const long long parts = 1LL << depth;
      const Rat lo = ec->span.lo.r, w = (ec->span.hi.r - lo) / parts;
      for (long long k = 0; k < parts; ++k)
        push(EdgeCell{ec->vertical, ec->offset, iv(lo + w * k, lo + w * (k + 1))});
    } else {
      push(c);  // points and graph edges are indivisible
    }
  }
  return out;
}

namespace {

// Pairwise merge of consecutive cells whose union is again a single cell;
// anything unmergeable passes through, so discrete grids are fixed points.
std::vector<Region> coarsen(const std::vector<Region>& grid) {
  std::vector<Region> out;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (i + 1 < grid.size()) {
      Region u = region_union(grid[i], grid[i + 1]);
      if (u.cells().size() == 1) {
        out.push_back(std::move(u));
        i += 2;
        continue;
      }
    }
    out.push_back(grid[i]);
    ++i;
  }
  return out;
}

}  // namespace

IterateReport iterate_derivative(const DerivativeProblem& p, int order,
                                 const std::vector<Region>& grid, const Inverter& inverter,
                                 double tol, int cap, std::uint64_t seed) {
  validate_problem(p);
  if (order < 1) fail(Err::Schema, "iteration needs order >= 1");
  if (p.probes.empty())
    fail(Err::Schema,
         "iteration needs probe chains; the grid audit is consistent by construction and cannot "
         "catch a failing stage");
  IterateReport rep;
  DerivativeProblem stage = p;
  std::vector<Region> g = grid;
  for (int k = 1; k <= order; ++k) {
    SolveReport sr = solve_derivative(stage, g, inverter, tol, cap, seed + std::uint64_t(k));
    VerifyReport vr = verify_derivative(stage, sr.candidate, tol, cap);
    const bool ok = sr.verify.pass && vr.pass;
    rep.stages.push_back({k, std::move(sr), std::move(vr)});
    if (!ok) break;
    rep.achieved = k;
    rep.candidate = rep.stages.back().solve.candidate;
    stage.f = rep.candidate->h;
    g = coarsen(g);
  }
  return rep;
}

}  // namespace mcalc
