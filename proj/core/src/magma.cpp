#include "mcalc/magma.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace mcalc {

namespace {

constexpr double kPi2 = 1.5707963267948966;

double chart_coord(double x) {
  if (std::isinf(x)) return x > 0 ? kPi2 : -kPi2;
  return std::atan(x);
}

double atan_chart(const Value& a, const Value& b) {
  return std::fabs(chart_coord(num(a)) - chart_coord(num(b)));
}

// Multiplicative chart: log first, so 0 and +inf are the two chart ends.
double log_chart(const Value& a, const Value& b) {
  auto coord = [](double x) {
    if (x == 0.0) return -kPi2;
    if (std::isinf(x)) return kPi2;
    return std::atan(std::log(x));
  };
  return std::fabs(coord(num(a)) - coord(num(b)));
}

bool finite_num(const Value& v) { return is_num(v) && std::isfinite(num(v)); }

bool default_op_defined(const Magma& m, const Value& a, const Value& b) {
  return !(m.is_extension_point(a) && m.is_extension_point(b));
}

bool atoms_in_alphabet(const FreeTerm& t, const std::string& alphabet) {
  if (t.is_identity()) return true;
  if (t.is_atom()) {
    const std::string& n = t.atom_name();
    return n.size() == 1 && alphabet.find(n[0]) != std::string::npos;
  }
  return atoms_in_alphabet(t.left(), alphabet) &&
         atoms_in_alphabet(t.right(), alphabet);
}

MagmaPtr make_real_add() {
  Magma::Spec s;
  s.id = "real_add";
  s.identity = 0.0;
  s.commutative = s.associative = true;
  s.contains = finite_num;
  s.op = [](const Value& a, const Value& b) -> Value { return num(a) + num(b); };
  s.chart_distance = atan_chart;
  s.orientation_ids = {"e", "neg"};
  return std::make_shared<Magma>(std::move(s));
}

MagmaPtr make_pos_mul() {
  Magma::Spec s;
  s.id = "pos_mul";
  s.identity = 1.0;
  s.commutative = s.associative = true;
  s.contains = [](const Value& v) { return finite_num(v) && num(v) > 0.0; };
  s.op = [](const Value& a, const Value& b) -> Value { return num(a) * num(b); };
  s.chart_distance = log_chart;
  s.orientation_ids = {"e", "neg"};  // neg = reciprocal, the group inverse
  return std::make_shared<Magma>(std::move(s));
}

// Extension arithmetic: an infinity absorbs any carrier element, and
// same-signed infinities combine; opposite infinities are the undefined pair.
Value absorbing_add(const Value& a, const Value& b) {
  double x = num(a), y = num(b);
  if (std::isinf(x)) return x;
  if (std::isinf(y)) return y;
  return x + y;
}

MagmaPtr make_ext_real_add() {
  Magma::Spec s;
  s.id = "ext_real_add";
  s.identity = 0.0;
  s.commutative = s.associative = true;
  s.contains = finite_num;
  s.extension_points = {Value(HUGE_VAL), Value(-HUGE_VAL)};
  s.op = absorbing_add;
  s.op_defined = [](const Value& a, const Value& b) {
    double x = num(a), y = num(b);
    return !(std::isinf(x) && std::isinf(y) && (x > 0) != (y > 0));
  };
  s.chart_distance = atan_chart;
  s.orientation_ids = {"e", "neg"};
  return std::make_shared<Magma>(std::move(s));
}

MagmaPtr make_ext_nonneg_add() {
  Magma::Spec s;
  s.id = "ext_nonneg_add";
  s.identity = 0.0;
  s.commutative = s.associative = true;
  s.contains = [](const Value& v) { return finite_num(v) && num(v) >= 0.0; };
  s.extension_points = {Value(HUGE_VAL)};
  s.op = absorbing_add;
  s.op_defined = [](const Value&, const Value&) { return true; };
  s.chart_distance = atan_chart;
  s.orientation_ids = {"e"};  // no inverses: not a group
  return std::make_shared<Magma>(std::move(s));
}

MagmaPtr make_ext_nonneg_mul() {
  Magma::Spec s;
  s.id = "ext_nonneg_mul";
  s.identity = 1.0;
  s.commutative = s.associative = true;
  s.contains = [](const Value& v) { return finite_num(v) && num(v) >= 0.0; };
  s.extension_points = {Value(HUGE_VAL)};
  s.op = [](const Value& a, const Value& b) -> Value {
    double x = num(a), y = num(b);
    if (std::isinf(x) || std::isinf(y)) return HUGE_VAL;
    return x * y;
  };
  s.op_defined = [](const Value& a, const Value& b) {
    // inf * 0 stays undefined; inf * m for m > 0 is inf.
    double x = num(a), y = num(b);
    return !((std::isinf(x) && y == 0.0) || (std::isinf(y) && x == 0.0));
  };
  s.chart_distance = log_chart;
  s.orientation_ids = {"e"};  // 0 has no inverse
  return std::make_shared<Magma>(std::move(s));
}

MagmaPtr make_free(const std::string& key, const std::string& alphabet) {
  if (alphabet.empty()) fail(Err::Schema, "free magma needs a nonempty alphabet");
  Magma::Spec s;
  s.id = key;
  s.identity = FreeTerm::identity();
  s.commutative = s.associative = false;
  s.contains = [alphabet](const Value& v) {
    return !is_num(v) && atoms_in_alphabet(term(v), alphabet);
  };
  s.op = [](const Value& a, const Value& b) -> Value {
    return FreeTerm::node(term(a), term(b));
  };
  s.chart_distance = [](const Value& a, const Value& b) {
    return term(a) == term(b) ? 0.0 : 1.0;
  };
  s.orientation_ids = {"e"};
  return std::make_shared<Magma>(std::move(s));
}

}  // namespace

Magma::Magma(Spec s) : s_(std::move(s)) {
  if (!s_.contains || !s_.op || !s_.chart_distance)
    fail(Err::Schema, "magma spec is missing required functions");
  if (s_.orientation_ids.empty()) s_.orientation_ids = {"e"};
}

bool Magma::is_extension_point(const Value& v) const {
  for (const auto& p : s_.extension_points)
    if (value_equal(p, v, 0.0)) return true;
  return false;
}

bool Magma::in_extended(const Value& v) const {
  return contains(v) || is_extension_point(v);
}

bool Magma::op_defined(const Value& a, const Value& b) const {
  if (!in_extended(a) || !in_extended(b)) return false;
  if (s_.op_defined) return s_.op_defined(a, b);
  return default_op_defined(*this, a, b);
}

Value Magma::op(const Value& a, const Value& b) const {
  if (!op_defined(a, b))
    fail(Err::UndefinedPair,
         id() + " cannot combine " + value_str(a) + " and " + value_str(b));
  return s_.op(a, b);
}

double Magma::chart_distance(const Value& a, const Value& b) const {
  if (a.index() != b.index())
    fail(Err::Schema, "chart distance across value kinds");
  return s_.chart_distance(a, b);
}

MagmaPtr magma(const std::string& key) {
  static std::mutex mu;
  static std::map<std::string, MagmaPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  MagmaPtr m;
  if (key == "real_add") m = make_real_add();
  else if (key == "pos_mul") m = make_pos_mul();
  else if (key == "ext_real_add") m = make_ext_real_add();
  else if (key == "ext_nonneg_add") m = make_ext_nonneg_add();
  else if (key == "ext_nonneg_mul") m = make_ext_nonneg_mul();
  else if (key.rfind("free:", 0) == 0) m = make_free(key, key.substr(5));
  else fail(Err::UnknownKey, "no magma registered as '" + key + "'");
  cache.emplace(key, m);
  return m;
}

Value fold_ordered(const Magma& m, const std::vector<Value>& terms) {
  Value acc = m.identity();
  for (const Value& v : terms) acc = m.op(acc, v);
  return acc;
}

OrientationMap orientation(const Magma& m, const std::string& id) {
  const auto& ids = m.orientation_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    fail(Err::UnknownKey, m.id() + " has no orientation '" + id + "'");
  if (id == "e") return {"e", [](const Value& v) { return v; }};
  if (id == "neg") {
    if (m.id() == "pos_mul")
      return {"neg", [](const Value& v) -> Value { return 1.0 / num(v); }};
    return {"neg", [](const Value& v) -> Value { return -num(v); }};
  }
  fail(Err::UnknownKey, "unsupported orientation '" + id + "'");
}

std::string compose_orientations(const std::string& outer, const std::string& inner) {
  if (outer == "e") return inner;
  if (inner == "e") return outer;
  if (outer == "neg" && inner == "neg") return "e";
  fail(Err::Schema, "cannot compose orientations '" + outer + "' * '" + inner + "'");
}

namespace {

// True when the window walks monotonically toward p and a geometric
// extrapolation of its step decay says the remaining travel is a
// non-negligible fraction of the distance still to cover. Sequences whose
// steps decay polynomially (like k = 1, 2, 3, ... under the atan chart)
// have r ~ 1 and keep drifting; geometric refiners have r ~ 1/2 and a tail
// on the order of one step, which rules the extension point out.
bool drifting_toward(const Magma& m, const std::vector<Value>& win, const Value& p) {
  std::vector<double> steps;
  for (size_t i = 0; i + 1 < win.size(); ++i) {
    double d0 = m.chart_distance(win[i], p);
    double d1 = m.chart_distance(win[i + 1], p);
    if (d1 >= d0) return false;
    steps.push_back(m.chart_distance(win[i], win[i + 1]));
  }
  double first = steps.front(), last = steps.back();
  if (last <= 0.0 || first <= 0.0) return false;
  double r = std::pow(last / first, 1.0 / (double)(steps.size() - 1));
  double remaining = m.chart_distance(win.back(), p);
  if (r >= 1.0) return true;  // not slowing down: infinite extrapolated tail
  double tail = last * r / (1.0 - r);
  return tail >= kDriftTailRatio * remaining;
}

}  // namespace

LimitOutcome limit(const Magma& m, const std::function<Value(int)>& seq,
                   double tol, int window, int cap) {
  if (window < 3 || cap < window)
    fail(Err::Schema, "limit needs window >= 3 and cap >= window");

  std::vector<Value> win;
  win.reserve(window);
  LimitOutcome out;
  for (int k = 1; k <= cap; ++k) {
    Value v = seq(k);
    if (!m.in_extended(v))
      fail(Err::Schema, "sequence left the extended carrier of " + m.id());
    if ((int)win.size() == window) win.erase(win.begin());
    win.push_back(v);
    out.steps = k;
    if ((int)win.size() < window) continue;

    // Extension points win ties: a window parked next to one is read as a
    // limit in the compactification, not as a finite limit.
    for (const Value& p : m.extension_points()) {
      bool near = true;
      for (const Value& w : win)
        if (m.chart_distance(w, p) > kExtensionBand * tol) { near = false; break; }
      if (near) {
        out.kind = LimitOutcome::Kind::ConvergedToInfinity;
        out.value = p;
        return out;
      }
    }

    double worst = 0.0;
    for (size_t i = 0; i < win.size(); ++i)
      for (size_t j = i + 1; j < win.size(); ++j)
        worst = std::max(worst, m.chart_distance(win[i], win[j]));
    if (worst <= tol && m.contains(win.back())) {
      bool drifting = false;
      for (const Value& p : m.extension_points())
        if (drifting_toward(m, win, p)) { drifting = true; break; }
      if (!drifting) {
        out.kind = LimitOutcome::Kind::Converged;
        out.value = win.back();
        return out;
      }
    }
  }

  out.kind = LimitOutcome::Kind::NoLimitAtCap;
  out.value = win.empty() ? m.identity() : win.back();
  for (const Value& p : m.extension_points()) {
    if ((int)win.size() == window && drifting_toward(m, win, p)) {
      out.drift_target = p;
      break;
    }
  }
  return out;
}

}  // namespace mcalc
