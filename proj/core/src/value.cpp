#include "mcalc/value.hpp"

#include <cmath>
#include <cstdio>

#include "mcalc/errors.hpp"

namespace mcalc {

struct FreeTerm::Rep {
  std::string label;  // atom name; empty for interior nodes
  std::shared_ptr<const Rep> l, r;

  static bool equal(const Rep* a, const Rep* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->label != b->label) return false;
    return equal(a->l.get(), b->l.get()) && equal(a->r.get(), b->r.get());
  }

  static void render(const Rep* n, std::string& out) {
    if (!n) {
      out += '0';
      return;
    }
    if (!n->l) {
      out += n->label;
      return;
    }
    out += '(';
    render(n->l.get(), out);
    out += ' ';
    render(n->r.get(), out);
    out += ')';
  }

  static int leaves(const Rep* n) {
    if (!n) return 0;
    if (!n->l) return 1;
    return leaves(n->l.get()) + leaves(n->r.get());
  }
};

FreeTerm FreeTerm::atom(const std::string& name) {
  if (name.empty()) fail(Err::Schema, "free atom needs a nonempty name");
  FreeTerm t;
  t.n_ = std::make_shared<Rep>(Rep{name, nullptr, nullptr});
  return t;
}

FreeTerm FreeTerm::node(const FreeTerm& l, const FreeTerm& r) {
  // Identity absorption is the whole canonical form.
  if (l.is_identity()) return r;
  if (r.is_identity()) return l;
  FreeTerm t;
  t.n_ = std::make_shared<Rep>(Rep{{}, l.n_, r.n_});
  return t;
}

bool FreeTerm::is_atom() const { return n_ && !n_->l; }
bool FreeTerm::is_node() const { return n_ && n_->l != nullptr; }

const std::string& FreeTerm::atom_name() const {
  if (!is_atom()) fail(Err::Schema, "atom_name on a non-atom term");
  return n_->label;
}

FreeTerm FreeTerm::left() const {
  if (!is_node()) fail(Err::Schema, "left on a non-node term");
  FreeTerm t;
  t.n_ = n_->l;
  return t;
}

FreeTerm FreeTerm::right() const {
  if (!is_node()) fail(Err::Schema, "right on a non-node term");
  FreeTerm t;
  t.n_ = n_->r;
  return t;
}

bool FreeTerm::equal(const FreeTerm& a, const FreeTerm& b) {
  return Rep::equal(a.n_.get(), b.n_.get());
}

std::string FreeTerm::str() const {
  std::string out;
  Rep::render(n_.get(), out);
  return out;
}

int FreeTerm::size() const { return Rep::leaves(n_.get()); }

bool value_equal(const Value& a, const Value& b, double tol) {
  if (a.index() != b.index()) return false;
  if (is_num(a)) {
    double x = num(a), y = num(b);
    if (std::isinf(x) || std::isinf(y)) return x == y;
    if (std::isnan(x) || std::isnan(y)) return false;
    return std::fabs(x - y) <= tol;
  }
  return term(a) == term(b);
}

std::string value_str(const Value& v) {
  if (!is_num(v)) return term(v).str();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", num(v));
  return buf;
}

}  // namespace mcalc
