#pragma once

#include <memory>
#include <string>
#include <variant>

namespace mcalc {

// An element of a free magma: the formal identity, a named atom, or an
// ordered pair of subterms. Terms are immutable and share structure.
// The only canonicalization applied is identity absorption: node(0, t)
// and node(t, 0) collapse to t at construction time. Nothing else is
// rewritten, so node(a, b) and node(b, a) stay distinct, as do the two
// associations of a three-term sum.
class FreeTerm {
 public:
  FreeTerm() = default;  // the identity term

  static FreeTerm identity() { return FreeTerm(); }
  static FreeTerm atom(const std::string& name);
  static FreeTerm node(const FreeTerm& l, const FreeTerm& r);

  bool is_identity() const { return n_ == nullptr; }
  bool is_atom() const;
  bool is_node() const;

  const std::string& atom_name() const;  // valid only for atoms
  FreeTerm left() const;                 // valid only for nodes
  FreeTerm right() const;

  bool operator==(const FreeTerm& o) const { return equal(*this, o); }
  bool operator!=(const FreeTerm& o) const { return !equal(*this, o); }

  // Parenthesized rendering, e.g. "((a b) c)"; identity renders as "0".
  std::string str() const;

  // Number of atom leaves (identity counts 0).
  int size() const;

  static bool equal(const FreeTerm& a, const FreeTerm& b);

 private:
  struct Rep;
  std::shared_ptr<const Rep> n_;
};

// Carrier element of any registered magma: numeric magmas use double
// (IEEE +/-inf represent the designated extension points), free magmas
// use FreeTerm.
using Value = std::variant<double, FreeTerm>;

inline bool is_num(const Value& v) { return std::holds_alternative<double>(v); }
inline double num(const Value& v) { return std::get<double>(v); }
inline const FreeTerm& term(const Value& v) { return std::get<FreeTerm>(v); }

// Structural equality; numeric comparison at `tol` (infinities must match
// exactly).
bool value_equal(const Value& a, const Value& b, double tol = 1e-12);

std::string value_str(const Value& v);

}  // namespace mcalc
