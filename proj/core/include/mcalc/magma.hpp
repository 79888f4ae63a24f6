#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcalc/errors.hpp"
#include "mcalc/value.hpp"

namespace mcalc {

class Magma;
using MagmaPtr = std::shared_ptr<const Magma>;

// A unital magma together with its compactification data: the finite
// carrier, a list of designated extension points, a binary operation that
// is total on carrier x extended and extended x carrier but may be partial
// on pairs of extension points, and a bounded metric chart used for all
// convergence decisions.
class Magma {
 public:
  struct Spec {
    std::string id;
    Value identity;
    bool commutative = false;
    bool associative = false;
    std::function<bool(const Value&)> contains;  // finite carrier only
    std::vector<Value> extension_points;
    // Called only on pairs where op_defined holds.
    std::function<Value(const Value&, const Value&)> op;
    // Defaults to "no pair of two extension points" when empty.
    std::function<bool(const Value&, const Value&)> op_defined;
    std::function<double(const Value&, const Value&)> chart_distance;
    // Ids of orientation maps this magma supports ("e" is implied).
    std::vector<std::string> orientation_ids;
  };

  explicit Magma(Spec s);

  const std::string& id() const { return s_.id; }
  const Value& identity() const { return s_.identity; }
  bool commutative() const { return s_.commutative; }
  bool associative() const { return s_.associative; }

  bool contains(const Value& v) const { return s_.contains(v); }
  bool is_extension_point(const Value& v) const;
  bool in_extended(const Value& v) const;
  const std::vector<Value>& extension_points() const { return s_.extension_points; }

  bool op_defined(const Value& a, const Value& b) const;
  // Throws Err::UndefinedPair when op_defined(a, b) is false.
  Value op(const Value& a, const Value& b) const;

  double chart_distance(const Value& a, const Value& b) const;

  const std::vector<std::string>& orientation_ids() const { return s_.orientation_ids; }

 private:
  Spec s_;
};

// Registry keys: "real_add", "pos_mul", "ext_real_add", "ext_nonneg_add",
// "ext_nonneg_mul", "free:<alphabet>" (one atom per character).
// Instances are cached; repeated lookups return the same object.
MagmaPtr magma(const std::string& key);

// Left-to-right fold of an ordered term list; empty list gives the identity.
Value fold_ordered(const Magma& m, const std::vector<Value>& terms);

// A continuous map M -> M used to reorient measures. "e" is the identity
// orientation (the unique one fixing every element); "neg" is additive
// negation where the carrier supports it.
struct OrientationMap {
  std::string id;
  std::function<Value(const Value&)> apply;
};

// Lookup against a magma's supported family. Throws Err::UnknownKey for
// unsupported ids.
OrientationMap orientation(const Magma& m, const std::string& id);

// Symbolic composition within the {e, neg} family: neg.neg = e.
std::string compose_orientations(const std::string& outer, const std::string& inner);

// Numeric limit detection in the metric chart.
//
// The sequence is probed at k = 1..cap. Outcomes:
//  - ConvergedToInfinity(p): the last `window` terms all sit within
//    kExtensionBand * tol of the extension point p.
//  - Converged(v): the last `window` terms are pairwise within tol, the
//    final term lies in the carrier, and the window is not drifting toward
//    an extension point. Drift means: the window moves monotonically toward
//    the point, and extrapolating its step decay geometrically leaves enough
//    remaining travel (>= kDriftTailRatio of the distance) to plausibly
//    reach it. The guard is what keeps slowly escaping sequences like
//    k = 1, 2, 3, ... from being misread as finite limits, while sequences
//    with geometrically decaying steps still register as finite.
//  - NoLimitAtCap: neither fired by k = cap. `drift_target` is set when the
//    final window was drifting in the above sense, which is how divergence
//    to an infinity gets reported.
//
// window must be at least 3 (the drift extrapolation needs two step lengths).
struct LimitOutcome {
  enum class Kind { Converged, ConvergedToInfinity, NoLimitAtCap };
  Kind kind = Kind::NoLimitAtCap;
  Value value = 0.0;  // limit, extension point, or last term respectively
  int steps = 0;
  std::optional<Value> drift_target;

  bool converged() const { return kind != Kind::NoLimitAtCap; }
};

inline constexpr double kExtensionBand = 3.0;
inline constexpr double kDriftTailRatio = 0.25;

LimitOutcome limit(const Magma& m, const std::function<Value(int)>& seq,
                   double tol, int window, int cap);

}  // namespace mcalc
