#pragma once

#include <functional>
#include <map>

#include "mcalc/magma.hpp"
#include "mcalc/region.hpp"

namespace mcalc {

// μ(A) = 0 / μ(A) in the carrier / μ(A) an extension point. Zero wins over
// Finite when both apply.
enum class MeasureClass { Zero, Finite, Infinite };
const char* measure_class_name(MeasureClass c);

struct MeasureValue {
  Value v;
  MeasureClass cls = MeasureClass::Zero;
  // Set when an oriented measure met an infinite value: the orientation map
  // only acts on the carrier, so the raw value passes through unoriented.
  bool oriented_deferred = false;
};

class Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

// A region-to-value assignment into an extended magma. Totality on the
// region algebra and μ(∅) = identity are enforced centrally; additivity is a
// declared flag (checked at registration to need a commutative codomain, and
// exercised by property tests, not by construction).
class Measure {
 public:
  struct Raw {
    Value v;
    bool deferred = false;
  };
  using AssignFn = std::function<Raw(const Region&)>;

  const std::string& id() const { return id_; }
  const MagmaPtr& codomain() const { return codomain_; }
  const SpacePtr& space() const { return space_; }
  bool additive() const { return additive_; }
  // >0 when μ(cell) = scale * cell_content on continuum cells; lets the
  // disintegration layer recognize length/area-class measures.
  double lebesgue_scale() const { return lebesgue_scale_; }
  Raw raw_assign(const Region& A) const { return assign_(A); }

  static MeasurePtr lebesgue(SpacePtr space, double scale = 1.0);
  static MeasurePtr counting(SpacePtr space, double weight = 1.0);
  static MeasurePtr dirac(SpacePtr space, const Rat& x);
  static MeasurePtr dirac(SpacePtr space, const Rat& x, const Rat& y);
  static MeasurePtr dirac_vertex(SpacePtr space, int id);
  static MeasurePtr zero(SpacePtr space, MagmaPtr codomain);
  // Direct region -> value table keyed by canonical Region::str(); regions
  // not listed get the identity. The table route is how non-additive
  // measures enter the system.
  static MeasurePtr table(SpacePtr space, MagmaPtr codomain,
                          std::map<std::string, Value> entries, bool additive = false);
  static MeasurePtr custom(std::string id, SpacePtr space, MagmaPtr codomain, bool additive,
                           AssignFn assign, double lebesgue_scale = 0.0);

 private:
  Measure() = default;
  std::string id_;
  MagmaPtr codomain_;
  SpacePtr space_;
  bool additive_ = false;
  double lebesgue_scale_ = 0.0;
  AssignFn assign_;
};

MeasureValue measure_eval(const Measure& mu, const Region& A);

// Pointwise sum. Raises UndefinedPair when both operands are infinite on a
// region: the extension operation is not guaranteed on pairs of extension
// points, so the sum of two infinite values is outside the contract even
// when the concrete magma would absorb it.
MeasurePtr measure_add(const MeasurePtr& a, const MeasurePtr& b);

// ι ∘ μ. Orientation maps act on the carrier; infinite values pass through
// with MeasureValue::oriented_deferred set.
MeasurePtr oriented_measure(const OrientationMap& iota, const MeasurePtr& mu);

// Same assignment viewed on a restricted space.
MeasurePtr restrict_measure(const MeasurePtr& mu, SpacePtr subspace);

// "lebesgue" | "counting" | "dirac:<x>" | "dirac:(<x>,<y>)" | "dirac:v<id>".
// Table measures need file contents and are assembled by the caller.
MeasurePtr measure_by_key(const std::string& key, SpacePtr space);

}  // namespace mcalc
