#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mcalc/integrate.hpp"

namespace mcalc {

// A named way of integrating: the function, measure, and output magmas, the
// pairing between them, the orientations the measure codomain supports, and
// the IA policy family used by default on each kind of region.
struct CalculusChoice {
  std::string id;
  MagmaPtr y;
  MagmaPtr m;
  MagmaPtr g_out;
  IntegrationElement elem;
  std::vector<std::string> orientations;  // ids valid on the measure codomain
  std::function<std::vector<IAPolicy>(Space::Kind, std::uint64_t)> default_policies;
};

using CalculusPtr = std::shared_ptr<const CalculusChoice>;

// Registry. Keys:
//   riemann                   g(a,m) = a*m over the extended reals
//   product                   g(a,m) = a^m, positive functions, multiplicative output
//   free:<alphabet>           formal pairing, function argument expands first
//   free:<alphabet>:mfirst    formal pairing, measure argument expands first
// The element laws are verified the first time a key is built; a violation
// throws Err::Schema. Unknown keys throw Err::UnknownKey.
CalculusPtr calculus(const std::string& key);

}  // namespace mcalc
