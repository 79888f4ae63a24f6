#pragma once

#include <stdexcept>
#include <string>

namespace mcalc {

// Failure classes that callers are expected to branch on. Everything else
// (bad arguments, internal invariant breaks) comes out as Err::Schema.
enum class Err {
  UndefinedPair,      // partial extended operation hit an undefined pair
  MixedSpaces,        // operands live in different spaces
  LevelMismatch,      // chain/complex level disagreement
  NotIntegrable,      // a simple-function term has non-finite measure
  WrongSpaceKind,     // policy or measure applied to an unsupported space
  WrongCodomain,      // policy applied to an unsupported value magma
  UnknownKey,         // registry lookup miss
  Schema,             // malformed input (problem file, literal, argument)
  CoverageGap,        // form representation does not cover the chain
  NotDecomposable,    // measure outside the disintegration's domain class
  InverterUnavailable,// no registered inverter for the calculus
  EmptyCarrier,       // subspace restriction produced an empty cell family
  ZeroMeasureCell,    // derivative solve hit a cell of measure zero
  SameDomainRequired, // equivalence asked of chains with different base sets
  NotExteriorDifferentiable,  // a boundary evaluation failed the probe
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& what);
  Err kind() const { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] void fail(Err kind, const std::string& what);

}  // namespace mcalc
