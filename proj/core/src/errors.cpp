#include "mcalc/errors.hpp"

namespace mcalc {

const char* err_name(Err e) {
  switch (e) {
    case Err::UndefinedPair: return "undefined-pair";
    case Err::MixedSpaces: return "mixed-spaces";
    case Err::LevelMismatch: return "level-mismatch";
    case Err::NotIntegrable: return "not-integrable";
    case Err::WrongSpaceKind: return "wrong-space-kind";
    case Err::WrongCodomain: return "wrong-codomain";
    case Err::UnknownKey: return "unknown-key";
    case Err::Schema: return "schema";
    case Err::CoverageGap: return "coverage-gap";
    case Err::NotDecomposable: return "not-decomposable";
    case Err::InverterUnavailable: return "inverter-unavailable";
    case Err::EmptyCarrier: return "empty-carrier";
    case Err::ZeroMeasureCell: return "zero-measure-cell";
    case Err::SameDomainRequired: return "same-domain-required";
    case Err::NotExteriorDifferentiable: return "not-exterior-differentiable";
  }
  return "unknown";
}

Error::Error(Err kind, const std::string& what)
    : std::runtime_error(std::string(err_name(kind)) + ": " + what), kind_(kind) {}

void fail(Err kind, const std::string& what) { throw Error(kind, what); }

}  // namespace mcalc
