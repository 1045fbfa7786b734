#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace circorb {

enum class Errc {
  OverlappingPieces,
  GapInDomain,
  NonMonotonePiece,
  OutOfDomain,
  InverseOfEndomorphism,
  NotInImage,
  NonAffineInput,
  PrecisionCollapse,
  OutOfUnitInterval,
  NotALeftEndpoint,
  InvalidQuadruple,
  PinOrderMismatch,
  TerminalEdgeInput,
  PNotInvariant,
  NeitherConditionVerified,
  BudgetExhausted,
  BaseInP,
  LadderPointCoincidesWithX,
  XOnReferenceOrbit,
  UnknownName,
  BadParams,
  ParseError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace circorb
