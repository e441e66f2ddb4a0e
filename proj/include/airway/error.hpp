#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace airway {

enum class Errc {
  // I/O and file format
  IoFailure,
  MissingHeaderKey,
  UnsupportedElementType,
  SizeMismatch,
  ParseError,
  // argument / contract validation
  InvalidArgument,
  IndexOutOfBounds,
  RoleMismatch,
  ShapeMismatch,
  NonSquarePlane,
  NonFiniteInput,
  InvalidProbability,
  NonPositiveDilation,
  OutOfBounds,
  // domain conditions
  EmptyMask,
  EmptyGraph,
  EmptyTable,
  EmptySkeleton,
  EmptyStack,
  EmptyList,
  NoBranches,
  CyclicSkeleton,
  DoesNotFit,
  UnknownBranch,
  PredictorFailure,
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

}  // namespace airway
