#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace a3dmm {

enum class Errc {
  DimensionMismatch,
  InvalidArgument,
  OverlappingGroups,
  SvdFailure,
  EmptyBox,
  RankDeficient,
  NotSymmetric,
  SubproblemFailure,
  BadRelaxation,
  Divergence,
  InsufficientHistory,
  EigenFailure,
  NearSingular,
  DegenerateConstraint,
  DivergentSeries,
  InsufficientData,
  NotOrthonormal,
  DegenerateIntersection,
  BadShape,
  BadImage,
  ParseError,
  FormatError,
  ConfigError,
  EmptySelection,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace a3dmm
