#include "a3dmm/error.hpp"

namespace a3dmm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OverlappingGroups: return "OverlappingGroups";
    case Errc::SvdFailure: return "SvdFailure";
    case Errc::EmptyBox: return "EmptyBox";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::SubproblemFailure: return "SubproblemFailure";
    case Errc::BadRelaxation: return "BadRelaxation";
    case Errc::Divergence: return "Divergence";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::EigenFailure: return "EigenFailure";
    case Errc::NearSingular: return "NearSingular";
    case Errc::DegenerateConstraint: return "DegenerateConstraint";
    case Errc::DivergentSeries: return "DivergentSeries";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::NotOrthonormal: return "NotOrthonormal";
    case Errc::DegenerateIntersection: return "DegenerateIntersection";
    case Errc::BadShape: return "BadShape";
    case Errc::BadImage: return "BadImage";
    case Errc::ParseError: return "ParseError";
    case Errc::FormatError: return "FormatError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace a3dmm
