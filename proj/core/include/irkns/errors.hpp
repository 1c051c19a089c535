#pragma once

#include <stdexcept>
#include <string>

namespace irkns {

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedStageCount : Error { using Error::Error; };
struct SingularTableau : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct OddCellCount : Error { using Error::Error; };
struct MissingBoundaryValue : Error { using Error::Error; };
struct SingularPivot : Error { using Error::Error; };
struct DiagonalBreakdown : Error { using Error::Error; };
struct NotSolenoidal : Error { using Error::Error; };
struct NewtonDiverged : Error { using Error::Error; };
struct FullMpTooLarge : Error { using Error::Error; };
struct SingularInner : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace irkns
