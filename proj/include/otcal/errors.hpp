#pragma once

#include <stdexcept>
#include <string>

namespace otcal {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation requested at a point where the cost is not smooth.
struct CutLocusError : Error {
  using Error::Error;
};

// |det D-Dbar c| below tolerance, or an eigenvalue too close to zero.
struct DegenerateError : Error {
  using Error::Error;
};

struct DegenerateStepError : Error {
  using Error::Error;
};

struct NotSpacelikeError : Error {
  using Error::Error;
};

struct ZeroOrientationError : Error {
  using Error::Error;
};

struct NonpositiveDensityError : Error {
  using Error::Error;
};

struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

struct FlatCdfError : Error {
  using Error::Error;
};

struct SizeMismatchError : Error {
  using Error::Error;
};

struct NoRootError : Error {
  using Error::Error;
};

struct NotDifferentiableError : Error {
  using Error::Error;
};

struct OrientationFlipError : Error {
  using Error::Error;
};

struct NotMonotoneError : Error {
  using Error::Error;
};

struct BadSignatureError : Error {
  using Error::Error;
};

struct TimelikeSimplexError : Error {
  using Error::Error;
};

struct MeshOrientationError : Error {
  using Error::Error;
};

struct NoVanishingComponentError : Error {
  using Error::Error;
};

struct NotVanishingError : Error {
  using Error::Error;
};

struct BoundaryError : Error {
  using Error::Error;
};

struct NotComparableError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace otcal
