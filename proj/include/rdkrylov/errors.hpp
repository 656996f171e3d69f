#pragma once

#include <stdexcept>
#include <string>

namespace rdkrylov {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define RDKRYLOV_DEFINE_ERROR(name)                                            \
  class name : public error {                                                  \
  public:                                                                      \
    explicit name(const std::string& what) : error(#name ": " + what) {}       \
  }

// Dense kernels.
RDKRYLOV_DEFINE_ERROR(SingularMatrix);
RDKRYLOV_DEFINE_ERROR(Overflow);
RDKRYLOV_DEFINE_ERROR(NoConvergence);
RDKRYLOV_DEFINE_ERROR(NotHermitian);
RDKRYLOV_DEFINE_ERROR(DimensionMismatch);
RDKRYLOV_DEFINE_ERROR(NonFiniteEntry);

// Operators.
RDKRYLOV_DEFINE_ERROR(SingularShift);
RDKRYLOV_DEFINE_ERROR(NotSupported);
RDKRYLOV_DEFINE_ERROR(InvalidArgument);
RDKRYLOV_DEFINE_ERROR(ParseError);

// Krylov process.
RDKRYLOV_DEFINE_ERROR(ZeroVector);
RDKRYLOV_DEFINE_ERROR(AtFullDimension);
RDKRYLOV_DEFINE_ERROR(BreakdownReached);
RDKRYLOV_DEFINE_ERROR(SingularHessenberg);

// Bounds and geometry.
RDKRYLOV_DEFINE_ERROR(ThetaOutOfRange);
RDKRYLOV_DEFINE_ERROR(NotSectorial);
RDKRYLOV_DEFINE_ERROR(DimensionTooLarge);

#undef RDKRYLOV_DEFINE_ERROR

} // namespace rdkrylov
