#pragma once

#include <stdexcept>
#include <string>

namespace flexilab {

// Root of every library error. The CLI maps any Error to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define FLEXILAB_ERROR(Name)                                            \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    const char* kind() const noexcept override { return #Name; }        \
  };

// complexes
FLEXILAB_ERROR(RidgeCountError)
FLEXILAB_ERROR(DisconnectedError)
FLEXILAB_ERROR(NonOrientableError)
FLEXILAB_ERROR(InvolutionError)

// geomkit
FLEXILAB_ERROR(OffModelError)
FLEXILAB_ERROR(ShapeError)
FLEXILAB_ERROR(NotRealizableError)
FLEXILAB_ERROR(DegenerateSimplexError)
FLEXILAB_ERROR(RankError)
FLEXILAB_ERROR(SignError)
FLEXILAB_ERROR(MinorError)
FLEXILAB_ERROR(DegenerateFacetError)
FLEXILAB_ERROR(NullCombinationError)

// elliptica
FLEXILAB_ERROR(DomainError)
FLEXILAB_ERROR(DegenerateShiftError)

// families
FLEXILAB_ERROR(SpecError)
FLEXILAB_ERROR(DegenerateParameterError)
FLEXILAB_ERROR(PhaseCollisionError)
FLEXILAB_ERROR(GramRealizationError)
FLEXILAB_ERROR(TrackingFailedError)

// confspace
FLEXILAB_ERROR(MissingLengthError)
FLEXILAB_ERROR(NotOnVarietyError)
FLEXILAB_ERROR(RigidError)
FLEXILAB_ERROR(BifurcationError)
FLEXILAB_ERROR(CorrectorDivergenceError)
FLEXILAB_ERROR(SymmetryMismatchError)

// volumetrics
FLEXILAB_ERROR(OnSurfaceError)
FLEXILAB_ERROR(RetryExhaustedError)
FLEXILAB_ERROR(CoarsePathError)

// io
FLEXILAB_ERROR(ParseError)
FLEXILAB_ERROR(ValidationError)

#undef FLEXILAB_ERROR

}  // namespace flexilab
