#ifndef STOPTIME_ERRORS_HPP
#define STOPTIME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stoptime {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotHermitian : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotProjection : Error { using Error::Error; };
struct NotFaithful : Error { using Error::Error; };
struct StateNotNormalized : Error { using Error::Error; };
struct NotInAlgebra : Error { using Error::Error; };
struct UnknownTimePoint : Error { using Error::Error; };
struct ExpectationDoesNotExist : Error { using Error::Error; };
struct InvalidPartition : Error { using Error::Error; };
struct MonotonicityViolation : Error { using Error::Error; };
struct OperandNotProjection : Error { using Error::Error; };
struct NotAMartingale : Error { using Error::Error; };
struct NotInBTau : Error { using Error::Error; };
struct GnsMismatch : Error { using Error::Error; };
struct PullbackFailed : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

} // namespace stoptime

#endif
