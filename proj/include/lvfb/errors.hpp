#pragma once

#include <stdexcept>
#include <string>

namespace lvfb {

// Base of every error raised by the library. The message always names the
// operation that failed, e.g. "semiwave.solve_semiwave: ...".
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LVFB_DEFINE_ERROR(Name)                      \
    class Name : public Error {                      \
    public:                                          \
        using Error::Error;                          \
    }

LVFB_DEFINE_ERROR(DomainError);
LVFB_DEFINE_ERROR(NumericalError);
LVFB_DEFINE_ERROR(SpeedOutOfRange);
LVFB_DEFINE_ERROR(NonConvergence);
LVFB_DEFINE_ERROR(QuadratureError);
LVFB_DEFINE_ERROR(BracketError);
LVFB_DEFINE_ERROR(FitError);
LVFB_DEFINE_ERROR(StepRejected);
LVFB_DEFINE_ERROR(CFLViolation);
LVFB_DEFINE_ERROR(UndecidedAtHorizon);
LVFB_DEFINE_ERROR(BlowUp);
LVFB_DEFINE_ERROR(ConfigError);

#undef LVFB_DEFINE_ERROR

}  // namespace lvfb
