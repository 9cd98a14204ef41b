#pragma once

#include <stdexcept>
#include <string>

namespace cusplab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define CUSPLAB_ERROR(Name)                                              \
    struct Name : Error {                                                \
        using Error::Error;                                              \
        const char* kind() const noexcept override { return #Name; }     \
    }

CUSPLAB_ERROR(DomainError);
CUSPLAB_ERROR(EvaluationError);
CUSPLAB_ERROR(SingularPointError);
CUSPLAB_ERROR(ToleranceNotMet);
CUSPLAB_ERROR(DivisionInstability);
CUSPLAB_ERROR(HypothesisError);
CUSPLAB_ERROR(GridError);
CUSPLAB_ERROR(InconclusiveError);
CUSPLAB_ERROR(ConfigError);
CUSPLAB_ERROR(StartOutsideDomain);
CUSPLAB_ERROR(ExcessCensoring);
CUSPLAB_ERROR(SerializationError);

#undef CUSPLAB_ERROR

}  // namespace cusplab
