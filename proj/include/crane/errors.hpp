#pragma once

#include <stdexcept>
#include <string>

namespace crane {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct NotSymmetric : Error {
    using Error::Error;
};
struct NonFiniteState : Error {
    using Error::Error;
};
struct StructureMismatch : Error {
    using Error::Error;
};
struct NotControllable : Error {
    using Error::Error;
};
struct IllConditioned : Error {
    using Error::Error;
};
struct NotHurwitz : Error {
    using Error::Error;
};
struct StepUnderflow : Error {
    using Error::Error;
};
struct IncompatibleScenarios : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

} // namespace crane
