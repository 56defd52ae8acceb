#pragma once

#include <stdexcept>
#include <string>

namespace seqcopy {

// Base class for every error the library raises. The CLI maps these to a
// one-line diagnostic and a nonzero exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct OovError : Error { using Error::Error; };
struct EmptySupport : Error { using Error::Error; };
struct DeterminismError : Error { using Error::Error; };
struct InvalidInstance : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct CorruptionError : Error { using Error::Error; };
struct IncompatibilityError : Error { using Error::Error; };
struct InternalError : Error { using Error::Error; };

}  // namespace seqcopy
