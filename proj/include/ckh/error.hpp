#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckh {

enum class ErrorKind {
    InvalidPair,
    InvalidWeights,
    InvalidRow,
    EmptyMatrix,
    ScopeError,
    ParseError,
    ValidationError,
    SingularityError,
    InsufficientData,
    InvalidInput,
    InvalidSpec,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Prefix the message with location context (tier, pair, file).
    Error with_context(const std::string& context) const {
        return Error(kind_, context + ": " + what());
    }

private:
    ErrorKind kind_;
};

}  // namespace ckh
