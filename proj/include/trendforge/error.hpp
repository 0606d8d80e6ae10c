#pragma once

#include <stdexcept>
#include <string>

namespace trendforge {

enum class ErrorKind {
    Parameter,        // invalid argument to an operation
    Parse,            // malformed input file
    Validation,       // well-formed input that violates a domain invariant
    EmptyInput,
    InsufficientData,
    Network,
    Schema,           // serialized document with the wrong schema / version
    Training,
    Config,           // RunConfig schema violation
    MissingArtifact,  // an upstream CLI stage has not been run
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace trendforge
