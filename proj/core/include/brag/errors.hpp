#pragma once

#include <stdexcept>
#include <string>

namespace brag {

/// Base class for all errors raised by the pipeline.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad invocation: unknown flags, missing required arguments. Exit code 1.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(what) {}
};

/// Bad input data: malformed corpus records, invalid config values,
/// violated invariants. Exit code 2.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// Raised when threshold filtering removes every candidate chunk.
class NoEvidenceError : public DataError {
public:
    NoEvidenceError() : DataError("no evidence passed the filter") {}
};

/// Failures talking to an LLM provider. Exit code 3.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what) : Error(what) {}
};

class AuthError : public ProviderError {
public:
    explicit AuthError(const std::string& what) : ProviderError(what) {}
};

class TransportError : public ProviderError {
public:
    explicit TransportError(const std::string& what) : ProviderError(what) {}
};

class EmptyResponseError : public ProviderError {
public:
    EmptyResponseError() : ProviderError("empty response") {}
};

}  // namespace brag
