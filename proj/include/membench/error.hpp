#pragma once

#include <stdexcept>
#include <string>

namespace membench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (manifest, store record, world spec). The message
/// carries the source name and line number when known.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Trace-store failures: out-of-order steps, closed attempts, I/O.
class StoreError : public Error {
public:
    using Error::Error;
};

/// A peer broke the agent wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Transport-level failure talking to a judge backend. Retryable.
class BackendError : public Error {
public:
    using Error::Error;
};

/// A judge reply that does not validate against its role's schema.
class SchemaError : public Error {
public:
    SchemaError(std::string role, std::string field, const std::string& what)
        : Error(role + ": field '" + field + "': " + what),
          role_(std::move(role)), field_(std::move(field)) {}

    const std::string& role() const noexcept { return role_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string role_;
    std::string field_;
};

/// render_prompt called without a binding for a declared placeholder.
class MissingBindingError : public Error {
public:
    using Error::Error;
};

/// Composite requested for a step that does not exist or has no screenshot.
class UnknownStepError : public Error {
public:
    UnknownStepError(int step_index, const std::string& what)
        : Error(what), step_index_(step_index) {}
    int step_index() const noexcept { return step_index_; }

private:
    int step_index_;
};

}  // namespace membench
