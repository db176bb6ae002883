#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cptrank {

/// Shape or argument contract violated (length mismatch, bad mode, ...).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed network document. Carries the 1-based line and the token
/// the parser stopped at.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string token, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what +
                             (token.empty() ? "" : " (at '" + token + "')")),
          line_(line), token_(std::move(token)) {}

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] const std::string& token() const { return token_; }

private:
    std::size_t line_;
    std::string token_;
};

/// A recognised but deliberately unsupported construct of the .net format.
class UnsupportedFeature : public ParseError {
public:
    using ParseError::ParseError;
};

/// CPT whose child distribution does not sum to one for some configuration.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string node, std::size_t configuration, const std::string& what)
        : std::runtime_error(what), node_(std::move(node)), configuration_(configuration) {}

    [[nodiscard]] const std::string& node() const { return node_; }
    [[nodiscard]] std::size_t configuration() const { return configuration_; }

private:
    std::string node_;
    std::size_t configuration_;
};

/// An input file could not be opened or read.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Named node missing from a network, or excluded by the parent filter.
class NodeLookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown inside a solver (non-finite residual).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cptrank
