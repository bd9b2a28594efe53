#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blendopt {

/// Malformed input document. `where` names the offending record or field path.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const { return where_; }

private:
    std::string where_;
};

/// Structurally valid input that breaks a semantic invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke an operation's precondition.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace blendopt
