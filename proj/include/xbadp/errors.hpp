#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace xbadp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (schedule, artifacts, config).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that breaks a model invariant. Carries every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

}  // namespace xbadp
