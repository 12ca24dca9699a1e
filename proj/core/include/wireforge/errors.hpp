#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wireforge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. t outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke an interface precondition (mismatched sizes, malformed protocol payload).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Non-finite values detected during optimization.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Network failure talking to a gradient bridge. Retriable.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Aggregates every problem found while validating user input.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string out;
        for (const auto& p : problems) {
            if (!out.empty()) out += '\n';
            out += p;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace wireforge
