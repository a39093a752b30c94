#pragma once

#include <stdexcept>
#include <string>

namespace lmt {

// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration value out of its documented domain.
class InvalidConfigError : public Error {
public:
    explicit InvalidConfigError(const std::string& msg) : Error(msg) {}
};

// Deployment could not satisfy the source-interconnection constraint
// within the retry budget. Carries the offending seed.
class DeploymentInfeasibleError : public Error {
public:
    DeploymentInfeasibleError(const std::string& msg, std::uint64_t seed)
        : Error(msg + " (seed " + std::to_string(seed) + ")"), seed(seed) {}
    std::uint64_t seed;
};

// The induced source subgraph is disconnected where an operation needs it whole.
class NotConnectedError : public Error {
public:
    explicit NotConnectedError(const std::string& msg) : Error(msg) {}
};

// A node id was passed that is not a member of the tree in question.
class NotAMemberError : public Error {
public:
    explicit NotAMemberError(const std::string& msg) : Error(msg) {}
};

// Exhaustive search refused: instance larger than the configured limit.
class OracleLimitError : public Error {
public:
    explicit OracleLimitError(const std::string& msg) : Error(msg) {}
};

// A printed-formula metric hit a zero denominator or empty domain.
class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& msg) : Error(msg) {}
};

// Estimator asked for a value before it has enough samples.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

// Two lifetime curves cannot be compared at the requested level.
class NotComparableError : public Error {
public:
    explicit NotComparableError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace lmt
