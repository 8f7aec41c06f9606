#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hetres {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;

// Exception types named after the failure modes they signal. Every error a
// caller is expected to handle programmatically gets its own type; generic
// misuse goes through std::invalid_argument.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrationFailure : Error {
    double blowup_time;
    IntegrationFailure(const std::string& msg, double t)
        : Error(msg), blowup_time(t) {}
};

struct InvalidDelayError : Error { using Error::Error; };
struct InstabilityError : Error { using Error::Error; };
struct ZeroVarianceError : Error { using Error::Error; };
struct RescaleFailure : Error { using Error::Error; };
struct StabilityError : Error { using Error::Error; };
struct InfeasibleRateError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct UndefinedScoreError : Error { using Error::Error; };
struct UndefinedComplexityError : Error { using Error::Error; };
struct UndefinedSimilarityError : Error { using Error::Error; };
struct UndefinedOverlapError : Error { using Error::Error; };
struct DegenerateStateError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct CorruptionError : Error { using Error::Error; };
struct UnsupportedVersionError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hetres
