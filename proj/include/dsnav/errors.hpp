#pragma once

#include <stdexcept>
#include <string>

namespace dsnav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Anomaly/light-time solver non-convergence, singularity guards.
class PropagationError : public Error {
  public:
    using Error::Error;
};

/// Zero-separation or polar geometry where a direction is undefined.
class DegenerateGeometryError : public Error {
  public:
    using Error::Error;
};

/// Fewer observations than the solve needs.
class UnderDeterminedError : public Error {
  public:
    using Error::Error;
};

/// Singular normal matrix (collinear or otherwise degenerate LOS set).
class RankDeficiencyError : public Error {
  public:
    using Error::Error;
};

/// Covariance lost symmetry/PSD or an integration step failed.
class NumericalHealthError : public Error {
  public:
    using Error::Error;
};

/// Measurement update skipped: innovation covariance not invertible.
class UpdateSkipError : public Error {
  public:
    using Error::Error;
};

/// Config file parse/validation failure; message carries file:line or the key.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// File I/O failure.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace dsnav
