#pragma once

#include <stdexcept>
#include <string>

namespace flowcast {

/// Error families. The CLI maps `data` to exit code 2 and `compute` to
/// exit code 3; flag/usage problems never reach this hierarchy.
enum class ErrorKind { data, compute };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Series or sample too short for the requested operation.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Zero-variance series where variation is required (e.g. autocorrelation).
class DegenerateSeriesError : public Error {
public:
    explicit DegenerateSeriesError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Input whose content leaves an operation undefined (e.g. interpolating a
/// fully missing series).
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Seed/anchor count does not match the differencing order.
class AnchorMismatchError : public Error {
public:
    explicit AnchorMismatchError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Timestamps or windows that do not line up on the series grid.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InvalidParameterError : public Error {
public:
    explicit InvalidParameterError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Mismatched or empty arguments to a computation.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Malformed file content; carries the offending line number (1-based).
class ParseError : public Error {
public:
    ParseError(const std::string& path, long line, const std::string& what)
        : Error(ErrorKind::data, path + ":" + std::to_string(line) + ": " + what),
          path_(path),
          line_(line) {}
    const std::string& path() const noexcept { return path_; }
    long line() const noexcept { return line_; }

private:
    std::string path_;
    long line_;
};

/// Optimizer did not converge on any restart; carries the best objective seen.
class FitFailedError : public Error {
public:
    FitFailedError(const std::string& what, double best_objective)
        : Error(ErrorKind::compute, what), best_objective_(best_objective) {}
    double best_objective() const noexcept { return best_objective_; }

private:
    double best_objective_;
};

/// Every candidate in a model-selection grid failed to fit.
class SelectionFailedError : public Error {
public:
    explicit SelectionFailedError(const std::string& what) : Error(ErrorKind::compute, what) {}
};

}  // namespace flowcast
