#pragma once

#include <stdexcept>
#include <string>

namespace prodmp {

/// Failure category. The integer values double as CLI exit codes.
enum class ErrorKind : int {
    Validation = 2,
    Io = 3,
    Numerical = 4,
    Dimension = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace prodmp
