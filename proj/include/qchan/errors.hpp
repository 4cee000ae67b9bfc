#pragma once

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qchan {

/// Base class for every error raised by the library. `exit_code()` is the
/// process exit status the command-line front end uses for it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
    virtual int exit_code() const noexcept { return 2; }
};

/// Operand shapes do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "shape"; }
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "precondition"; }
};

/// The algebraic structure an operation needs is absent (e.g. not a *-algebra).
class StructureError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "structure"; }
};

/// Input exceeds a hard computational cap.
class LimitError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "limit"; }
};

/// Malformed fixture document.
class ParseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parse"; }
};

/// An iterative method did not converge or a numerical self-check failed.
/// May carry whatever partial eigenvalue estimates were available.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what,
                              std::vector<std::complex<double>> partial = {})
        : Error(what), partial_(std::move(partial)) {}

    const char* kind() const noexcept override { return "numerical_failure"; }
    int exit_code() const noexcept override { return 3; }

    const std::vector<std::complex<double>>& partial() const noexcept { return partial_; }

private:
    std::vector<std::complex<double>> partial_;
};

/// Compact scientific rendering of a residual for messages.
inline std::string format_value(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

} // namespace qchan
