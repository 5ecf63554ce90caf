#pragma once

#include <stdexcept>
#include <string>

namespace kbie {

/// Base of every exception thrown by the library. `category()` is a short,
/// stable token used by the CLI to build machine-parseable error lines.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* category() const noexcept { return "error"; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "domain"; }
};

/// Kernel evaluated at coincident points.
class SingularityError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "singularity"; }
};

/// Degenerate or self-intersecting geometry.
class GeometryError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "geometry"; }
};

/// Query that does not apply to the given obstacle variant.
class UnsupportedQuery : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "unsupported"; }
};

/// The static kernel is not integrable against the measure (d <= n-2).
class ModelError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "model"; }
};

/// Requested discretization too large.
class ResourceError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "resource"; }
};

/// Factorization failure, loss of definiteness, insufficient data.
class NumericError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "numeric"; }
};

/// Galerkin matrix numerically singular at wavenumber `k`.
class NearResonanceError : public NumericError {
public:
    NearResonanceError(double k, double cond_estimate)
        : NumericError("near-resonance: matrix numerically singular at k=" + std::to_string(k) +
                       " (condition estimate " + std::to_string(cond_estimate) + ")"),
          k_(k), cond_(cond_estimate) {}
    const char* category() const noexcept override { return "resonance"; }
    double k() const noexcept { return k_; }
    double cond_estimate() const noexcept { return cond_; }

private:
    double k_;
    double cond_;
};

class IoError : public Error {
public:
    using Error::Error;
    const char* category() const noexcept override { return "io"; }
};

/// Invalid configuration; `line()` is 0 when the problem is not tied to a line.
class ConfigError : public Error {
public:
    ConfigError(int line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    const char* category() const noexcept override { return "config"; }
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace kbie
