#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heliquad {

/// Base of every error the library raises. `kind()` is a stable token used in
/// the CLI's machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse", what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& what) : Error("range", what) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error("not_found", what) {}
};

class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& what) : Error("singularity", what) {}
};

/// A radial integration hit a station whose induced-velocity solve did not
/// converge.
class PartialResultError : public Error {
public:
    PartialResultError(std::size_t station, const std::string& what)
        : Error("partial_result", what), station_(station) {}
    std::size_t station() const noexcept { return station_; }

private:
    std::size_t station_;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(double required, const std::string& what)
        : Error("infeasible", what), required_(required) {}
    /// The quantity that exceeded its limit, in the units of the message.
    double required() const noexcept { return required_; }

private:
    double required_;
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& what) : Error("dataset", what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

}  // namespace heliquad
