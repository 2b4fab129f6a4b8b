#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedOrderError : public Error {
public:
    using Error::Error;
};

class OutOfOrderError : public Error {
public:
    using Error::Error;
};

class InvalidParameterError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Fundamental tensor failed to be positive definite at a sample.
class DegenerateMetricError : public Error {
public:
    DegenerateMetricError(const std::string& what, std::vector<double> x, std::vector<double> y)
        : Error(what), x_(std::move(x)), y_(std::move(y))
    {
    }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

class DegenerateFlagError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

class ImplicitSolveError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace finsler
