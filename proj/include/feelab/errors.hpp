// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace feelab
{
/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Iterative method exhausted its iteration budget.
class ConvergenceError : public Error
{
public:
    using Error::Error;
};

/// A user-supplied function returned a non-finite (or otherwise unusable) value.
class EvaluationError : public Error
{
public:
    EvaluationError(const std::string& what, double abscissa)
      : Error(what + " at x=" + std::to_string(abscissa)), abscissa_{abscissa}
    {}

    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

/// Congestion reached or exceeded 1: the queue cannot clear.
class CongestionOverflow : public Error
{
public:
    CongestionOverflow(const std::string& what, double load)
      : Error(what + " (load=" + std::to_string(load) + ")"), load_{load}
    {}

    double load() const noexcept { return load_; }

private:
    double load_;
};

/// Malformed scenario or input file.
class ConfigError : public Error
{
public:
    using Error::Error;
};
}  // namespace feelab
