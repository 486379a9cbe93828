#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vrmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Table or policy shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A probability table, reward, or configuration value failed validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A behavior policy puts zero mass on a (t, s, a) that the estimator needs.
class SupportError : public Error {
public:
    SupportError(std::size_t t, std::size_t s, std::size_t a, const std::string& what)
        : Error(what + " at (t=" + std::to_string(t) + ", s=" + std::to_string(s) +
                ", a=" + std::to_string(a) + ")"),
          t_(t), s_(s), a_(a) {}

    std::size_t time() const { return t_; }
    std::size_t state() const { return s_; }
    std::size_t action() const { return a_; }

private:
    std::size_t t_, s_, a_;
};

/// A trajectory contains a step with zero behavior probability.
class InvalidTrajectoryError : public Error {
public:
    using Error::Error;
};

/// Exhaustive trajectory enumeration would exceed the size cap.
class EnumerationInfeasibleError : public Error {
public:
    using Error::Error;
};

/// SGD produced non-finite weights.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& stage)
        : Error("training diverged in stage '" + stage + "'"), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Wraps an error raised inside a named experiment stage.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace vrmc
